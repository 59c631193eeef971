use thiserror::Error;

/// A violated non-degeneracy assumption. The message names the inequality.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Genericity {
    #[error("J_i^2 != J_j^2 violated: J_{i}^2 = J_{j}^2 (J_{i} = {ji}, J_{j} = {jj})")]
    InertiaSquares { i: usize, j: usize, ji: f64, jj: f64 },
    #[error("x_k != 0 violated: x_{k} = {value}")]
    CartanZero { k: usize, value: f64 },
    #[error("x_k^2 != x_l^2 violated: x_{k}^2 = x_{l}^2 (x_{k} = {xk}, x_{l} = {xl})")]
    CartanSquares { k: usize, l: usize, xk: f64, xl: f64 },
    #[error("Lambda_i != 0 violated: Lambda_{i} = {value}")]
    LambdaZero { i: usize, value: f64 },
    #[error("Lambda_i^2 != Lambda_j^2 violated: Lambda_{i}^2 = Lambda_{j}^2 (Lambda_{i} = {li}, Lambda_{j} = {lj})")]
    LambdaSquares { i: usize, j: usize, li: f64, lj: f64 },
    #[error("a != 0 violated: equilibrium parameter a = {0}")]
    ZeroA(f64),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("so(n) needs n >= {min}, got {n}")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("matrix is not antisymmetric (max |M + M^T| = {deviation:e})")]
    NotAntisymmetric { deviation: f64 },
    #[error("matrix is not orthogonal (max |G^T G - I| = {deviation:e})")]
    NotOrthogonal { deviation: f64 },
    #[error("non-generic input: {0}")]
    NonGeneric(#[from] Genericity),
    #[error("point is not an equilibrium (residual {residual:e}, threshold {threshold:e})")]
    NotEquilibrium { residual: f64, threshold: f64 },
    #[error("equilibrium is not in Cartan normal form")]
    NotNormalForm,
    #[error("generator lies in the isotropy algebra: [Y, x] = 0")]
    ZeroTangent,
    #[error("no real nonzero eigenvalue: a 1-parameter subgroup orbit through this equilibrium cannot be heteroclinic")]
    NoRealEigenvalue,
    #[error("instance is outside the stable region: {0}")]
    OutsideStableRegion(String),
    #[error("integrator failure: non-finite state at t = {t}")]
    IntegratorFailure { t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
