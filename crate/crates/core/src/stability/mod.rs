//! Linear stability of equilibria and energy-Casimir certificates.

mod blocks;
mod classify;
mod linearize;
mod search;
mod so4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use blocks::{block_decompose, block_decompose_cartan, BlockKind, BlockProblem};
pub use classify::{classify_equilibrium, ClassifyOptions};
pub use linearize::{generic_orbit_dim, linear_map, linearize, tangent_basis, Linearization};
pub use search::{default_search_labels, definiteness_search, SearchCertificate, SearchOptions};
pub use so4::{
    classify_so4, condition_factor, displayed_blocks, explicit_l, flow_matrix, lyapunov_certificate,
    orbit_metric, restricted_hessians, so4_characteristic, So4Characteristic, DisplayedBlocks,
};


#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    Unstable,
    IndeterminateAllImaginary,
    NonGenericRejected,
}

/// Flags for (i) `P > 0`, (ii) `c2 > 0`, (iiia) `D > 0` and (iiib) `D = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditions {
    pub i: bool,
    pub ii: bool,
    pub iiia: bool,
    pub iiib: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// An eigenvalue with positive real part.
    Eigenvalue { re: f64, im: f64 },
    /// `D = 0`: a neighbouring equilibrium `a +- eps` has `D < 0`.
    Boundary {
        discriminant: f64,
        a_minus: f64,
        discriminant_minus: f64,
        a_plus: f64,
        discriminant_plus: f64,
    },
}

/// Energy-Casimir certificate at `(a e3, e3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct So4Certificate {
    /// 1 when `Lambda_3^2` exceeds both other squares, 2 when it is below both.
    pub case: u8,
    /// Vertex of the quadratic in `z`.
    pub z: f64,
    pub q1: [[f64; 2]; 2],
    pub q2: [[f64; 2]; 2],
    pub det_q1: f64,
    pub det_q2: f64,
    pub trace_product: f64,
    /// `det Q1 > 0`, `det Q2 > 0` and `tr Q1 tr Q2 > 0`.
    pub vertex_definite: bool,
    /// Hessian of the restricted `H` is definite.
    pub hamiltonian_definite: bool,
    /// Certified function `h_weight * H + k_weight * K` in `(l, m)` coordinates.
    pub function: String,
    pub h_weight: f64,
    pub k_weight: f64,
    /// Square root of the condition number of the certified Hessian in the orbit metric.
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    So4(So4Certificate),
    /// Two-dimensional orbit: the restricted energy is definite exactly when `zeta^2 < 0`.
    Energy { zeta_squared: f64 },
    Search(SearchCertificate),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Conditions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub characteristic: Option<So4Characteristic>,
    /// `[re, im]` pairs, sorted.
    pub eigenvalues: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub blocks: Vec<BlockProblem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl StabilityReport {
    pub fn rejected(message: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::NonGenericRejected,
            lambda: None,
            a: None,
            b: None,
            conditions: None,
            characteristic: None,
            eigenvalues: Vec::new(),
            certificate: None,
            witness: None,
            blocks: Vec::new(),
            message: Some(message.into()),
        }
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|p| Complex64::new(p[0], p[1]))
            .collect()
    }
}

pub(crate) fn pairs(spectrum: &[Complex64]) -> Vec<[f64; 2]> {
    let mut s = spectrum.to_vec();
    crate::linalg::sort_spectrum(&mut s);
    s.iter().map(|z| [z.re, z.im]).collect()
}

/// `|Re z| < tol (1 + |z|)`.
pub fn is_imaginary(z: Complex64) -> bool {
    z.re.abs() < crate::tolerance::tolerances().imaginary * (1.0 + z.norm())
}

/// The eigenvalue with the largest real part, if that part is clearly positive.
pub(crate) fn unstable_witness(spectrum: &[Complex64]) -> Option<Witness> {
    spectrum
        .iter()
        .filter(|z| !is_imaginary(**z) && z.re > 0.0)
        .max_by(|x, y| x.re.total_cmp(&y.re))
        .map(|z| Witness::Eigenvalue { re: z.re, im: z.im })
}
