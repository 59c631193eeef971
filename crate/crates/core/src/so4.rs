//! so(4) = so(3) + so(3) coordinates `(l, m)` and the reduced dynamics.

use serde::{Deserialize, Serialize};

use crate::dynamics::InertiaSpec;
use crate::error::{Error, Genericity, Result};
use crate::son::AntisymMatrix;
use crate::tolerance::tolerances;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LMState {
    pub l: Vec3,
    pub m: Vec3,
}

impl LMState {
    pub fn new(l: Vec3, m: Vec3) -> Self {
        Self { l, m }
    }

    /// The equilibrium `b (a e_k, e_k)`, `k` zero-based.
    pub fn axis(a: f64, b: f64, k: usize) -> Self {
        let mut s = Self::default();
        s.l[k] = a * b;
        s.m[k] = b;
        s
    }

    /// `(|l|^2, |m|^2)`, the two Casimirs.
    pub fn casimirs(&self) -> (f64, f64) {
        (dot(&self.l, &self.l), dot(&self.m, &self.m))
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.l[0], self.l[1], self.l[2], self.m[0], self.m[1], self.m[2]]
    }

    pub fn from_array(v: &[f64; 6]) -> Self {
        Self::new([v[0], v[1], v[2]], [v[3], v[4], v[5]])
    }
}

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn hadamard(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] * b[0], a[1] * b[1], a[2] * b[2]]
}

pub fn lm_to_mu(s: &LMState) -> AntisymMatrix {
    let (l, m) = (&s.l, &s.m);
    // Upper triangle order: 12, 13, 14, 23, 24, 34.
    let upper = vec![
        l[2] - m[2],
        l[1] - m[1],
        l[0] - m[0],
        -l[0] - m[0],
        l[1] + m[1],
        -l[2] - m[2],
    ];
    AntisymMatrix::from_upper(4, upper).expect("six entries")
}

pub fn mu_to_lm(mu: &AntisymMatrix) -> Result<LMState> {
    if mu.n() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: mu.n(),
        });
    }
    let u = mu.upper();
    let (m12, m13, m14, m23, m24, m34) = (u[0], u[1], u[2], u[3], u[4], u[5]);
    Ok(LMState::new(
        [0.5 * (m14 - m23), 0.5 * (m13 + m24), 0.5 * (m12 - m34)],
        [-0.5 * (m14 + m23), 0.5 * (m24 - m13), -0.5 * (m12 + m34)],
    ))
}

/// `(a, b)` with `mu_to_lm(x) = b (a e_3, e_3)` for a Cartan element `x = (x1, x2)`.
pub fn cartan_to_axis(x1: f64, x2: f64) -> (f64, f64) {
    ((x2 - x1) / (x1 + x2), -0.5 * (x1 + x2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSpec {
    pub lambda: Vec3,
    pub theta: Vec3,
}

impl LambdaSpec {
    pub fn new(lambda: Vec3) -> Result<Self> {
        let s = Self::unchecked(lambda);
        s.check_generic()?;
        Ok(s)
    }

    pub fn unchecked(lambda: Vec3) -> Self {
        let [l1, l2, l3] = lambda;
        Self {
            lambda,
            theta: [l2 * l3, l1 * l3, l1 * l2],
        }
    }

    pub fn check_generic(&self) -> std::result::Result<(), Genericity> {
        let tol = tolerances().genericity;
        let scale = self.lambda.iter().map(|v| v * v).fold(0.0, f64::max);
        for (i, &v) in self.lambda.iter().enumerate() {
            if v == 0.0 || v * v <= tol * scale {
                return Err(Genericity::LambdaZero { i: i + 1, value: v });
            }
        }
        for i in 0..3 {
            for j in i + 1..3 {
                let (li, lj) = (self.lambda[i], self.lambda[j]);
                if (li * li - lj * lj).abs() <= tol * scale {
                    return Err(Genericity::LambdaSquares {
                        i: i + 1,
                        j: j + 1,
                        li,
                        lj,
                    });
                }
            }
        }
        Ok(())
    }

    /// `Lambda^P = diag(Lambda_P(1), Lambda_P(2), Lambda_P(3))`, `p` zero-based.
    pub fn permuted(&self, p: [usize; 3]) -> Self {
        Self::unchecked([self.lambda[p[0]], self.lambda[p[1]], self.lambda[p[2]]])
    }
}

pub fn lambda_from_j(j: &InertiaSpec) -> Result<LambdaSpec> {
    if j.n() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: j.n(),
        });
    }
    LambdaSpec::new(lambda_from_values(j.values()))
}

pub(crate) fn lambda_from_values(j: &[f64]) -> Vec3 {
    [
        -j[0] + j[1] + j[2] - j[3],
        -j[0] + j[1] - j[2] + j[3],
        -j[0] - j[1] + j[2] + j[3],
    ]
}

/// An inertia `J` with `lambda_from_j(J) = Lambda`, shifted until `J` is generic.
pub fn j_from_lambda(lambda: &LambdaSpec) -> Result<InertiaSpec> {
    let [l1, l2, l3] = lambda.lambda;
    let base = [0.0, 0.5 * (l1 + l2), 0.5 * (l1 + l3), 0.5 * (l2 + l3)];
    let scale = base.iter().map(|v: &f64| v.abs()).fold(1.0, f64::max);
    let mut last = None;
    for k in 0..8 {
        let shift = scale * (1.0 + k as f64 * 0.37);
        match InertiaSpec::new(base.iter().map(|v| v + shift).collect()) {
            Ok(j) => return Ok(j),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// `(H, K)` with `H = l^T Lambda m` and `K = 1/2 l^T Lambda^2 l + 1/2 m^T Lambda^2 m - l^T Theta m`.
pub fn lm_hamiltonians(lambda: &LambdaSpec, s: &LMState) -> (f64, f64) {
    let lam = &lambda.lambda;
    let h = dot(&s.l, &hadamard(lam, &s.m));
    let lam2 = hadamard(lam, lam);
    let k = 0.5 * dot(&s.l, &hadamard(&lam2, &s.l)) + 0.5 * dot(&s.m, &hadamard(&lam2, &s.m))
        - dot(&s.l, &hadamard(&lambda.theta, &s.m));
    (h, k)
}

/// `l' = (Lambda m) x l`, `m' = (Lambda l) x m`.
pub fn lm_vector_field(lambda: &LambdaSpec, s: &LMState) -> LMState {
    let lam = &lambda.lambda;
    LMState::new(
        cross(&hadamard(lam, &s.m), &s.l),
        cross(&hadamard(lam, &s.l), &s.m),
    )
}
