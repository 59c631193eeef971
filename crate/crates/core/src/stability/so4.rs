use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    pairs, unstable_witness, Certificate, Conditions, So4Certificate, StabilityReport, Verdict, Witness,
};
use crate::error::{Error, Genericity, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::so4::LambdaSpec;
use crate::tolerance::tolerances;

/// Coefficients of `zeta^4 + c2 zeta^2 + c0` and its discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct So4Characteristic {
    pub c2: f64,
    pub c0: f64,
    pub discriminant: f64,
    /// `(Lambda_3^2 - Lambda_1^2)(Lambda_3^2 - Lambda_2^2)`.
    pub p: f64,
}

impl So4Characteristic {
    fn raw(lambda: &[f64; 3], a: f64) -> Self {
        let [l1, l2, l3] = *lambda;
        let c2 = (a * a + 1.0) * l3 * l3 + 2.0 * a * l1 * l2;
        let p = (l3 * l3 - l1 * l1) * (l3 * l3 - l2 * l2);
        let c0 = a * a * p;
        Self {
            c2,
            c0,
            discriminant: c2 * c2 - 4.0 * c0,
            p,
        }
    }

    /// The factored form `Lambda_3^2 [(a^2-1)^2 Lambda_3^2 + 4a^2(Lambda_1^2+Lambda_2^2) + 4a(a^2+1) Lambda_1 Lambda_2]`.
    pub fn discriminant_factored(lambda: &LambdaSpec, a: f64) -> f64 {
        let [l1, l2, l3] = lambda.lambda;
        let a2 = a * a;
        l3 * l3
            * ((a2 - 1.0).powi(2) * l3 * l3
                + 4.0 * a2 * (l1 * l1 + l2 * l2)
                + 4.0 * a * (a2 + 1.0) * l1 * l2)
    }

    pub fn is_boundary(&self) -> bool {
        self.discriminant.abs() < tolerances().discriminant * self.c2 * self.c2
    }

    pub fn conditions(&self) -> Conditions {
        let boundary = self.is_boundary();
        Conditions {
            i: self.p > 0.0,
            ii: self.c2 > 0.0,
            iiia: self.discriminant > 0.0 && !boundary,
            iiib: boundary,
        }
    }

    pub fn is_stable(&self) -> bool {
        let c = self.conditions();
        c.i && c.ii && c.iiia
    }
}

/// The matrix `L` in `v = (xi1, eta1, xi2, eta2)`.
pub fn explicit_l(lambda: &LambdaSpec, a: f64) -> DMatrix<f64> {
    let [l1, l2, l3] = lambda.lambda;
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.0, -l3, l1, //
            0.0, 0.0, a * l1, -a * l3, //
            l3, -l2, 0.0, 0.0, //
            -a * l2, a * l3, 0.0, 0.0,
        ],
    )
}

/// The linearised matrix flow at `(a e3, e3)` in the same chart; equals `-L`.
pub fn flow_matrix(lambda: &LambdaSpec, a: f64) -> DMatrix<f64> {
    -explicit_l(lambda, a)
}

pub fn so4_characteristic(lambda: &LambdaSpec, a: f64) -> Result<So4Characteristic> {
    if a == 0.0 || !a.is_finite() {
        return Err(Genericity::ZeroA(a).into());
    }
    Ok(So4Characteristic::raw(&lambda.lambda, a))
}

/// The four roots of `zeta^4 + c2 zeta^2 + c0`.
pub(crate) fn so4_roots(ch: &So4Characteristic) -> [Complex64; 4] {
    let sq = Complex64::new(ch.discriminant, 0.0).sqrt();
    let sign = if ch.c2 >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (Complex64::new(ch.c2, 0.0) + sign * sq);
    let (w1, w2) = if q.norm() == 0.0 {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (q, Complex64::new(ch.c0, 0.0) / q)
    };
    let (z1, z2) = (w1.sqrt(), w2.sqrt());
    [z1, -z1, z2, -z2]
}

pub(crate) fn block_roots(lambda: &[f64; 3], a: f64) -> [Complex64; 4] {
    so4_roots(&So4Characteristic::raw(lambda, a))
}

/// The displayed 2x2 blocks `H1, H2, F1, F2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplayedBlocks {
    pub h1: Matrix2<f64>,
    pub h2: Matrix2<f64>,
    pub f1: Matrix2<f64>,
    pub f2: Matrix2<f64>,
}

pub fn displayed_blocks(lambda: &LambdaSpec, a: f64) -> DisplayedBlocks {
    let [l1, l2, l3] = lambda.lambda;
    let m = Matrix2::new(a + 1.0, a - 1.0, a - 1.0, a + 1.0);
    DisplayedBlocks {
        h1: Matrix2::new(l3 - l2, 0.0, 0.0, l3 + l2),
        h2: Matrix2::new(l3 - l1, 0.0, 0.0, l3 + l1),
        f1: m * Matrix2::new(l3 + l1, 0.0, 0.0, l3 - l1) * m * (l3 * l3 - l2 * l2),
        f2: m * Matrix2::new(l3 + l2, 0.0, 0.0, l3 - l2) * m * (l3 * l3 - l1 * l1),
    }
}

/// Hessians of the restricted `H = l^T Lambda m` and `F = Lambda_1 Lambda_2 H + Lambda_3 K`
/// at `(a e3, e3)` in the chart `v -> (a xi ^ e3, eta ^ e3)`.
///
/// In the `(xi1, eta1)` and `(xi2, eta2)` planes these are `-(a/2) P H_k P` and
/// `-(1/8) P F_k P` with `P = [[1, 1], [1, -1]]`.
pub fn restricted_hessians(lambda: &LambdaSpec, a: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let [l1, l2, l3] = lambda.lambda;
    let mut h = DMatrix::zeros(4, 4);
    let mut f = DMatrix::zeros(4, 4);
    for (off, other, scale) in [(0, l2, l2 * l2 - l3 * l3), (2, l1, l1 * l1 - l3 * l3)] {
        let cross = if off == 0 { l1 } else { l2 };
        h[(off, off)] = -a * l3;
        h[(off + 1, off + 1)] = -a * l3;
        h[(off, off + 1)] = a * other;
        h[(off + 1, off)] = a * other;
        f[(off, off)] = scale * l3 * a * a;
        f[(off + 1, off + 1)] = scale * l3;
        f[(off, off + 1)] = scale * cross * a;
        f[(off + 1, off)] = scale * cross * a;
    }
    (h, f)
}

/// The pairing restricted to the chart: `2 diag(a^2, 1, a^2, 1)`.
pub fn orbit_metric(a: f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0 * a * a, 2.0, 2.0 * a * a, 2.0]))
}

/// `sqrt(|lambda|_max / |lambda|_min)` of `G^-1/2 Hf G^-1/2`; infinite when not definite.
pub fn condition_factor(hessian: &DMatrix<f64>, metric: &DMatrix<f64>) -> f64 {
    let inv_sqrt = metric.map_diagonal(|g| 1.0 / g.sqrt());
    let scaled = DMatrix::from_diagonal(&inv_sqrt) * hessian * DMatrix::from_diagonal(&inv_sqrt);
    let ev = symmetric_eigenvalues(&scaled);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo * hi <= 0.0 {
        return f64::INFINITY;
    }
    (hi.abs().max(lo.abs()) / hi.abs().min(lo.abs())).sqrt()
}

fn is_definite(m: &DMatrix<f64>) -> bool {
    let ev = symmetric_eigenvalues(m);
    ev[0] * ev[ev.len() - 1] > 0.0
}

fn to_array(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Energy-Casimir certificate for a stable `(Lambda, a)`.
///
/// With `z` at the vertex of the quadratic, `Q_k = 4z H_k + F_k` is the Hessian
/// of `(z/a) H + F`. That combination certifies case two; in case one the
/// restricted `H` is itself definite and is used instead.
pub fn lyapunov_certificate(lambda: &LambdaSpec, a: f64) -> Result<So4Certificate> {
    lambda.check_generic()?;
    let ch = so4_characteristic(lambda, a)?;
    if !ch.is_stable() {
        let c = ch.conditions();
        return Err(Error::OutsideStableRegion(format!(
            "(i) {}, (ii) {}, (iiia) {}",
            c.i, c.ii, c.iiia
        )));
    }
    let [l1, l2, l3] = lambda.lambda;
    let z = -0.5 * ch.c2;
    let blocks = displayed_blocks(lambda, a);
    let q1 = blocks.h1 * (4.0 * z) + blocks.f1;
    let q2 = blocks.h2 * (4.0 * z) + blocks.f2;
    let (det_q1, det_q2) = (q1.determinant(), q2.determinant());
    let trace_product = q1.trace() * q2.trace();
    let vertex_definite = det_q1 > 0.0 && det_q2 > 0.0 && trace_product > 0.0;

    let (h, f) = restricted_hessians(lambda, a);
    let hamiltonian_definite = is_definite(&h);
    let case = if l3 * l3 > l1 * l1 { 1 } else { 2 };
    let metric = orbit_metric(a);
    let (function, h_weight, k_weight, hessian) = if case == 1 {
        ("H".to_string(), 1.0, 0.0, h)
    } else {
        (
            "(z/a) H + F".to_string(),
            z / a + l1 * l2,
            l3,
            &h * (z / a) + f,
        )
    };
    Ok(So4Certificate {
        case,
        z,
        q1: to_array(&q1),
        q2: to_array(&q2),
        det_q1,
        det_q2,
        trace_product,
        vertex_definite,
        hamiltonian_definite,
        function,
        h_weight,
        k_weight,
        kappa: condition_factor(&hessian, &metric),
    })
}

fn boundary_witness(lambda: &LambdaSpec, a: f64, d: f64) -> Witness {
    let eps = 1e-3 * a.abs();
    let dm = So4Characteristic::raw(&lambda.lambda, a - eps).discriminant;
    let dp = So4Characteristic::raw(&lambda.lambda, a + eps).discriminant;
    Witness::Boundary {
        discriminant: d,
        a_minus: a - eps,
        discriminant_minus: dm,
        a_plus: a + eps,
        discriminant_plus: dp,
    }
}

/// Stability of `(a e3, e3)`: stable exactly when (i), (ii) and (iiia) hold.
pub fn classify_so4(lambda: &LambdaSpec, a: f64) -> Result<StabilityReport> {
    lambda.check_generic()?;
    let ch = so4_characteristic(lambda, a)?;
    let conditions = ch.conditions();
    let roots = so4_roots(&ch);
    let (verdict, certificate, witness) = if ch.is_stable() {
        let cert = lyapunov_certificate(lambda, a)?;
        (Verdict::Stable, Some(Certificate::So4(cert)), None)
    } else {
        let w = if conditions.i && conditions.ii && conditions.iiib {
            boundary_witness(lambda, a, ch.discriminant)
        } else {
            unstable_witness(&roots).unwrap_or_else(|| boundary_witness(lambda, a, ch.discriminant))
        };
        (Verdict::Unstable, None, Some(w))
    };
    Ok(StabilityReport {
        verdict,
        lambda: Some(lambda.lambda),
        a: Some(a),
        b: Some(1.0),
        conditions: Some(conditions),
        characteristic: Some(ch),
        eigenvalues: pairs(&roots),
        certificate,
        witness,
        blocks: Vec::new(),
        message: None,
    })
}
