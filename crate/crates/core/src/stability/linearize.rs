use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynamics::InertiaSpec;
use crate::equilibria::is_equilibrium;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, solve_min_norm};
use crate::son::{ad_matrix, commutator, pairing, so_dim, AntisymMatrix};

/// The map `v -> [J, v x + x v]` on the tangent space of the orbit at `x`,
/// written in a basis that is orthonormal for the pairing.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub point: AntisymMatrix,
    pub basis: Vec<AntisymMatrix>,
    pub matrix: DMatrix<f64>,
}

impl Linearization {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        eigenvalues(&self.matrix)
    }

    pub fn coords(&self, v: &AntisymMatrix) -> Result<DVector<f64>> {
        let mut c = DVector::zeros(self.dim());
        for (k, b) in self.basis.iter().enumerate() {
            c[k] = pairing(b, v)?;
        }
        Ok(c)
    }

    pub fn vector(&self, coords: &DVector<f64>) -> AntisymMatrix {
        let mut out = AntisymMatrix::zeros(self.point.n());
        for (b, c) in self.basis.iter().zip(coords.iter()) {
            out = out.axpy(*c, b);
        }
        out
    }

    /// The minimum-norm `Y` with `[Y, x] = v`.
    pub fn generator_for(&self, v: &AntisymMatrix) -> AntisymMatrix {
        preimage(&self.point, v)
    }
}

pub(crate) fn preimage(x: &AntisymMatrix, v: &AntisymMatrix) -> AntisymMatrix {
    let ad = ad_matrix(x);
    let rhs = DVector::from_column_slice(v.upper());
    let y = solve_min_norm(&ad, &rhs);
    AntisymMatrix::from_upper(x.n(), y.iter().copied().collect()).expect("sizes agree")
}

/// `v -> [J, v x + x v]`.
pub fn linear_map(j: &InertiaSpec, x: &AntisymMatrix, v: &AntisymMatrix) -> AntisymMatrix {
    let n = x.n();
    let (xd, vd) = (x.to_dense(), v.to_dense());
    let w = &vd * &xd + &xd * &vd;
    let jv = j.values();
    let mut out = AntisymMatrix::zeros(n);
    for a in 0..n {
        for b in a + 1..n {
            out.set(a, b, (jv[a] - jv[b]) * w[(a, b)]);
        }
    }
    out
}

/// Orthonormal basis of `{[Y, x]}` from Gram-Schmidt over `[E_ab, x]`, `a < b` in row-major order.
pub fn tangent_basis(x: &AntisymMatrix) -> Vec<AntisymMatrix> {
    let n = x.n();
    let scale = x.norm().max(f64::MIN_POSITIVE);
    let mut basis: Vec<AntisymMatrix> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let mut v = commutator(&AntisymMatrix::unit(n, a, b), x).expect("same n");
            // Two passes keep the basis orthogonal to working precision.
            for _ in 0..2 {
                for e in &basis {
                    let c = pairing(&v, e).expect("same n");
                    v = v.axpy(-c, e);
                }
            }
            let nv = v.norm();
            if nv > 1e-9 * scale {
                basis.push(v.scale(1.0 / nv));
            }
        }
    }
    basis
}

/// Expected orbit dimension on a generic orbit.
pub fn generic_orbit_dim(n: usize) -> usize {
    so_dim(n) - n / 2
}

pub fn linearize(j: &InertiaSpec, x_eq: &AntisymMatrix) -> Result<Linearization> {
    if j.n() != x_eq.n() {
        return Err(Error::DimensionMismatch {
            expected: j.n(),
            found: x_eq.n(),
        });
    }
    let (ok, residual) = is_equilibrium(j, x_eq)?;
    if !ok {
        let scale = j.values().iter().map(|v| v * v).sum::<f64>().sqrt() * x_eq.frobenius_norm().powi(2);
        return Err(Error::NotEquilibrium {
            residual,
            threshold: crate::tolerance::tolerances().equilibrium * scale,
        });
    }
    let basis = tangent_basis(x_eq);
    let d = basis.len();
    let mut matrix = DMatrix::zeros(d, d);
    for (c, b) in basis.iter().enumerate() {
        let image = linear_map(j, x_eq, b);
        for (r, e) in basis.iter().enumerate() {
            matrix[(r, c)] = pairing(e, &image)?;
        }
    }
    Ok(Linearization {
        point: x_eq.clone(),
        basis,
        matrix,
    })
}
