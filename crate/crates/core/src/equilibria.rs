//! Equilibria on a generic coadjoint orbit.
//!
//! Every equilibrium is a permutation image `P x P^-1` of the Cartan element;
//! for even `n` only even permutations stay on the SO(n) orbit.

use serde::{Deserialize, Serialize};

use crate::dynamics::{vector_field, InertiaSpec};
use crate::error::{Error, Result};
use crate::son::{AntisymMatrix, CartanElement, Permutation};
use crate::tolerance::tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint {
    pub permutation: Permutation,
    pub point: AntisymMatrix,
    /// Frobenius norm of `[J, point^2]`.
    pub residual: f64,
}

impl EquilibriumPoint {
    pub fn sign(&self) -> i8 {
        self.permutation.sign()
    }

    /// `P^-1 J P`: the inertia seen from a frame where this point is `x` itself.
    pub fn normal_form_inertia(&self, j: &InertiaSpec) -> Result<InertiaSpec> {
        InertiaSpec::unchecked(self.permutation.pull_back_diagonal(j.values()))
    }

    pub fn record(&self) -> EquilibriumRecord {
        EquilibriumRecord {
            perm: self.permutation.one_based(),
            sign: self.sign(),
            residual: self.residual,
            point: self.point.upper().to_vec(),
        }
    }
}

/// JSON form of an equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    /// One-based images `p(1) … p(n)`.
    pub perm: Vec<usize>,
    pub sign: i8,
    pub residual: f64,
    /// Strict upper triangle, row-major.
    pub point: Vec<f64>,
}

fn scale(j: &InertiaSpec, mu: &AntisymMatrix) -> f64 {
    let j_norm = j.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    j_norm * mu.frobenius_norm().powi(2)
}

/// Residual `|[J, mu^2]|_F` and whether it is below `tol * |J| |mu|^2`.
pub fn is_equilibrium(j: &InertiaSpec, mu: &AntisymMatrix) -> Result<(bool, f64)> {
    let residual = vector_field(j, mu)?.frobenius_norm();
    let threshold = tolerances().equilibrium * scale(j, mu);
    Ok((residual <= threshold, residual))
}

/// `|S_n / S_n^{x^2}| = n! / 2^m`, the number of distinct diagonal matrices `p(x^2)`.
pub fn coset_count(n: usize) -> u64 {
    let m = (n / 2) as u32;
    (1..=n as u64).product::<u64>() >> m
}

/// All equilibria on the orbit of a generic `x`, in lexicographic order of `p`.
pub fn enumerate_equilibria(x: &CartanElement, j: &InertiaSpec) -> Result<Vec<EquilibriumPoint>> {
    let n = x.n();
    if n < 3 {
        return Err(Error::DimensionTooSmall { n, min: 3 });
    }
    if j.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: j.n(),
        });
    }
    x.check_generic()?;
    j.check_generic()?;
    let xm = x.to_matrix();
    let threshold = 1e-10 * scale(j, &xm);
    let mut out = Vec::new();
    for p in Permutation::all(n) {
        if n % 2 == 0 && !p.is_even() {
            continue;
        }
        let point = p.conjugate(&xm);
        let residual = vector_field(j, &point)?.frobenius_norm();
        if residual > threshold {
            return Err(Error::NotEquilibrium {
                residual,
                threshold,
            });
        }
        out.push(EquilibriumPoint {
            permutation: p,
            point,
            residual,
        });
    }
    check_distinct(&out, tolerances().distinct * xm.frobenius_norm())?;
    Ok(out)
}

fn check_distinct(points: &[EquilibriumPoint], min_dist: f64) -> Result<()> {
    let limit = min_dist * min_dist;
    for (a, pa) in points.iter().enumerate() {
        for pb in &points[a + 1..] {
            // Early exit: most pairs differ in the first few entries.
            let mut acc = 0.0;
            for (u, v) in pa.point.upper().iter().zip(pb.point.upper()) {
                acc += 2.0 * (u - v) * (u - v);
                if acc > limit {
                    break;
                }
            }
            if acc <= limit {
                return Err(Error::InvalidArgument(format!(
                    "equilibria for {:?} and {:?} coincide",
                    pa.permutation.one_based(),
                    pb.permutation.one_based()
                )));
            }
        }
    }
    Ok(())
}
