//! Numerical thresholds shared by every module.
//!
//! A process-wide copy is kept behind a lock so that front ends can override the
//! defaults once at start-up; library calls read a snapshot.

use serde::{Deserialize, Serialize};
use std::sync::RwLock;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Antisymmetry / orthogonality drift accepted on inputs.
    pub input_drift: f64,
    /// Drift accepted on values this crate produced itself.
    pub output_drift: f64,
    /// Relative gap below which two squares count as equal.
    pub genericity: f64,
    /// `is_equilibrium` threshold, relative to `|J| |mu|^2`.
    pub equilibrium: f64,
    /// Minimum Frobenius distance (relative to `|x|`) between distinct equilibria.
    pub distinct: f64,
    /// `|Re z| < imaginary * (1 + |z|)` counts as purely imaginary.
    pub imaginary: f64,
    /// `|D| < discriminant * c2^2` counts as the boundary case D = 0.
    pub discriminant: f64,
    /// Eigenvector residual threshold, relative to the vector norm.
    pub eigenvector: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            input_drift: 1e-8,
            output_drift: 1e-10,
            genericity: 1e-9,
            equilibrium: 1e-9,
            distinct: 1e-6,
            imaginary: 1e-8,
            discriminant: 1e-9,
            eigenvector: 1e-8,
        }
    }
}

static GLOBAL: RwLock<Tolerances> = RwLock::new(Tolerances {
    input_drift: 1e-8,
    output_drift: 1e-10,
    genericity: 1e-9,
    equilibrium: 1e-9,
    distinct: 1e-6,
    imaginary: 1e-8,
    discriminant: 1e-9,
    eigenvector: 1e-8,
});

/// Snapshot of the process-wide tolerances.
pub fn tolerances() -> Tolerances {
    *GLOBAL.read().unwrap_or_else(|e| e.into_inner())
}

/// Replace the process-wide tolerances.
pub fn set_tolerances(tol: Tolerances) {
    *GLOBAL.write().unwrap_or_else(|e| e.into_inner()) = tol;
}
