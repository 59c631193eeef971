//! CSV and JSON writers for trajectories, equilibria and orbits.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::equilibria::{EquilibriumPoint, EquilibriumRecord};
use crate::error::Result;
use crate::heteroclinic::{HeteroclinicOrbit, OrbitVerification};
use crate::so4::mu_to_lm;
use crate::stability::BlockKind;

/// `m_i_j` column names (one-based) for the strict upper triangle.
pub fn upper_names(n: usize, prefix: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..=n {
        for j in i + 1..=n {
            out.push(format!("{prefix}_{i}_{j}"));
        }
    }
    out
}

/// Writes `t, m_1_2, …, <invariants>`, with `l1..m3` appended when n = 4.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let n = traj.n();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(upper_names(n, "m"));
    header.extend(traj.invariant_names.iter().cloned());
    if n == 4 {
        header.extend(["l1", "l2", "l3", "m1", "m2", "m3"].map(String::from));
    }
    w.write_record(&header)?;
    for ((t, state), inv) in traj.times.iter().zip(&traj.states).zip(&traj.invariant_log) {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        row.push(fmt(*t));
        row.extend(state.upper().iter().map(|v| fmt(*v)));
        row.extend(inv.iter().map(|v| fmt(*v)));
        if n == 4 {
            row.extend(mu_to_lm(state)?.to_array().iter().map(|v| fmt(*v)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Uniform interior grid `s_k = k s_end / (samples + 1)`, `k = 1..=samples`.
pub fn orbit_grid(orbit: &HeteroclinicOrbit, samples: usize) -> Vec<f64> {
    (1..=samples)
        .map(|k| orbit.s_end() * k as f64 / (samples + 1) as f64)
        .collect()
}

/// Writes `s, T, g_1_2, …` on the interior grid.
pub fn write_orbit_csv<W: Write>(orbit: &HeteroclinicOrbit, samples: usize, out: W) -> Result<()> {
    let n = orbit.x0.n();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["s".to_string(), "T".to_string()];
    header.extend(upper_names(n, "g"));
    w.write_record(&header)?;
    for s in orbit_grid(orbit, samples) {
        let g = orbit.point_exact(s);
        let mut row = vec![fmt(s), fmt(orbit.time(s))];
        row.extend(g.upper().iter().map(|v| fmt(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

pub fn equilibrium_records(points: &[EquilibriumPoint]) -> Vec<EquilibriumRecord> {
    points.iter().map(EquilibriumPoint::record).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub z: f64,
    pub delta: f64,
    pub s_end: f64,
    /// Upper triangles of `x0` and `x1`.
    pub endpoints: [Vec<f64>; 2],
    pub generator: Vec<f64>,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<BlockKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_identity_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction_residual: Option<f64>,
    pub verification: OrbitVerification,
}

impl OrbitSummary {
    pub fn new(orbit: &HeteroclinicOrbit, verification: OrbitVerification) -> Self {
        Self {
            z: orbit.z,
            delta: orbit.delta,
            s_end: orbit.s_end(),
            endpoints: [orbit.x0.upper().to_vec(), orbit.x1.upper().to_vec()],
            generator: orbit.generator.upper().to_vec(),
            max_residual: verification.max_residual,
            block: orbit.block,
            norm_identity_residual: orbit.norm_identity_residual,
            reduction_residual: orbit.reduction_residual,
            verification,
        }
    }
}
