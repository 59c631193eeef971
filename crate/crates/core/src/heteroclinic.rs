//! Heteroclinic orbits `gamma(s) = exp(sY) x0 exp(-sY)` joining two equilibria.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{hamiltonian, propagate, sample_at, vector_field, InertiaSpec};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, null_vector};
use crate::so4::{cross, lm_to_mu, LMState, LambdaSpec};
use crate::son::{commutator, group_exp, pairing, AntisymMatrix, CartanElement, Permutation};
use crate::stability::{
    flow_matrix, is_imaginary, linearize, BlockKind, BlockProblem,
};
use crate::tolerance::tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroclinicOrbit {
    /// `Y`.
    pub generator: AntisymMatrix,
    pub x0: AntisymMatrix,
    pub x1: AntisymMatrix,
    /// `[Y, x0]`, an eigenvector of the linearisation at `x0`.
    pub tangent: AntisymMatrix,
    pub z: f64,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<BlockKind>,
    /// `|xi|^2 - |eta|^2` for so(4) eigenvectors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_identity_residual: Option<f64>,
    /// Largest `|[J, gamma^2] - [J_ij, gamma_ij^2]|` over the build samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction_residual: Option<f64>,
}

impl HeteroclinicOrbit {
    /// `pi / Delta`, where the orbit reaches `x1`.
    pub fn s_end(&self) -> f64 {
        std::f64::consts::PI / self.delta
    }

    /// `chi(s) = (z / Delta) sin(s Delta)`.
    pub fn chi(&self, s: f64) -> f64 {
        self.z / self.delta * (s * self.delta).sin()
    }

    pub fn chi_prime(&self, s: f64) -> f64 {
        self.z * (s * self.delta).cos()
    }

    /// `T(s) = (1/z) log tan(s Delta / 2)`.
    pub fn time(&self, s: f64) -> f64 {
        (0.5 * s * self.delta).tan().ln() / self.z
    }

    /// Inverse of [`Self::time`].
    pub fn s_at_time(&self, t: f64) -> f64 {
        2.0 * (self.z * t).exp().atan() / self.delta
    }

    /// The part of `x0` rotated by `Y`, `(x0 - x1) / 2`.
    pub fn moving_part(&self) -> AntisymMatrix {
        self.x0.axpy(-1.0, &self.x1).scale(0.5)
    }

    /// `x0 + (cos(s Delta) - 1) x_b + sin(s Delta) / Delta [Y, x0]` with `x_b` the moving part.
    pub fn point(&self, s: f64) -> AntisymMatrix {
        let th = s * self.delta;
        self.x0
            .axpy(th.cos() - 1.0, &self.moving_part())
            .axpy(th.sin() / self.delta, &self.tangent)
    }

    /// `exp(sY) x0 exp(-sY)` evaluated with the matrix exponential.
    pub fn point_exact(&self, s: f64) -> AntisymMatrix {
        let g = group_exp(&self.generator, s);
        AntisymMatrix::project(&(&g * self.x0.to_dense() * g.transpose()))
    }

    /// `gamma'(s)`.
    pub fn derivative(&self, s: f64) -> AntisymMatrix {
        let th = s * self.delta;
        self.moving_part()
            .scale(-self.delta * th.sin())
            .axpy(th.cos(), &self.tangent)
    }

    /// The same orbit seen after conjugation by the permutation matrix of `p`.
    pub fn conjugated(&self, p: &Permutation) -> Self {
        Self {
            generator: p.conjugate(&self.generator),
            x0: p.conjugate(&self.x0),
            x1: p.conjugate(&self.x1),
            tangent: p.conjugate(&self.tangent),
            ..self.clone()
        }
    }
}

/// Tests whether `[Y, x_eq]` is an eigenvector of the linearisation; returns the
/// Rayleigh quotient as the eigenvalue.
pub fn necessary_condition(j: &InertiaSpec, x_eq: &AntisymMatrix, y: &AntisymMatrix) -> Result<(bool, f64)> {
    let t = commutator(y, x_eq)?;
    if t.norm() <= 1e-14 * y.norm() * x_eq.norm() {
        return Err(Error::ZeroTangent);
    }
    let lin = linearize(j, x_eq)?;
    let v = lin.coords(&t)?;
    let w = &lin.matrix * &v;
    let z = v.dot(&w) / v.dot(&v);
    let residual = (&w - &v * z).norm();
    Ok((residual < tolerances().eigenvector * t.norm(), z))
}

/// Real eigenvector with the largest component made positive.
fn real_eigenvector(m: &DMatrix<f64>, z: f64) -> Result<nalgebra::DVector<f64>> {
    let shifted = m - DMatrix::identity(m.nrows(), m.ncols()) * z;
    let (mut v, sigma) = null_vector(&shifted);
    let scale = m.amax().max(z.abs()).max(1.0);
    if sigma > 1e-8 * scale {
        return Err(Error::NoRealEigenvalue);
    }
    let pivot = v.iamax();
    if v[pivot] < 0.0 {
        v = -v;
    }
    Ok(v)
}

fn positive_real(spectrum: &[num_complex::Complex64]) -> Vec<f64> {
    let mut out: Vec<f64> = spectrum
        .iter()
        .filter(|z| z.re > 0.0 && !is_imaginary(**z) && z.im.abs() <= 1e-8 * (1.0 + z.norm()))
        .map(|z| z.re)
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));
    out
}

fn pick(reals: &[f64], index: usize) -> Result<f64> {
    if reals.is_empty() {
        return Err(Error::NoRealEigenvalue);
    }
    reals.get(index).copied().ok_or_else(|| {
        Error::InvalidArgument(format!(
            "eigenvalue index {index} out of range ({} positive real eigenvalues)",
            reals.len()
        ))
    })
}

/// `Delta` from `[Y, [Y, x]] = -Delta^2 x`, with the relative defect of that identity.
fn rotation_rate(y: &AntisymMatrix, x0: &AntisymMatrix) -> Result<(f64, f64)> {
    let yy = commutator(y, &commutator(y, x0)?)?;
    let d2 = -pairing(&yy, x0)? / pairing(x0, x0)?;
    if d2 <= 0.0 {
        return Err(Error::InvalidArgument("generator does not rotate x0".into()));
    }
    let defect = yy.axpy(d2, x0).norm() / (d2 * x0.norm());
    Ok((d2.sqrt(), defect))
}

/// Orbit from `(a e3, e3)` to `-(a e3, e3)` for the largest positive real eigenvalue.
pub fn build_so4(lambda: &LambdaSpec, a: f64) -> Result<HeteroclinicOrbit> {
    build_so4_indexed(lambda, a, 0)
}

/// As [`build_so4`], choosing the `index`-th positive real eigenvalue (largest first).
pub fn build_so4_indexed(lambda: &LambdaSpec, a: f64, index: usize) -> Result<HeteroclinicOrbit> {
    lambda.check_generic()?;
    crate::stability::so4_characteristic(lambda, a)?;
    let m = flow_matrix(lambda, a);
    let z = pick(&positive_real(&eigenvalues(&m)), index)?;
    let v = real_eigenvector(&m, z)?;
    let xi = [v[0], v[2], 0.0];
    let eta = [v[1], v[3], 0.0];
    let e3 = [0.0, 0.0, 1.0];
    let xi2 = xi[0] * xi[0] + xi[1] * xi[1];
    let eta2 = eta[0] * eta[0] + eta[1] * eta[1];
    let norm_residual = xi2 - eta2;
    if norm_residual.abs() > 1e-10 * (xi2 + eta2) {
        return Err(Error::InvalidArgument(format!(
            "eigenvector violates |xi| = |eta| by {norm_residual:e}"
        )));
    }
    let axi = cross(&xi, &e3).map(|c| a * c);
    let tangent = lm_to_mu(&LMState::new(axi, cross(&eta, &e3)));
    let generator = lm_to_mu(&LMState::new(xi.map(|c| -0.5 * c), eta.map(|c| -0.5 * c)));
    let x0 = lm_to_mu(&LMState::axis(a, 1.0, 2));
    debug_assert!(commutator(&generator, &x0)?.distance(&tangent) < 1e-12 * tangent.norm());
    Ok(HeteroclinicOrbit {
        x1: x0.scale(-1.0),
        generator,
        x0,
        tangent,
        z,
        delta: xi2.sqrt(),
        block: None,
        norm_identity_residual: Some(norm_residual),
        reduction_residual: None,
    })
}

/// Orbit generated inside one block of a Cartan element, joining `x' + x_ij` to `x' - x_ij`.
pub fn build_general(
    j: &InertiaSpec,
    x: &CartanElement,
    block: &BlockProblem,
    index: usize,
) -> Result<HeteroclinicOrbit> {
    let n = x.n();
    if j.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: j.n(),
        });
    }
    let jl = block.local_inertia()?;
    let xl = block.local_point();
    let lin = linearize(&jl, &xl)?;
    let z = pick(&positive_real(&lin.spectrum()), index)?;
    let v = real_eigenvector(&lin.matrix, z)?;
    let t_local = lin.vector(&v);
    let y_local = lin.generator_for(&t_local);

    let norm_identity_residual = match block.kind {
        BlockKind::So4Block { .. } => {
            let (l, m) = {
                let s = crate::so4::mu_to_lm(&y_local)?;
                (s.l, s.m)
            };
            let nl = l.iter().map(|c| c * c).sum::<f64>();
            let nm = m.iter().map(|c| c * c).sum::<f64>();
            Some(4.0 * (nl - nm))
        }
        BlockKind::So3Block { .. } => None,
    };

    let generator = block.embed(n, &y_local);
    let x0 = x.to_matrix();
    let x_block = block.embed(n, &xl);
    let x1 = x0.axpy(-2.0, &x_block);
    let tangent = commutator(&generator, &x0)?;
    let (delta, defect) = rotation_rate(&generator, &x_block)?;
    if defect > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "generator does not act as a plane rotation (defect {defect:e})"
        )));
    }
    let mut orbit = HeteroclinicOrbit {
        generator,
        x0,
        x1,
        tangent,
        z,
        delta,
        block: Some(block.kind),
        norm_identity_residual,
        reduction_residual: None,
    };
    orbit.reduction_residual = Some(reduction_residual(j, &orbit, block, &jl, &y_local, &xl, 50)?);
    Ok(orbit)
}

/// `max_s |[J, gamma(s)^2] - embed([J_ij, gamma_ij(s)^2])|`.
fn reduction_residual(
    j: &InertiaSpec,
    orbit: &HeteroclinicOrbit,
    block: &BlockProblem,
    jl: &InertiaSpec,
    y_local: &AntisymMatrix,
    xl: &AntisymMatrix,
    samples: usize,
) -> Result<f64> {
    let n = orbit.x0.n();
    let mut worst: f64 = 0.0;
    for k in 1..=samples {
        let s = orbit.s_end() * k as f64 / (samples + 1) as f64;
        let full = vector_field(j, &orbit.point_exact(s))?;
        let g = group_exp(y_local, s);
        let local = AntisymMatrix::project(&(&g * xl.to_dense() * g.transpose()));
        let reduced = block.embed(n, &vector_field(jl, &local)?);
        worst = worst.max(full.distance(&reduced));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub dt: f64,
    /// Integrate the flow and compare it with the reparametrised curve.
    pub flow: bool,
    /// Flow comparisons use `s` in `[edge, s_end - edge]`.
    pub edge: f64,
    pub residual_tol: f64,
    pub match_tol: f64,
    pub reach_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            flow: true,
            edge: 0.1,
            residual_tol: 1e-9,
            match_tol: 1e-5,
            reach_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowCheck {
    /// Start parameter `1e-3 / Delta`.
    pub epsilon: f64,
    pub compared: usize,
    /// Largest distance between the flow at `T(s) - T(eps)` and `gamma(s)`.
    pub max_match_error: f64,
    pub closest_to_x1: f64,
    pub t_closest: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitVerification {
    pub samples: usize,
    /// `max |chi(s) gamma'(s) - [J, gamma(s)^2]|` over interior samples.
    pub max_residual: f64,
    pub max_field_norm: f64,
    /// Vector field norms at `x0` and `x1`.
    pub endpoint_residuals: [f64; 2],
    /// Closed form against the matrix exponential.
    pub max_closed_form_gap: f64,
    pub max_energy_drift: f64,
    pub max_casimir_drift: f64,
    /// `chi'(0+)` and `chi'(s_end-)`.
    pub chi_slopes: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowCheck>,
    pub passed: bool,
}

fn interior(orbit: &HeteroclinicOrbit, samples: usize) -> Vec<f64> {
    (1..=samples)
        .map(|k| orbit.s_end() * k as f64 / (samples + 1) as f64)
        .collect()
}

pub fn verify_orbit(
    j: &InertiaSpec,
    orbit: &HeteroclinicOrbit,
    samples: usize,
    opts: &VerifyOptions,
) -> Result<OrbitVerification> {
    let h0 = hamiltonian(j, &orbit.x0)?;
    let c2 = orbit.x0.trace_power(2);
    let c4 = orbit.x0.trace_power(4);
    let (mut max_residual, mut max_field, mut gap, mut energy, mut casimir) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let grid = interior(orbit, samples.max(1));
    for &s in &grid {
        let g = orbit.point_exact(s);
        let field = vector_field(j, &g)?;
        let lhs = orbit.derivative(s).scale(orbit.chi(s));
        max_residual = max_residual.max(lhs.distance(&field));
        max_field = max_field.max(field.norm());
        gap = gap.max(g.distance(&orbit.point(s)));
        energy = energy.max((hamiltonian(j, &g)? - h0).abs());
        casimir = casimir
            .max((g.trace_power(2) - c2).abs() / c2.abs().max(1.0))
            .max((g.trace_power(4) - c4).abs() / c4.abs().max(1.0));
    }
    let endpoint_residuals = [
        vector_field(j, &orbit.x0)?.norm(),
        vector_field(j, &orbit.x1)?.norm(),
    ];
    let end_gap = orbit.point_exact(orbit.s_end()).distance(&orbit.x1);
    gap = gap.max(end_gap);

    let flow = if opts.flow { Some(flow_check(j, orbit, &grid, opts)?) } else { None };
    let scale = max_field.max(1.0);
    let mut passed = max_residual < opts.residual_tol * scale
        && endpoint_residuals.iter().all(|r| *r < 1e-10 * scale)
        && gap < 1e-9 * orbit.x0.norm().max(1.0);
    if let Some(f) = &flow {
        passed &= f.max_match_error < opts.match_tol && f.closest_to_x1 < opts.reach_tol;
    }
    Ok(OrbitVerification {
        samples: grid.len(),
        max_residual,
        max_field_norm: max_field,
        endpoint_residuals,
        max_closed_form_gap: gap,
        max_energy_drift: energy,
        max_casimir_drift: casimir,
        chi_slopes: [orbit.chi_prime(0.0), orbit.chi_prime(orbit.s_end())],
        flow,
        passed,
    })
}

fn flow_check(
    j: &InertiaSpec,
    orbit: &HeteroclinicOrbit,
    grid: &[f64],
    opts: &VerifyOptions,
) -> Result<FlowCheck> {
    let eps = 1e-3 / orbit.delta;
    let t0 = orbit.time(eps);
    let start = orbit.point_exact(eps);
    let chosen: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&s| s >= opts.edge.max(eps) && s <= orbit.s_end() - opts.edge.max(eps))
        .collect();
    let times: Vec<f64> = chosen.iter().map(|&s| orbit.time(s) - t0).collect();
    let states = sample_at(j, &start, &times, opts.dt)?;
    let max_match_error = chosen
        .iter()
        .zip(&states)
        .map(|(&s, st)| st.distance(&orbit.point_exact(s)))
        .fold(0.0, f64::max);

    // Continue towards x1 and keep the closest approach.
    let (mut t, mut state) = match (times.last(), states.last()) {
        (Some(&t), Some(st)) => (t, st.clone()),
        _ => (0.0, start.clone()),
    };
    let t_limit = orbit.time(orbit.s_end() - 1e-7 / orbit.delta) - t0;
    let chunk: f64 = 0.02;
    let mut closest = state.distance(&orbit.x1);
    let mut t_closest = t;
    while t < t_limit {
        let step = chunk.min(t_limit - t);
        state = propagate(j, &state, step, opts.dt)?;
        t += step;
        let d = state.distance(&orbit.x1);
        if d < closest {
            closest = d;
            t_closest = t;
        }
        if closest < 1e-2 * opts.reach_tol || d > 10.0 * closest.max(opts.reach_tol) {
            break;
        }
    }
    Ok(FlowCheck {
        epsilon: eps,
        compared: chosen.len(),
        max_match_error,
        closest_to_x1: closest,
        t_closest,
    })
}
