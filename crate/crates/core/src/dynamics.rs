//! The Euler vector field `mu' = [J, mu^2]`, its Hamiltonian, the Manakov
//! family of conserved quantities and a fixed-step RK4 integrator that logs
//! their drift.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Genericity, Result};
use crate::son::{so_dim, AntisymMatrix};
use crate::tolerance::tolerances;

/// The diagonal of `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InertiaSpec {
    values: Vec<f64>,
}

impl InertiaSpec {
    /// Validates `J_i^2 != J_j^2` for `i != j`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let spec = Self::unchecked(values)?;
        spec.check_generic()?;
        Ok(spec)
    }

    /// No genericity check. Used for local sub-problems, where the shifted or
    /// restricted diagonal need not satisfy the global assumption.
    pub fn unchecked(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DimensionTooSmall {
                n: values.len(),
                min: 2,
            });
        }
        Ok(Self { values })
    }

    pub fn check_generic(&self) -> std::result::Result<(), Genericity> {
        let rel = tolerances().genericity;
        let max_sq = self.values.iter().map(|v| v * v).fold(0.0_f64, f64::max);
        for i in 0..self.values.len() {
            for j in i + 1..self.values.len() {
                let (ji, jj) = (self.values[i], self.values[j]);
                if (ji * ji - jj * jj).abs() <= rel * max_sq {
                    return Err(Genericity::InertiaSquares {
                        i: i + 1,
                        j: j + 1,
                        ji,
                        jj,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.values))
    }

    fn check(&self, mu: &AntisymMatrix) -> Result<()> {
        if mu.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: mu.n(),
            });
        }
        Ok(())
    }
}

/// `H(mu) = -1/2 tr(J mu^2)`.
pub fn hamiltonian(j: &InertiaSpec, mu: &AntisymMatrix) -> Result<f64> {
    j.check(mu)?;
    // (mu^2)_ii = -sum_k mu_ik^2
    let n = mu.n();
    let mut h = 0.0;
    for i in 0..n {
        let sq: f64 = (0..n).map(|k| mu.get(i, k).powi(2)).sum();
        h += 0.5 * j.values[i] * sq;
    }
    Ok(h)
}

/// `[J, mu^2]`. Entry `(i, j)` is `(J_i - J_j) (mu^2)_ij`.
pub fn vector_field(j: &InertiaSpec, mu: &AntisymMatrix) -> Result<AntisymMatrix> {
    j.check(mu)?;
    let field = EulerField::new(j);
    let mut out = vec![0.0; so_dim(mu.n())];
    let mut scratch = vec![0.0; mu.n() * mu.n()];
    field.eval(mu.upper(), &mut out, &mut scratch);
    AntisymMatrix::from_upper(mu.n(), out)
}

/// `omega = -(J mu + mu J)`, entrywise `-(J_i + J_j) mu_ij`.
pub fn angular_velocity(j: &InertiaSpec, mu: &AntisymMatrix) -> Result<AntisymMatrix> {
    j.check(mu)?;
    let n = mu.n();
    let mut out = AntisymMatrix::zeros(n);
    for a in 0..n {
        for b in a + 1..n {
            out.set(a, b, -(j.values[a] + j.values[b]) * mu.get(a, b));
        }
    }
    Ok(out)
}

/// Label `(k, power)` of each entry returned by [`manakov_integrals`].
pub fn manakov_labels(k_max: usize) -> Vec<(usize, usize)> {
    (2..=k_max)
        .flat_map(|k| (0..k).map(move |p| (k, p)))
        .collect()
}

/// Coefficients of `lambda^p`, `0 <= p < k`, in `tr((lambda J + mu)^k)` for
/// `k = 2..=k_max`, ordered as [`manakov_labels`].
///
/// Each trace polynomial is sampled at the `k + 1` Chebyshev nodes on [-1, 1]
/// and the coefficients recovered from the Vandermonde system.
pub fn manakov_integrals(j: &InertiaSpec, mu: &AntisymMatrix, k_max: usize) -> Result<Vec<f64>> {
    j.check(mu)?;
    let jd = j.to_dense();
    let md = mu.to_dense();
    let mut out = Vec::new();
    for k in 2..=k_max {
        let nodes: Vec<f64> = (0..=k)
            .map(|i| ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * (k + 1)) as f64).cos())
            .collect();
        let samples = DVector::from_iterator(
            k + 1,
            nodes.iter().map(|&lam| {
                let l = &jd * lam + &md;
                let mut p = l.clone();
                for _ in 1..k {
                    p = &p * &l;
                }
                p.trace()
            }),
        );
        let vandermonde = DMatrix::from_fn(k + 1, k + 1, |r, c| nodes[r].powi(c as i32));
        let coeffs = vandermonde
            .lu()
            .solve(&samples)
            .expect("Chebyshev nodes are distinct");
        out.extend(coeffs.iter().take(k));
    }
    Ok(out)
}

/// Upper-triangle kernel of the vector field, shared with the integrator.
pub(crate) struct EulerField<'a> {
    j: &'a [f64],
    n: usize,
}

impl<'a> EulerField<'a> {
    pub(crate) fn new(j: &'a InertiaSpec) -> Self {
        Self {
            j: &j.values,
            n: j.n(),
        }
    }

    pub(crate) fn eval(&self, mu: &[f64], out: &mut [f64], dense: &mut [f64]) {
        let n = self.n;
        let mut idx = 0;
        for i in 0..n {
            dense[i * n + i] = 0.0;
            for j in i + 1..n {
                dense[i * n + j] = mu[idx];
                dense[j * n + i] = -mu[idx];
                idx += 1;
            }
        }
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                let mut sq = 0.0;
                for k in 0..n {
                    sq += dense[i * n + k] * dense[k * n + j];
                }
                out[idx] = (self.j[i] - self.j[j]) * sq;
                idx += 1;
            }
        }
    }
}

/// Names of the quantities logged by [`integrate`].
pub fn invariant_names(k_max: usize) -> Vec<String> {
    let mut names = vec!["H".to_string(), "tr_mu2".into(), "tr_mu4".into()];
    names.extend(
        manakov_labels(k_max)
            .into_iter()
            .map(|(k, p)| format!("manakov_k{k}_l{p}")),
    );
    names
}

/// H, tr(mu^2), tr(mu^4) and the Manakov coefficients up to `k_max`.
pub fn audited_invariants(j: &InertiaSpec, mu: &AntisymMatrix, k_max: usize) -> Result<Vec<f64>> {
    let mut v = vec![hamiltonian(j, mu)?, mu.trace_power(2), mu.trace_power(4)];
    v.extend(manakov_integrals(j, mu, k_max)?);
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    /// Store every `record_every`-th step (the final state is always stored).
    pub record_every: usize,
    /// Highest power whose Manakov coefficients are logged.
    pub k_max: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            record_every: 1,
            k_max: 4,
        }
    }
}

/// States and logged invariants along a numerical solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<AntisymMatrix>,
    pub invariant_names: Vec<String>,
    pub invariant_log: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.states.first().map_or(0, AntisymMatrix::n)
    }

    pub fn final_state(&self) -> &AntisymMatrix {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// `max_t |Q(t) - Q(0)| / max(1, |Q(0)|)` for each logged quantity.
    pub fn relative_drifts(&self) -> Vec<f64> {
        let first = &self.invariant_log[0];
        (0..first.len())
            .map(|q| {
                let scale = first[q].abs().max(1.0);
                self.invariant_log
                    .iter()
                    .map(|row| (row[q] - first[q]).abs() / scale)
                    .fold(0.0_f64, f64::max)
            })
            .collect()
    }

    pub fn max_relative_drift(&self) -> f64 {
        self.relative_drifts().into_iter().fold(0.0_f64, f64::max)
    }
}

fn step_count(duration: f64, dt: f64) -> usize {
    let ratio = duration / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        (rounded as usize).max(1)
    } else {
        ratio.ceil() as usize
    }
}

struct Rk4<'a> {
    field: EulerField<'a>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    dense: Vec<f64>,
}

impl<'a> Rk4<'a> {
    fn new(j: &'a InertiaSpec) -> Self {
        let d = so_dim(j.n());
        Self {
            field: EulerField::new(j),
            k: [vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]],
            tmp: vec![0.0; d],
            dense: vec![0.0; j.n() * j.n()],
        }
    }

    fn step(&mut self, y: &mut [f64], h: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        self.field.eval(y, k1, &mut self.dense);
        for (t, (yi, ki)) in self.tmp.iter_mut().zip(y.iter().zip(k1.iter())) {
            *t = yi + 0.5 * h * ki;
        }
        self.field.eval(&self.tmp, k2, &mut self.dense);
        for (t, (yi, ki)) in self.tmp.iter_mut().zip(y.iter().zip(k2.iter())) {
            *t = yi + 0.5 * h * ki;
        }
        self.field.eval(&self.tmp, k3, &mut self.dense);
        for (t, (yi, ki)) in self.tmp.iter_mut().zip(y.iter().zip(k3.iter())) {
            *t = yi + h * ki;
        }
        self.field.eval(&self.tmp, k4, &mut self.dense);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

fn check_step(t_end: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    Ok(())
}

/// Classic fixed-step RK4 over `[0, t_end]`.
///
/// The step is `t_end / ceil(t_end / dt)`, so it never exceeds `dt` and the
/// last step lands on `t_end`. Storage of the upper triangle keeps every state
/// exactly in so(n).
pub fn integrate(j: &InertiaSpec, mu0: &AntisymMatrix, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_with(j, mu0, t_end, dt, &IntegrateOptions::default())
}

pub fn integrate_with(
    j: &InertiaSpec,
    mu0: &AntisymMatrix,
    t_end: f64,
    dt: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    j.check(mu0)?;
    check_step(t_end, dt)?;
    let n = mu0.n();
    let steps = step_count(t_end, dt);
    let h = t_end / steps as f64;
    let every = opts.record_every.max(1);
    let mut rk = Rk4::new(j);
    let mut y = mu0.upper().to_vec();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![mu0.clone()],
        invariant_names: invariant_names(opts.k_max),
        invariant_log: vec![audited_invariants(j, mu0, opts.k_max)?],
    };
    for s in 1..=steps {
        rk.step(&mut y, h);
        let t = s as f64 * h;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::IntegratorFailure { t });
        }
        if s % every == 0 || s == steps {
            let state = AntisymMatrix::from_upper(n, y.clone())?;
            traj.invariant_log
                .push(audited_invariants(j, &state, opts.k_max)?);
            traj.states.push(state);
            traj.times.push(t);
        }
    }
    Ok(traj)
}

/// Advances `mu` by `duration` with steps no longer than `dt`.
pub fn propagate(j: &InertiaSpec, mu: &AntisymMatrix, duration: f64, dt: f64) -> Result<AntisymMatrix> {
    j.check(mu)?;
    check_step(duration, dt)?;
    let steps = step_count(duration, dt);
    let h = duration / steps as f64;
    let mut rk = Rk4::new(j);
    let mut y = mu.upper().to_vec();
    for s in 1..=steps {
        rk.step(&mut y, h);
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::IntegratorFailure {
                t: s as f64 * h,
            });
        }
    }
    AntisymMatrix::from_upper(mu.n(), y)
}

/// Samples the solution at the given non-decreasing times (starting from t = 0).
pub fn sample_at(
    j: &InertiaSpec,
    mu0: &AntisymMatrix,
    times: &[f64],
    dt: f64,
) -> Result<Vec<AntisymMatrix>> {
    let mut out = Vec::with_capacity(times.len());
    let mut current = mu0.clone();
    let mut t = 0.0;
    for &target in times {
        if target < t {
            return Err(Error::InvalidArgument(
                "sample times must be non-decreasing and non-negative".into(),
            ));
        }
        if target > t {
            current = propagate(j, &current, target - t, dt)?;
            t = target;
        }
        out.push(current.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::son::{commutator, CartanElement};
    use approx::assert_abs_diff_eq;

    fn j4() -> InertiaSpec {
        InertiaSpec::new(vec![1.0, 2.0, 4.0, 8.0]).unwrap()
    }

    fn sample_mu() -> AntisymMatrix {
        AntisymMatrix::from_upper(4, vec![0.3, -0.2, 0.5, 0.4, 0.1, -0.35]).unwrap()
    }

    #[test]
    fn inertia_genericity() {
        assert!(matches!(
            InertiaSpec::new(vec![1.0, -1.0, 3.0]),
            Err(Error::NonGeneric(Genericity::InertiaSquares { i: 1, j: 2, .. }))
        ));
        let msg = InertiaSpec::new(vec![2.0, 2.0, 3.0]).unwrap_err().to_string();
        assert!(msg.contains("J_i^2 != J_j^2"), "{msg}");
    }

    #[test]
    fn hamiltonian_examples() {
        let j = j4();
        assert_eq!(hamiltonian(&j, &AntisymMatrix::zeros(4)).unwrap(), 0.0);
        // Hand expansion: x^2 = diag(-1, -1, -4, -4), so H = 1/2 (1 + 2 + 4*4 + 4*8) = 25.5.
        let x = CartanElement::new(4, vec![1.0, 2.0]).unwrap().to_matrix();
        assert_abs_diff_eq!(hamiltonian(&j, &x).unwrap(), 25.5, epsilon = 1e-14);
        let mu = sample_mu();
        let dense = -0.5 * (j.to_dense() * mu.to_dense() * mu.to_dense()).trace();
        assert_abs_diff_eq!(hamiltonian(&j, &mu).unwrap(), dense, epsilon = 1e-14);
    }

    #[test]
    fn vector_field_matches_dense_and_lax_form() {
        let j = j4();
        let mu = sample_mu();
        let m = mu.to_dense();
        let jd = j.to_dense();
        let dense = &jd * &m * &m - &m * &m * &jd;
        let vf = vector_field(&j, &mu).unwrap();
        assert!((vf.to_dense() - dense).amax() < 1e-14);
        let omega = angular_velocity(&j, &mu).unwrap();
        let lax = commutator(&mu, &omega).unwrap();
        assert!(vf.distance(&lax) < 1e-12);
        let omega_dense = -(&jd * &m + &m * &jd);
        assert!((omega.to_dense() - omega_dense).amax() < 1e-15);
    }

    #[test]
    fn classical_euler_equations_n3() {
        // With mu = hat(v), (mu^2)_ij = v_i v_j off the diagonal, so the field
        // has entries (J_i - J_j) v_i v_j; read back through vee this is
        // v' = ((J3 - J2) v2 v3, (J1 - J3) v1 v3, (J2 - J1) v1 v2).
        let (a, b, c) = (0.7, -1.1, 2.3);
        let j = InertiaSpec::new(vec![a, b, c]).unwrap();
        let v = [0.4, -0.9, 1.3];
        let vf = vector_field(&j, &AntisymMatrix::hat(v)).unwrap().vee().unwrap();
        let expect = [(c - b) * v[1] * v[2], (a - c) * v[0] * v[2], (b - a) * v[0] * v[1]];
        for k in 0..3 {
            assert_abs_diff_eq!(vf[k], expect[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn vector_field_vanishes_on_cartan() {
        let j = j4();
        let x = CartanElement::new(4, vec![1.0, 2.0]).unwrap().to_matrix();
        assert!(vector_field(&j, &x).unwrap().max_abs() < 1e-15);
        assert!(angular_velocity(&j, &AntisymMatrix::zeros(4))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn manakov_k2_is_trace_mu2() {
        let j = j4();
        let mu = sample_mu();
        let c = manakov_integrals(&j, &mu, 2).unwrap();
        assert_eq!(c.len(), 2);
        assert_abs_diff_eq!(c[0], mu.trace_power(2), epsilon = 1e-13);
        // tr(J mu) = 0 for zero-diagonal mu.
        assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-13);
        assert_eq!(manakov_labels(4).len(), 2 + 3 + 4);
    }

    #[test]
    fn manakov_k3_lambda1_is_minus_six_h() {
        // tr((lJ + mu)^3) at lambda^1 is 3 tr(J mu^2) = -6 H.
        let j = j4();
        let mu = sample_mu();
        let c = manakov_integrals(&j, &mu, 3).unwrap();
        let h = hamiltonian(&j, &mu).unwrap();
        assert_abs_diff_eq!(c[2 + 1], -6.0 * h, epsilon = 1e-12);
    }

    #[test]
    fn integrate_rejects_bad_steps() {
        let j = j4();
        assert!(integrate(&j, &sample_mu(), 1.0, 0.0).is_err());
        assert!(integrate(&j, &sample_mu(), -1.0, 0.1).is_err());
        assert!(integrate(&j, &AntisymMatrix::zeros(3), 1.0, 0.1).is_err());
    }

    #[test]
    fn equilibrium_stays_put() {
        let j = j4();
        let x = CartanElement::new(4, vec![1.0, 2.0]).unwrap().to_matrix();
        let traj = integrate(&j, &x, 1.0, 0.01).unwrap();
        assert_eq!(traj.times.len(), 101);
        assert!(traj.final_state().distance(&x) < 1e-12 * 100.0);
        assert_abs_diff_eq!(*traj.times.last().unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn step_count_handles_round_off() {
        assert_eq!(step_count(10.0, 1e-3), 10000);
        assert_eq!(step_count(1.0, 0.3), 4);
    }

    #[test]
    fn record_every_keeps_final_state() {
        let j = j4();
        let opts = IntegrateOptions {
            record_every: 7,
            k_max: 3,
        };
        let traj = integrate_with(&j, &sample_mu(), 1.0, 0.01, &opts).unwrap();
        assert_eq!(traj.times.len(), 1 + 100 / 7 + 1);
        assert_abs_diff_eq!(*traj.times.last().unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(traj.invariant_names.len(), 3 + 2 + 3);
    }
}
