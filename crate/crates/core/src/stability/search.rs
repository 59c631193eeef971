//! Experimental: search for a definite combination of Manakov integrals.
//!
//! A result of `None` proves nothing.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linearize::{preimage, tangent_basis};
use crate::dynamics::{manakov_integrals, manakov_labels, InertiaSpec};
use crate::error::{Error, Result};
use crate::linalg::{null_space_below, symmetric_eigenvalues};
use crate::son::{group_exp, AntisymMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    /// Grid points per axis on `[-bound, bound]`.
    pub grid: usize,
    pub bound: f64,
    /// Upper limit on grid evaluations; fewer points per axis are used above it.
    pub max_grid_points: usize,
    pub refine_iters: usize,
    /// Chart step relative to `|x|`.
    pub step: f64,
    /// Smallest accepted `min |eig| / |Hess|_F`.
    pub min_margin: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid: 21,
            bound: 10.0,
            max_grid_points: 21 * 21 * 21,
            refine_iters: 400,
            step: 1e-3,
            min_margin: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchCertificate {
    pub labels: Vec<String>,
    /// Coefficients of the integrals, scaled to unit max norm.
    pub coefficients: Vec<f64>,
    pub margin: f64,
    pub experimental: bool,
}

/// Manakov coefficients `(k, p)` that can be non-constant on an orbit:
/// `p >= 1` and `k - p` even and at least 2.
pub fn default_search_labels(n: usize) -> Vec<(usize, usize)> {
    manakov_labels(n.max(4))
        .into_iter()
        .filter(|&(k, p)| p >= 1 && k - p >= 2 && (k - p) % 2 == 0)
        .collect()
}

struct Chart<'a> {
    j: &'a InertiaSpec,
    x: &'a AntisymMatrix,
    generators: Vec<AntisymMatrix>,
    indices: Vec<usize>,
    k_max: usize,
}

impl Chart<'_> {
    fn values(&self, c: &[f64]) -> Result<DVector<f64>> {
        let mut y = AntisymMatrix::zeros(self.x.n());
        for (g, ci) in self.generators.iter().zip(c) {
            y = y.axpy(*ci, g);
        }
        let g = group_exp(&y, 1.0);
        let point = AntisymMatrix::project(&(&g * self.x.to_dense() * g.transpose()));
        let all = manakov_integrals(self.j, &point, self.k_max)?;
        Ok(DVector::from_iterator(
            self.indices.len(),
            self.indices.iter().map(|&i| all[i]),
        ))
    }

    /// Central-difference gradients (columns) and Hessians of every integral.
    fn derivatives(&self, h: f64) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
        let d = self.generators.len();
        let k = self.indices.len();
        let f0 = self.values(&vec![0.0; d])?;
        let eval = |pairs: &[(usize, f64)]| {
            let mut c = vec![0.0; d];
            for &(i, s) in pairs {
                c[i] += s;
            }
            self.values(&c)
        };
        let mut grad = DMatrix::zeros(d, k);
        let mut hess = vec![DMatrix::zeros(d, d); k];
        let mut plus = Vec::with_capacity(d);
        let mut minus = Vec::with_capacity(d);
        for a in 0..d {
            plus.push(eval(&[(a, h)])?);
            minus.push(eval(&[(a, -h)])?);
        }
        for a in 0..d {
            for q in 0..k {
                grad[(a, q)] = (plus[a][q] - minus[a][q]) / (2.0 * h);
                hess[q][(a, a)] = (plus[a][q] - 2.0 * f0[q] + minus[a][q]) / (h * h);
            }
            for b in a + 1..d {
                let pp = eval(&[(a, h), (b, h)])?;
                let pm = eval(&[(a, h), (b, -h)])?;
                let mp = eval(&[(a, -h), (b, h)])?;
                let mm = eval(&[(a, -h), (b, -h)])?;
                for q in 0..k {
                    let v = (pp[q] - pm[q] - mp[q] + mm[q]) / (4.0 * h * h);
                    hess[q][(a, b)] = v;
                    hess[q][(b, a)] = v;
                }
            }
        }
        Ok((grad, hess))
    }
}

/// `max(lambda_min, -lambda_max) / |M|_F`: positive exactly when `M` is definite.
fn margin(m: &DMatrix<f64>) -> f64 {
    let norm = m.norm();
    if norm == 0.0 || !norm.is_finite() {
        return f64::NEG_INFINITY;
    }
    let ev = symmetric_eigenvalues(m);
    ev[0].max(-ev[ev.len() - 1]) / norm
}

fn combine(hess: &[DMatrix<f64>], c: &DVector<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(hess[0].nrows(), hess[0].ncols());
    for (h, ci) in hess.iter().zip(c.iter()) {
        m += h * *ci;
    }
    m
}

/// Maximises `f` by the Nelder-Mead simplex method.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64) {
    let d = start.len();
    let cost = |p: &[f64]| -f(p);
    let mut simplex: Vec<(Vec<f64>, f64)> = (0..=d)
        .map(|i| {
            let mut p = start.to_vec();
            if i > 0 {
                p[i - 1] += step;
            }
            let c = cost(&p);
            (p, c)
        })
        .collect();
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[d].1 - simplex[0].1;
        if spread.abs() < 1e-14 {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|k| simplex[..d].iter().map(|(p, _)| p[k]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let r = along(-1.0);
        let fr = cost(&r);
        if fr < simplex[0].1 {
            let e = along(-2.0);
            let fe = cost(&e);
            simplex[d] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (r, fr);
        } else {
            let t = if fr < simplex[d].1 { -0.5 } else { 0.5 };
            let c = along(t);
            let fc = cost(&c);
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (c, fc);
            } else {
                let best = simplex[0].0.clone();
                for (p, c) in simplex.iter_mut().skip(1) {
                    for (pi, bi) in p.iter_mut().zip(&best) {
                        *pi = bi + 0.5 * (*pi - bi);
                    }
                    *c = cost(p);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (p, c) = simplex.swap_remove(0);
    (p, -c)
}

fn grid_points(r: usize, opts: &SearchOptions) -> Vec<Vec<f64>> {
    let mut per_axis = opts.grid.max(3);
    while r > 0 && per_axis > 3 && per_axis.pow(r as u32) > opts.max_grid_points {
        per_axis -= 2;
    }
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -opts.bound + 2.0 * opts.bound * i as f64 / (per_axis - 1) as f64)
        .collect();
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Looks for coefficients `c` such that `sum c_i I_i` restricted to the orbit
/// has a critical point at `x_eq` with a definite Hessian.
pub fn definiteness_search(
    j: &InertiaSpec,
    x_eq: &AntisymMatrix,
    labels: &[(usize, usize)],
    opts: &SearchOptions,
) -> Result<Option<SearchCertificate>> {
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no integrals to combine".into()));
    }
    let k_max = labels.iter().map(|l| l.0).max().unwrap_or(2);
    let all = manakov_labels(k_max);
    let indices = labels
        .iter()
        .map(|l| {
            all.iter()
                .position(|m| m == l)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown integral label {l:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let basis = tangent_basis(x_eq);
    let chart = Chart {
        j,
        x: x_eq,
        generators: basis.iter().map(|b| preimage(x_eq, b)).collect(),
        indices,
        k_max,
    };
    let h = opts.step * x_eq.norm().max(f64::MIN_POSITIVE);
    let (grad, hess) = chart.derivatives(h)?;
    // Difference noise in a vanishing gradient is far below |Hess| h; a genuine
    // gradient is of order |Hess| |x|.
    let gscale = grad.amax().max(hess.iter().map(|m| m.amax()).fold(0.0, f64::max) * h);
    let null = if gscale == 0.0 {
        DMatrix::identity(labels.len(), labels.len())
    } else {
        null_space_below(&(&grad / gscale), 1e-2)
    };
    let r = null.ncols();
    if r == 0 {
        return Ok(None);
    }
    let score = |w: &[f64]| {
        let c = &null * DVector::from_column_slice(w);
        margin(&combine(&hess, &c))
    };
    let (mut best, mut best_score) = (vec![0.0; r], f64::NEG_INFINITY);
    for p in grid_points(r, opts) {
        let s = score(&p);
        if s > best_score {
            best_score = s;
            best = p;
        }
    }
    let (refined, refined_score) = nelder_mead(&score, &best, 0.5, opts.refine_iters);
    if refined_score > best_score {
        best = refined;
        best_score = refined_score;
    }
    if best_score <= opts.min_margin {
        return Ok(None);
    }
    let c = &null * DVector::from_column_slice(&best);
    let scale = c.amax();
    Ok(Some(SearchCertificate {
        labels: labels
            .iter()
            .map(|(k, p)| format!("manakov_k{k}_l{p}"))
            .collect(),
        coefficients: c.iter().map(|v| v / scale).collect(),
        margin: best_score,
        experimental: true,
    }))
}
