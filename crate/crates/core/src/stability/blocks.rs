use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::so4::block_roots;
use super::{is_imaginary, pairs};
use crate::dynamics::InertiaSpec;
use crate::error::{Error, Result};
use crate::so4::{cartan_to_axis, lambda_from_values, LambdaSpec};
use crate::son::{AntisymMatrix, CartanElement};

/// Cartan indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BlockKind {
    So4Block { i: usize, j: usize },
    So3Block { i: usize },
}

/// One decoupled piece of the linearisation at a Cartan element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockProblem {
    pub kind: BlockKind,
    /// Global row indices of the local subproblem, zero-based.
    pub rows: Vec<usize>,
    pub local_j: Vec<f64>,
    /// `(x_i, x_j)` or `(x_i)`.
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
}

impl BlockProblem {
    pub fn spectrum(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|p| Complex64::new(p[0], p[1]))
            .collect()
    }

    pub fn all_imaginary(&self) -> bool {
        self.spectrum().into_iter().all(is_imaginary)
    }

    /// Positive real eigenvalues, largest first.
    pub fn real_positive_eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .spectrum()
            .into_iter()
            .filter(|z| z.re > 0.0 && !is_imaginary(*z) && z.im.abs() <= 1e-8 * (1.0 + z.norm()))
            .map(|z| z.re)
            .collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    /// Local `LambdaSpec` when it is generic.
    pub fn lambda_spec(&self) -> Option<LambdaSpec> {
        self.lambda.and_then(|l| LambdaSpec::new(l).ok())
    }

    pub fn local_inertia(&self) -> Result<InertiaSpec> {
        InertiaSpec::unchecked(self.local_j.clone())
    }

    /// The Cartan element restricted to the block rows.
    pub fn local_point(&self) -> AntisymMatrix {
        let k = self.rows.len();
        let mut out = AntisymMatrix::zeros(k);
        out.set(0, 1, self.x[0]);
        if let BlockKind::So4Block { .. } = self.kind {
            out.set(2, 3, self.x[1]);
        }
        out
    }

    /// Places a local matrix into the block rows of an `n x n` zero matrix.
    pub fn embed(&self, n: usize, local: &AntisymMatrix) -> AntisymMatrix {
        let mut out = AntisymMatrix::zeros(n);
        for (a, &ga) in self.rows.iter().enumerate() {
            for (b, &gb) in self.rows.iter().enumerate().skip(a + 1) {
                let v = local.get(a, b);
                if ga < gb {
                    out.set(ga, gb, v);
                } else {
                    out.set(gb, ga, -v);
                }
            }
        }
        out
    }

    /// Restriction of an `n x n` matrix to the block rows.
    pub fn restrict(&self, mu: &AntisymMatrix) -> AntisymMatrix {
        let k = self.rows.len();
        let mut out = AntisymMatrix::zeros(k);
        for a in 0..k {
            for b in a + 1..k {
                out.set(a, b, mu.get(self.rows[a], self.rows[b]));
            }
        }
        out
    }
}

fn so4_block(j: &[f64], xs: &[f64], i: usize, k: usize) -> BlockProblem {
    let rows = vec![2 * i, 2 * i + 1, 2 * k, 2 * k + 1];
    let local_j: Vec<f64> = rows.iter().map(|&r| j[r]).collect();
    let lambda = lambda_from_values(&local_j);
    let (a, b) = cartan_to_axis(xs[i], xs[k]);
    let roots: Vec<Complex64> = block_roots(&lambda, a).iter().map(|z| z * b).collect();
    BlockProblem {
        kind: BlockKind::So4Block { i, j: k },
        rows,
        local_j,
        x: vec![xs[i], xs[k]],
        lambda: Some(lambda),
        a: Some(a),
        b: Some(b),
        eigenvalues: pairs(&roots),
    }
}

/// `alpha' = c (J1 - J3) beta`, `beta' = c (J3 - J2) alpha`.
fn so3_block(j: &[f64], xs: &[f64], i: usize, n: usize) -> BlockProblem {
    let rows = vec![2 * i, 2 * i + 1, n - 1];
    let local_j: Vec<f64> = rows.iter().map(|&r| j[r]).collect();
    let c = xs[i];
    let zeta2 = c * c * (local_j[0] - local_j[2]) * (local_j[2] - local_j[1]);
    let z = Complex64::new(zeta2, 0.0).sqrt();
    BlockProblem {
        kind: BlockKind::So3Block { i },
        rows,
        local_j,
        x: vec![c],
        lambda: None,
        a: None,
        b: None,
        eigenvalues: pairs(&[z, -z]),
    }
}

pub fn block_decompose_cartan(j: &InertiaSpec, x: &CartanElement) -> Result<Vec<BlockProblem>> {
    let n = x.n();
    if j.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: j.n(),
        });
    }
    let xs = x.values();
    let m = xs.len();
    let mut out = Vec::new();
    for i in 0..m {
        for k in i + 1..m {
            out.push(so4_block(j.values(), xs, i, k));
        }
    }
    if n % 2 == 1 {
        for i in 0..m {
            out.push(so3_block(j.values(), xs, i, n));
        }
    }
    Ok(out)
}

/// Decouples the linearisation at a Cartan element into so(4) and so(3) pieces.
///
/// Points elsewhere on the orbit are handled by conjugating `J` instead
/// (see `EquilibriumPoint::normal_form_inertia`).
pub fn block_decompose(j: &InertiaSpec, x_eq: &AntisymMatrix) -> Result<Vec<BlockProblem>> {
    let x = CartanElement::from_matrix(x_eq)?;
    block_decompose_cartan(j, &x)
}
