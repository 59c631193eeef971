//! Linear algebra on so(n): antisymmetric matrices, Cartan normal forms,
//! the trace pairing, brackets, the group action and permutation matrices.
//!
//! so(n) is identified with its dual through `<a, b> = -1/2 tr(a b)`, which on
//! the strict upper triangle is the ordinary Euclidean inner product.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Genericity, Result};
use crate::tolerance::tolerances;

/// An element of so(n). Only the strict upper triangle is stored, row-major,
/// so antisymmetry holds exactly.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct AntisymMatrix {
    n: usize,
    upper: Vec<f64>,
}

#[inline]
fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Number of free entries of an element of so(n).
pub fn so_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl AntisymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            upper: vec![0.0; so_dim(n)],
        }
    }

    /// Build from the strict upper triangle, row-major: `(0,1), (0,2), …, (n-2,n-1)`.
    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self> {
        if upper.len() != so_dim(n) {
            return Err(Error::DimensionMismatch {
                expected: so_dim(n),
                found: upper.len(),
            });
        }
        Ok(Self { n, upper })
    }

    /// Accepts a dense matrix whose antisymmetry defect is within the input
    /// tolerance and projects it with `(M - M^T) / 2`.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut deviation = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                deviation = deviation.max((m[(i, j)] + m[(j, i)]).abs());
            }
        }
        let scale = m.amax().max(1.0);
        if deviation > tolerances().input_drift * scale {
            return Err(Error::NotAntisymmetric { deviation });
        }
        Ok(Self::project(m))
    }

    /// `(M - M^T) / 2` without any check.
    pub fn project(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                out.upper[upper_index(n, i, j)] = 0.5 * (m[(i, j)] - m[(j, i)]);
            }
        }
        out
    }

    /// The elementary generator `E_ab - E_ba`.
    pub fn unit(n: usize, a: usize, b: usize) -> Self {
        assert!(a != b && a < n && b < n, "unit({n}, {a}, {b})");
        let mut out = Self::zeros(n);
        out.set(a, b, 1.0);
        out
    }

    /// so(3) hat map: `v^ w = v x w`.
    pub fn hat(v: [f64; 3]) -> Self {
        Self {
            n: 3,
            upper: vec![-v[2], v[1], -v[0]],
        }
    }

    /// Inverse of [`AntisymMatrix::hat`].
    pub fn vee(&self) -> Option<[f64; 3]> {
        (self.n == 3).then(|| [-self.upper[2], self.upper[1], -self.upper[0]])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn into_upper(self) -> Vec<f64> {
        self.upper
    }

    /// Entry `(i, j)` of the full matrix.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[upper_index(self.n, i, j)],
            std::cmp::Ordering::Greater => -self.upper[upper_index(self.n, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Sets entry `(i, j)` and, implicitly, `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "diagonal of an antisymmetric matrix is fixed at 0");
        if i < j {
            self.upper[upper_index(self.n, i, j)] = value;
        } else {
            self.upper[upper_index(self.n, j, i)] = -value;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = self.upper[upper_index(n, i, j)];
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        m
    }

    /// Norm induced by the pairing, `sqrt(<a, a>)`.
    pub fn norm(&self) -> f64 {
        self.upper.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius norm of the full matrix (`sqrt(2) * norm()`).
    pub fn frobenius_norm(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|v| *v == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            upper: self.upper.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|v| v.is_finite())
    }

    /// Pairing distance `|a - b|`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Trace of `self^k`.
    pub fn trace_power(&self, k: u32) -> f64 {
        if k == 0 {
            return self.n as f64;
        }
        let m = self.to_dense();
        let mut p = m.clone();
        for _ in 1..k {
            p = &p * &m;
        }
        p.trace()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for AntisymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AntisymMatrix(n={}, upper={:?})", self.n, self.upper)
    }
}

impl Add for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn add(self, rhs: &AntisymMatrix) -> AntisymMatrix {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn sub(self, rhs: &AntisymMatrix) -> AntisymMatrix {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn neg(self) -> AntisymMatrix {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn mul(self, rhs: f64) -> AntisymMatrix {
        self.scale(rhs)
    }
}

/// `<a, b> = -1/2 tr(a b)`.
pub fn pairing(a: &AntisymMatrix, b: &AntisymMatrix) -> Result<f64> {
    a.check_same(b)?;
    Ok(a.upper.iter().zip(&b.upper).map(|(x, y)| x * y).sum())
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &AntisymMatrix, b: &AntisymMatrix) -> Result<AntisymMatrix> {
    a.check_same(b)?;
    let n = a.n;
    let mut out = AntisymMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a.get(i, k) * b.get(k, j) - b.get(i, k) * a.get(k, j);
            }
            out.upper[upper_index(n, i, j)] = s;
        }
    }
    Ok(out)
}

/// Largest entry of `|G^T G - I|`.
pub fn orthogonality_defect(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    let gtg = g.transpose() * g;
    (gtg - DMatrix::<f64>::identity(n, n)).amax()
}

/// Coadjoint (= adjoint) action `g a g^T` for orthogonal `g`.
pub fn conjugate(g: &DMatrix<f64>, a: &AntisymMatrix) -> Result<AntisymMatrix> {
    if g.nrows() != a.n || g.ncols() != a.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            found: g.nrows(),
        });
    }
    let deviation = orthogonality_defect(g);
    if deviation > tolerances().input_drift {
        return Err(Error::NotOrthogonal { deviation });
    }
    Ok(AntisymMatrix::project(&(g * a.to_dense() * g.transpose())))
}

const EXP_TAYLOR_MAX_TERMS: usize = 40;

/// `exp(s Y)` by scaling and squaring with a Taylor core.
///
/// The argument is halved until its 1-norm is at most 1/2; the series is then
/// summed until the next term falls below machine epsilon relative to the sum.
pub fn group_exp(y: &AntisymMatrix, s: f64) -> DMatrix<f64> {
    let n = y.n;
    let a = y.to_dense() * s;
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let mut squarings = 0u32;
    let mut scaled_norm = norm1;
    while scaled_norm > 0.5 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let a = a / 2f64.powi(squarings as i32);
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..EXP_TAYLOR_MAX_TERMS {
        term = &term * &a / k as f64;
        result += &term;
        if term.amax() < f64::EPSILON * 1e-2 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `{phi, psi}(alpha) = <alpha, [d phi, d psi]>` from the two gradients.
pub fn lie_poisson_bracket(
    phi_grad: &AntisymMatrix,
    psi_grad: &AntisymMatrix,
    alpha: &AntisymMatrix,
) -> Result<f64> {
    pairing(alpha, &commutator(phi_grad, psi_grad)?)
}

/// `Y -> [Y, x]` as a matrix acting on upper-triangle coordinates.
pub fn ad_matrix(x: &AntisymMatrix) -> DMatrix<f64> {
    let n = x.n;
    let d = so_dim(n);
    let mut m = DMatrix::zeros(d, d);
    let mut col = 0;
    for a in 0..n {
        for b in a + 1..n {
            let e = AntisymMatrix::unit(n, a, b);
            let image = commutator(&e, x).expect("same dimension");
            for (row, v) in image.upper.iter().enumerate() {
                m[(row, col)] = *v;
            }
            col += 1;
        }
    }
    m
}

/// A point of the Cartan subalgebra: blocks `x_k * [[0, 1], [-1, 0]]` on the
/// diagonal, with a trailing zero row and column when `n` is odd.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanElement {
    n: usize,
    values: Vec<f64>,
}

impl CartanElement {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        if values.len() != n / 2 {
            return Err(Error::DimensionMismatch {
                expected: n / 2,
                found: values.len(),
            });
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn to_matrix(&self) -> AntisymMatrix {
        let mut m = AntisymMatrix::zeros(self.n);
        for (k, &x) in self.values.iter().enumerate() {
            m.set(2 * k, 2 * k + 1, x);
        }
        m
    }

    /// Reads the Cartan values back from a matrix in normal form.
    pub fn from_matrix(m: &AntisymMatrix) -> Result<Self> {
        let n = m.n();
        let values: Vec<f64> = (0..n / 2).map(|k| m.get(2 * k, 2 * k + 1)).collect();
        let candidate = Self { n, values };
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        if candidate.to_matrix().distance(m) > tolerances().output_drift * scale {
            return Err(Error::NotNormalForm);
        }
        Ok(candidate)
    }

    /// `x_k != 0` and `x_k^2 != x_l^2`, with squares compared relative to `max x^2`.
    pub fn check_generic(&self) -> std::result::Result<(), Genericity> {
        let rel = tolerances().genericity;
        let max_sq = self.values.iter().map(|v| v * v).fold(0.0_f64, f64::max);
        for (k, &x) in self.values.iter().enumerate() {
            if max_sq == 0.0 || x * x <= rel * max_sq {
                return Err(Genericity::CartanZero { k: k + 1, value: x });
            }
        }
        for k in 0..self.values.len() {
            for l in k + 1..self.values.len() {
                let (xk, xl) = (self.values[k], self.values[l]);
                if (xk * xk - xl * xl).abs() <= rel * max_sq {
                    return Err(Genericity::CartanSquares {
                        k: k + 1,
                        l: l + 1,
                        xk,
                        xl,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn is_generic(&self) -> bool {
        self.check_generic().is_ok()
    }
}

/// A permutation `p` of `{0, …, n-1}` stored by images, `p[j] = p(j)`.
///
/// Its matrix is `P_ij = delta(i, p(j))`, so `P D P^-1 = diag(d_{p^-1(1)}, …)`
/// for diagonal `D` and `det P = sgn p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "{images:?} is not a permutation"
                )));
            }
            seen[i] = true;
        }
        Ok(Self(images))
    }

    /// From one-based images, as written in the JSON exports.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::InvalidArgument("one-based images expected".into()));
        }
        Self::new(images.iter().map(|i| i - 1).collect())
    }

    /// The transposition exchanging `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(n);
        p.0.swap(a, b);
        p
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn apply(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (j, &pj) in self.0.iter().enumerate() {
            inv[pj] = j;
        }
        Self(inv)
    }

    /// `(self * other)(j) = self(other(j))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self(other.0.iter().map(|&j| self.0[j]).collect())
    }

    pub fn sign(&self) -> i8 {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut transpositions = 0usize;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.0[j];
                len += 1;
            }
            transpositions += len - 1;
        }
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_even(&self) -> bool {
        self.sign() == 1
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.0.len();
        let mut m = DMatrix::zeros(n, n);
        for (j, &pj) in self.0.iter().enumerate() {
            m[(pj, j)] = 1.0;
        }
        m
    }

    /// `P a P^-1`, computed exactly by relabelling: entry `(p(i), p(j))` is `a_ij`.
    pub fn conjugate(&self, a: &AntisymMatrix) -> AntisymMatrix {
        let n = a.n();
        assert_eq!(n, self.0.len());
        let mut out = AntisymMatrix::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                out.set(self.0[i], self.0[j], a.get(i, j));
            }
        }
        out
    }

    /// `P^-1 diag(d) P = diag(d_{p(1)}, …, d_{p(n)})`.
    pub fn pull_back_diagonal(&self, d: &[f64]) -> Vec<f64> {
        self.0.iter().map(|&pj| d[pj]).collect()
    }

    /// Lexicographic successor, or `None` after the last permutation.
    pub fn next_lexicographic(&self) -> Option<Self> {
        let mut v = self.0.clone();
        let n = v.len();
        if n < 2 {
            return None;
        }
        let mut i = n - 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            return None;
        }
        let mut j = n - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
        Some(Self(v))
    }

    /// All permutations of `n` letters in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        std::iter::successors(Some(Self::identity(n)), |p| p.next_lexicographic())
    }
}
