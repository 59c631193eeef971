//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

/// Eigenvalues of a real square matrix (Schur based).
///
/// The unbounded QR iteration can stall on matrices with quartet-symmetric
/// spectra, so the iteration is capped and retried after a fixed orthogonal
/// similarity when it does not converge.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let max_iter = 200 * n.max(4);
    let mut current = m.clone();
    for attempt in 0..8 {
        if let Some(schur) = Schur::try_new(current.clone(), f64::EPSILON, max_iter) {
            if let Some(ev) = schur_eigenvalues(&schur) {
                return ev;
            }
        }
        let q = mixing_rotation(n, attempt);
        current = &q * m * q.transpose();
    }
    panic!("Schur iteration did not converge");
}

fn schur_eigenvalues(schur: &Schur<f64, nalgebra::Dyn>) -> Option<Vec<Complex64>> {
    let ev: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    ev.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(ev)
}

/// Deterministic orthogonal matrix from the QR factor of a fixed pseudo-random matrix.
fn mixing_rotation(n: usize, attempt: usize) -> DMatrix<f64> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (attempt as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    let a = DMatrix::from_fn(n, n, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    a.qr().q()
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Right singular vector of the smallest singular value, with that value.
pub fn null_vector(m: &DMatrix<f64>) -> (DVector<f64>, f64) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, s)| (i, *s))
        .expect("non-empty matrix");
    (v_t.row(idx).transpose(), sigma)
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn solve_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-12 * (a.nrows().max(a.ncols()) as f64);
    svd.solve(b, eps).expect("U and V^T were computed")
}

/// Orthonormal basis (columns) of the null space of `m`, relative to its largest singular value.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let smax = if m.is_empty() { 0.0 } else { m.clone().singular_values().max() };
    null_space_below(m, rel_tol * smax)
}

/// Orthonormal basis (columns) of the span of right singular vectors with singular value `<= tol`.
pub fn null_space_below(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    // Pad to at least square so that V^T is complete.
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| i)
        .collect();
    let mut out = DMatrix::zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &v_t.row(i).transpose());
    }
    out
}

/// Largest distance in a greedy nearest-neighbour matching of two multisets.
/// Returns infinity when the sizes differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    // Match the most isolated values first.
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].norm().total_cmp(&a[i].norm()));
    for i in order {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, z)| (k, (z - a[i]).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("sizes agree");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// How far a spectrum is from being closed under negation and conjugation.
pub fn quartet_defect(spectrum: &[Complex64]) -> f64 {
    let neg: Vec<Complex64> = spectrum.iter().map(|z| -z).collect();
    let conj: Vec<Complex64> = spectrum.iter().map(|z| z.conj()).collect();
    multiset_distance(spectrum, &neg).max(multiset_distance(spectrum, &conj))
}

/// Sorts by (real, imaginary) for stable reporting.
pub fn sort_spectrum(spectrum: &mut [Complex64]) {
    spectrum.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}
