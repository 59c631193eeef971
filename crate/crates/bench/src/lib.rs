//! Fixed problem instances shared by the benchmarks.

use manakov_core::{AntisymMatrix, CartanElement, InertiaSpec};

/// A generic inertia operator and Cartan element in dimension `n` (3 to 8).
pub fn instance(n: usize) -> (InertiaSpec, CartanElement) {
    let j = [0.3, 1.7, -2.2, 2.9, 0.8, -1.3, 2.4, 3.7];
    let x = [1.1, -0.45, 2.0, 0.7];
    (
        InertiaSpec::new(j[..n].to_vec()).expect("generic inertia"),
        CartanElement::new(n, x[..n / 2].to_vec()).expect("valid Cartan element"),
    )
}

/// A dense antisymmetric matrix with entries in (-1, 1).
pub fn dense_state(n: usize) -> AntisymMatrix {
    let upper = (0..n * (n - 1) / 2)
        .map(|k| ((k as f64 + 1.0) * 0.618_033_988_7).fract() * 2.0 - 1.0)
        .collect();
    AntisymMatrix::from_upper(n, upper).expect("sizes agree")
}
