#![allow(dead_code)]

use manakov_core::so4::LambdaSpec;
use manakov_core::{AntisymMatrix, CartanElement, InertiaSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_antisym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> AntisymMatrix {
    let upper = (0..n * (n - 1) / 2)
        .map(|_| rng.gen_range(-scale..scale))
        .collect();
    AntisymMatrix::from_upper(n, upper).unwrap()
}

/// Generic `J` and Cartan element with well separated entries.
pub fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> (InertiaSpec, CartanElement) {
    loop {
        let j: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let x: Vec<f64> = (0..n / 2).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let separated = (0..n).all(|a| (a + 1..n).all(|b| (j[a] * j[a] - j[b] * j[b]).abs() > 0.05))
            && x.iter().all(|v| v.abs() > 0.1)
            && (0..x.len()).all(|a| (a + 1..x.len()).all(|b| (x[a] * x[a] - x[b] * x[b]).abs() > 0.05));
        if !separated {
            continue;
        }
        if let (Ok(j), Ok(x)) = (InertiaSpec::new(j), CartanElement::new(n, x)) {
            if x.is_generic() {
                return (j, x);
            }
        }
    }
}

/// Generic `Lambda` with entries in `[-10, 10]` and `a` in `[-3, 3]`, both away from zero.
pub fn random_lambda_a(rng: &mut ChaCha8Rng) -> (LambdaSpec, f64) {
    loop {
        let l = [
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
        ];
        let a: f64 = rng.gen_range(-3.0..3.0);
        let separated = l.iter().all(|v: &f64| v.abs() > 0.1)
            && (l[0] * l[0] - l[1] * l[1]).abs() > 0.1
            && (l[0] * l[0] - l[2] * l[2]).abs() > 0.1
            && (l[1] * l[1] - l[2] * l[2]).abs() > 0.1;
        if separated && a.abs() > 0.05 {
            if let Ok(spec) = LambdaSpec::new(l) {
                return (spec, a);
            }
        }
    }
}
