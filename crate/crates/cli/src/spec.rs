//! Problem specification files.

use std::path::Path;

use manakov_core::so4::{j_from_lambda, lm_to_mu};
use manakov_core::stability::SearchOptions;
use manakov_core::{
    AntisymMatrix, CartanElement, InertiaSpec, LMState, LambdaSpec, Tolerances, VerifyOptions,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecOptions {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    /// Index into the enumerated equilibria (heteroclinic).
    pub equilibrium: Option<usize>,
    /// Index among the positive real eigenvalues, largest first (heteroclinic).
    pub eigen: Option<usize>,
    /// Highest power of `L` whose coefficients are logged.
    pub k_max: Option<usize>,
    /// Enables the experimental definiteness search (stability, n > 4).
    pub search: Option<SearchOptions>,
    pub verify: Option<VerifyOptions>,
    pub tolerances: Option<Tolerances>,
}

/// Either `J` with Cartan values `x`, or an so(4) instance `(Lambda, a)` at `(a e3, e3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub n: usize,
    #[serde(rename = "J", default)]
    pub j: Option<Vec<f64>>,
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda: Option<[f64; 3]>,
    #[serde(default)]
    pub a: Option<f64>,
    /// Initial state as a strict upper triangle (simulate, invariants).
    #[serde(default)]
    pub mu0: Option<Vec<f64>>,
    #[serde(default)]
    pub options: SpecOptions,
}

#[derive(Debug, Clone)]
pub enum Problem {
    Cartan {
        j: InertiaSpec,
        x: CartanElement,
    },
    So4Axis {
        lambda: LambdaSpec,
        a: f64,
        j: InertiaSpec,
    },
}

impl Problem {
    pub fn n(&self) -> usize {
        self.j().n()
    }

    pub fn j(&self) -> &InertiaSpec {
        match self {
            Problem::Cartan { j, .. } | Problem::So4Axis { j, .. } => j,
        }
    }

    /// `x` itself, or `(a e3, e3)`.
    pub fn base_point(&self) -> AntisymMatrix {
        match self {
            Problem::Cartan { x, .. } => x.to_matrix(),
            Problem::So4Axis { a, .. } => lm_to_mu(&LMState::axis(*a, 1.0, 2)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub problem: Problem,
    pub mu0: Option<AntisymMatrix>,
    pub options: SpecOptions,
}

fn spec_err(msg: impl Into<String>) -> CliError {
    CliError::Spec(msg.into())
}

fn finite(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(spec_err(format!("{name}[{k}] is not finite"))),
        None => Ok(()),
    }
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| spec_err(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Validates dimensions and genericity.
    pub fn resolve(self) -> Result<Loaded> {
        let n = self.n;
        if n < 3 {
            return Err(spec_err(format!("n must be at least 3, got {n}")));
        }
        let problem = match (self.j, self.x, self.lambda, self.a) {
            (Some(j), Some(x), None, None) => {
                if j.len() != n {
                    return Err(spec_err(format!("J has {} entries, expected n = {n}", j.len())));
                }
                if x.len() != n / 2 {
                    return Err(spec_err(format!("x has {} entries, expected {}", x.len(), n / 2)));
                }
                finite("J", &j)?;
                finite("x", &x)?;
                let j = InertiaSpec::new(j).map_err(|e| spec_err(e.to_string()))?;
                let x = CartanElement::new(n, x).map_err(|e| spec_err(e.to_string()))?;
                x.check_generic().map_err(|e| spec_err(format!("non-generic input: {e}")))?;
                Problem::Cartan { j, x }
            }
            (None, None, Some(l), Some(a)) => {
                if n != 4 {
                    return Err(spec_err("lambda and a describe an so(4) instance; n must be 4"));
                }
                finite("lambda", &l)?;
                if a == 0.0 || !a.is_finite() {
                    return Err(spec_err(format!("non-generic input: a != 0 violated: a = {a}")));
                }
                let lambda = LambdaSpec::new(l).map_err(|e| spec_err(e.to_string()))?;
                let j = j_from_lambda(&lambda).map_err(|e| spec_err(e.to_string()))?;
                Problem::So4Axis { lambda, a, j }
            }
            _ => {
                return Err(spec_err(
                    "give either \"J\" and \"x\", or \"lambda\" and \"a\" (n = 4)",
                ))
            }
        };
        let mu0 = match self.mu0 {
            Some(u) => {
                finite("mu0", &u)?;
                let expected = n * (n - 1) / 2;
                if u.len() != expected {
                    return Err(spec_err(format!("mu0 has {} entries, expected {expected}", u.len())));
                }
                Some(AntisymMatrix::from_upper(n, u).map_err(|e| spec_err(e.to_string()))?)
            }
            None => None,
        };
        Ok(Loaded {
            problem,
            mu0,
            options: self.options,
        })
    }
}

/// Applies `NAME=VALUE` overrides to a tolerance set.
pub fn apply_tolerance_overrides(base: Tolerances, overrides: &[String]) -> Result<Tolerances> {
    let mut value = serde_json::to_value(base).expect("tolerances serialize");
    let map = value.as_object_mut().expect("tolerances are a struct");
    for item in overrides {
        let (name, raw) = item
            .split_once('=')
            .ok_or_else(|| spec_err(format!("--tol expects NAME=VALUE, got {item:?}")))?;
        let name = name.trim().replace('-', "_");
        if !map.contains_key(&name) {
            let known: Vec<&str> = map.keys().map(String::as_str).collect();
            return Err(spec_err(format!("unknown tolerance {name:?}; known: {}", known.join(", "))));
        }
        let v: f64 = raw
            .trim()
            .parse()
            .map_err(|_| spec_err(format!("tolerance {name} is not a number: {raw:?}")))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(spec_err(format!("tolerance {name} must be positive, got {v}")));
        }
        map.insert(name, serde_json::json!(v));
    }
    serde_json::from_value(value).map_err(|e| spec_err(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartan_spec() {
        let spec = ProblemSpec::from_json(r#"{"n": 4, "J": [1, 2, 4, 8], "x": [1, 2]}"#).unwrap();
        let loaded = spec.resolve().unwrap();
        assert_eq!(loaded.problem.n(), 4);
        assert!(loaded.mu0.is_none());
    }

    #[test]
    fn so4_spec() {
        let spec = ProblemSpec::from_json(r#"{"n": 4, "lambda": [1, 9, 5], "a": 1}"#).unwrap();
        let loaded = spec.resolve().unwrap();
        assert!(matches!(loaded.problem, Problem::So4Axis { .. }));
    }

    #[test]
    fn degenerate_inertia_names_inequality() {
        let spec = ProblemSpec::from_json(r#"{"n": 3, "J": [1, -1, 2], "x": [1]}"#).unwrap();
        let msg = spec.resolve().unwrap_err().to_string();
        assert!(msg.contains("J_i^2 != J_j^2"), "{msg}");
    }

    #[test]
    fn rejects_mixed_or_malformed() {
        for text in [
            r#"{"n": 4, "J": [1, 2, 4, 8], "x": [1, 2], "lambda": [1, 9, 5], "a": 1}"#,
            r#"{"n": 4, "J": [1, 2, 4], "x": [1, 2]}"#,
            r#"{"n": 4, "J": [1, 2, 4, 8], "x": [1, 1]}"#,
            r#"{"n": 5, "lambda": [1, 9, 5], "a": 1}"#,
            r#"{"n": 4, "J": [1, 2, 4, 8], "x": [1, 2], "mu0": [1, 2]}"#,
            r#"{"n": 4, "J": [1, 2, 4, 8], "x": [1, 2], "colour": 3}"#,
        ] {
            let r = ProblemSpec::from_json(text).and_then(ProblemSpec::resolve);
            assert_eq!(r.unwrap_err().exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn tolerance_overrides() {
        let t = apply_tolerance_overrides(Tolerances::default(), &["imaginary=1e-6".into()]).unwrap();
        assert_eq!(t.imaginary, 1e-6);
        assert!(apply_tolerance_overrides(Tolerances::default(), &["bogus=1".into()]).is_err());
        assert!(apply_tolerance_overrides(Tolerances::default(), &["imaginary".into()]).is_err());
    }
}
