//! Euler equations on so(n) with a diagonal inertia operator: equilibria,
//! their linear stability and heteroclinic connections.

pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod export;
pub mod heteroclinic;
pub mod linalg;
pub mod so4;
pub mod son;
pub mod stability;
pub mod tolerance;

pub use dynamics::{integrate, integrate_with, hamiltonian, vector_field, InertiaSpec, IntegrateOptions, Trajectory};
pub use equilibria::{enumerate_equilibria, is_equilibrium, EquilibriumPoint, EquilibriumRecord};
pub use error::{Error, Genericity, Result};
pub use heteroclinic::{build_general, build_so4, verify_orbit, HeteroclinicOrbit, OrbitVerification, VerifyOptions};
pub use so4::{LMState, LambdaSpec};
pub use stability::{classify_equilibrium, classify_so4, ClassifyOptions, StabilityReport, Verdict};
pub use son::{AntisymMatrix, CartanElement, Permutation};
pub use tolerance::{set_tolerances, tolerances, Tolerances};
