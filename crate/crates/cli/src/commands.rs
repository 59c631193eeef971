//! Subcommand implementations. Each writes its files under `out` and returns a
//! one-line summary for the terminal.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use manakov_core::dynamics::{audited_invariants, invariant_names};
use manakov_core::equilibria::EquilibriumRecord;
use manakov_core::export::{equilibrium_records, write_orbit_csv, write_trajectory_csv, OrbitSummary};
use manakov_core::heteroclinic::build_so4_indexed;
use manakov_core::so4::{lambda_from_j, lm_hamiltonians, mu_to_lm};
use manakov_core::son::group_exp;
use manakov_core::stability::{block_decompose_cartan, SearchOptions};
use manakov_core::{
    build_general, classify_equilibrium, classify_so4, enumerate_equilibria, integrate_with, verify_orbit,
    AntisymMatrix, CartanElement, ClassifyOptions, Error as CoreError, HeteroclinicOrbit, IntegrateOptions,
    StabilityReport, Verdict, VerifyOptions,
};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::spec::{Loaded, Problem};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_SAMPLES: usize = 200;

/// Run settings after merging command-line flags over spec options.
#[derive(Debug, Clone)]
pub struct Settings {
    pub dt: f64,
    pub t_end: f64,
    pub samples: usize,
    pub equilibrium: usize,
    pub eigen: usize,
    pub k_max: usize,
    pub search: Option<SearchOptions>,
    pub verify: VerifyOptions,
    pub out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(CoreError::from)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// The Cartan problem behind a spec; `(a e3, e3)` maps to `x = (a - 1, -1 - a)`.
fn cartan(problem: &Problem) -> Result<(manakov_core::InertiaSpec, CartanElement)> {
    match problem {
        Problem::Cartan { j, x } => Ok((j.clone(), x.clone())),
        Problem::So4Axis { j, a, .. } => {
            let x = CartanElement::new(4, vec![a - 1.0, -1.0 - a])?;
            x.check_generic().map_err(|e| {
                CliError::Spec(format!(
                    "(a e3, e3) has Cartan values ({}, {}), which are not generic: {e}",
                    a - 1.0,
                    -1.0 - a
                ))
            })?;
            Ok((j.clone(), x))
        }
    }
}

pub fn equilibria(loaded: &Loaded, s: &Settings) -> Result<String> {
    let (j, x) = cartan(&loaded.problem)?;
    let points = enumerate_equilibria(&x, &j)?;
    let records: Vec<EquilibriumRecord> = equilibrium_records(&points);
    let path = s.out.join("equilibria.json");
    write_json(&path, &records)?;
    let worst = records.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(format!(
        "{} equilibria (max residual {worst:.2e}) -> {}",
        records.len(),
        path.display()
    ))
}

#[derive(Debug, Serialize)]
struct StabilityEntry {
    index: usize,
    perm: Vec<usize>,
    sign: i8,
    point: Vec<f64>,
    #[serde(flatten)]
    report: StabilityReport,
}

pub fn stability(loaded: &Loaded, s: &Settings) -> Result<String> {
    let entries: Vec<StabilityEntry> = match &loaded.problem {
        Problem::So4Axis { lambda, a, .. } => vec![StabilityEntry {
            index: 0,
            perm: (1..=4).collect(),
            sign: 1,
            point: loaded.problem.base_point().into_upper(),
            report: classify_so4(lambda, *a)?,
        }],
        Problem::Cartan { j, x } => {
            let opts = ClassifyOptions {
                search: s.search.clone(),
            };
            enumerate_equilibria(x, j)?
                .iter()
                .enumerate()
                .map(|(index, eq)| {
                    let rec = eq.record();
                    Ok(StabilityEntry {
                        index,
                        perm: rec.perm,
                        sign: rec.sign,
                        point: rec.point,
                        report: classify_equilibrium(j, x, eq, &opts)?,
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    let path = s.out.join("stability.json");
    write_json(&path, &entries)?;
    let count = |v: Verdict| entries.iter().filter(|e| e.report.verdict == v).count();
    Ok(format!(
        "{} equilibria: {} stable, {} unstable, {} indeterminate, {} rejected -> {}",
        entries.len(),
        count(Verdict::Stable),
        count(Verdict::Unstable),
        count(Verdict::IndeterminateAllImaginary),
        count(Verdict::NonGenericRejected),
        path.display()
    ))
}

/// `mu0` from the spec, or the base point turned by a fixed small rotation.
pub fn initial_state(loaded: &Loaded) -> AntisymMatrix {
    if let Some(mu) = &loaded.mu0 {
        return mu.clone();
    }
    let x = loaded.problem.base_point();
    let n = x.n();
    let y = AntisymMatrix::from_upper(n, vec![1.0; n * (n - 1) / 2]).expect("sizes agree");
    let g = group_exp(&y, 0.05);
    AntisymMatrix::project(&(&g * x.to_dense() * g.transpose()))
}

#[derive(Debug, Serialize)]
struct SimulationSummary {
    n: usize,
    dt: f64,
    t_end: f64,
    records: usize,
    invariant_names: Vec<String>,
    initial: Vec<f64>,
    last: Vec<f64>,
    relative_drifts: Vec<f64>,
    max_relative_drift: f64,
}

pub fn simulate(loaded: &Loaded, s: &Settings) -> Result<String> {
    let j = loaded.problem.j();
    let mu0 = initial_state(loaded);
    if mu0.n() != j.n() {
        return Err(CliError::Spec(format!("mu0 has size {}, J has {}", mu0.n(), j.n())));
    }
    let steps = (s.t_end / s.dt).ceil().max(1.0) as usize;
    let opts = IntegrateOptions {
        record_every: (steps / s.samples.max(1)).max(1),
        k_max: s.k_max,
    };
    let traj = integrate_with(j, &mu0, s.t_end, s.dt, &opts)?;
    let path = s.out.join("trajectory.csv");
    write_trajectory_csv(&traj, create(&path)?)?;
    let drifts = traj.relative_drifts();
    let summary = SimulationSummary {
        n: traj.n(),
        dt: s.dt,
        t_end: s.t_end,
        records: traj.times.len(),
        invariant_names: traj.invariant_names.clone(),
        initial: traj.invariant_log[0].clone(),
        last: traj.invariant_log.last().cloned().unwrap_or_default(),
        max_relative_drift: traj.max_relative_drift(),
        relative_drifts: drifts.clone(),
    };
    write_json(&s.out.join("simulate.json"), &summary)?;
    for (name, d) in traj.invariant_names.iter().zip(&drifts) {
        eprintln!("drift {name:>16}: {d:.3e}");
    }
    Ok(format!(
        "{} records to t = {} (max relative drift {:.2e}) -> {}",
        summary.records,
        s.t_end,
        summary.max_relative_drift,
        path.display()
    ))
}

#[derive(Debug, Serialize)]
struct OrbitFile {
    equilibrium: usize,
    eigen: usize,
    #[serde(flatten)]
    summary: OrbitSummary,
}

fn select_orbit(loaded: &Loaded, s: &Settings) -> Result<HeteroclinicOrbit> {
    match &loaded.problem {
        Problem::So4Axis { lambda, a, .. } => {
            if s.equilibrium != 0 {
                return Err(CliError::Spec("an (lambda, a) spec has the single equilibrium 0".into()));
            }
            Ok(build_so4_indexed(lambda, *a, s.eigen)?)
        }
        Problem::Cartan { j, x } => {
            let eqs = enumerate_equilibria(x, j)?;
            let eq = eqs.get(s.equilibrium).ok_or_else(|| {
                CliError::Spec(format!(
                    "equilibrium index {} out of range ({} equilibria)",
                    s.equilibrium,
                    eqs.len()
                ))
            })?;
            let jp = eq.normal_form_inertia(j)?;
            let blocks = block_decompose_cartan(&jp, x)?;
            let candidates: Vec<(usize, usize)> = blocks
                .iter()
                .enumerate()
                .flat_map(|(b, block)| (0..block.real_positive_eigenvalues().len()).map(move |k| (b, k)))
                .collect();
            if candidates.is_empty() {
                return Err(CoreError::NoRealEigenvalue.into());
            }
            let &(b, k) = candidates.get(s.eigen).ok_or_else(|| {
                CliError::Spec(format!(
                    "eigen index {} out of range ({} positive real eigenvalues)",
                    s.eigen,
                    candidates.len()
                ))
            })?;
            let orbit = build_general(&jp, x, &blocks[b], k)?;
            Ok(orbit.conjugated(&eq.permutation))
        }
    }
}

pub fn heteroclinic(loaded: &Loaded, s: &Settings) -> Result<String> {
    let orbit = select_orbit(loaded, s)?;
    let j = loaded.problem.j();
    let verification = verify_orbit(j, &orbit, s.samples, &s.verify)?;
    let csv_path = s.out.join("orbit.csv");
    write_orbit_csv(&orbit, s.samples, create(&csv_path)?)?;
    let passed = verification.passed;
    let file = OrbitFile {
        equilibrium: s.equilibrium,
        eigen: s.eigen,
        summary: OrbitSummary::new(&orbit, verification),
    };
    let json_path = s.out.join("orbit.json");
    write_json(&json_path, &file)?;
    if !passed {
        eprintln!("warning: orbit verification did not pass; see {}", json_path.display());
    }
    Ok(format!(
        "z = {:.6}, Delta = {:.6}, max residual {:.2e}, verification {} -> {}, {}",
        orbit.z,
        orbit.delta,
        file.summary.max_residual,
        if passed { "passed" } else { "FAILED" },
        csv_path.display(),
        json_path.display()
    ))
}

#[derive(Debug, Serialize)]
struct So4Values {
    l: [f64; 3],
    m: [f64; 3],
    lambda: [f64; 3],
    h: f64,
    k: f64,
}

#[derive(Debug, Serialize)]
struct InvariantsFile {
    state: Vec<f64>,
    names: Vec<String>,
    values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    so4: Option<So4Values>,
}

pub fn invariants(loaded: &Loaded, s: &Settings) -> Result<String> {
    let j = loaded.problem.j();
    let mu = loaded.mu0.clone().unwrap_or_else(|| loaded.problem.base_point());
    let values = audited_invariants(j, &mu, s.k_max)?;
    let so4 = if mu.n() == 4 {
        let lambda = match &loaded.problem {
            Problem::So4Axis { lambda, .. } => Some(lambda.clone()),
            Problem::Cartan { j, .. } => lambda_from_j(j).ok(),
        };
        match lambda {
            Some(lambda) => {
                let lm = mu_to_lm(&mu)?;
                let (h, k) = lm_hamiltonians(&lambda, &lm);
                Some(So4Values {
                    l: lm.l,
                    m: lm.m,
                    lambda: lambda.lambda,
                    h,
                    k,
                })
            }
            None => None,
        }
    } else {
        None
    };
    let file = InvariantsFile {
        state: mu.upper().to_vec(),
        names: invariant_names(s.k_max),
        values,
        so4,
    };
    let path = s.out.join("invariants.json");
    write_json(&path, &file)?;
    Ok(format!("{} invariants -> {}", file.values.len(), path.display()))
}
