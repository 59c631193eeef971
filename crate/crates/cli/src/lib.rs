//! Command-line front end: problem specs in, JSON and CSV files out.

pub mod commands;
pub mod error;
pub mod spec;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use manakov_core::{set_tolerances, tolerances};

pub use error::{CliError, Result};
use spec::{apply_tolerance_overrides, ProblemSpec};

#[derive(Debug, Parser)]
#[command(name = "manakov", version, about = "Equilibria, stability and heteroclinic orbits of Euler equations on so(n)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate the equilibria on the orbit of x (equilibria.json).
    Equilibria(Common),
    /// Classify every equilibrium (stability.json).
    Stability {
        #[command(flatten)]
        common: Common,
        /// Run the experimental definiteness search for all-imaginary spectra (n > 4).
        #[arg(long)]
        search: bool,
    },
    /// Integrate from mu0 (trajectory.csv, simulate.json).
    Simulate(Common),
    /// Build and verify a heteroclinic orbit (orbit.csv, orbit.json).
    Heteroclinic {
        #[command(flatten)]
        common: Common,
        /// Index into the enumerated equilibria.
        #[arg(long)]
        equilibrium: Option<usize>,
        /// Index among the positive real eigenvalues, largest first.
        #[arg(long)]
        eigen: Option<usize>,
    },
    /// Evaluate H, the Casimirs and the Manakov coefficients at mu0 (invariants.json).
    Invariants(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Problem spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Integrator step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Integration end time.
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Output records (simulate) or orbit samples (heteroclinic).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Tolerance override NAME=VALUE (repeatable), e.g. --tol imaginary=1e-8.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Spec(format!("{name} must be positive, got {v}")))
    }
}

/// Runs one command and returns its summary line.
pub fn run(cli: Cli) -> Result<String> {
    let (common, search, equilibrium, eigen) = match &cli.command {
        Command::Equilibria(c) | Command::Simulate(c) | Command::Invariants(c) => (c, false, None, None),
        Command::Stability { common, search } => (common, *search, None, None),
        Command::Heteroclinic {
            common,
            equilibrium,
            eigen,
        } => (common, false, *equilibrium, *eigen),
    };
    let loaded = ProblemSpec::read(&common.spec)?.resolve()?;
    let opts = &loaded.options;

    let base = opts.tolerances.unwrap_or_else(tolerances);
    set_tolerances(apply_tolerance_overrides(base, &common.tol)?);

    let dt = positive("dt", common.dt.or(opts.dt).unwrap_or(commands::DEFAULT_DT))?;
    let mut verify = opts.verify.clone().unwrap_or_default();
    if common.dt.is_some() || opts.dt.is_some() {
        verify.dt = dt;
    }
    let samples = common.samples.or(opts.samples).unwrap_or(commands::DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(CliError::Spec("samples must be at least 1".into()));
    }
    let k_max = opts.k_max.unwrap_or(4);
    if k_max < 2 {
        return Err(CliError::Spec(format!("k_max must be at least 2, got {k_max}")));
    }
    let settings = commands::Settings {
        dt,
        t_end: positive("t_end", common.t_end.or(opts.t_end).unwrap_or(commands::DEFAULT_T_END))?,
        samples,
        equilibrium: equilibrium.or(opts.equilibrium).unwrap_or(0),
        eigen: eigen.or(opts.eigen).unwrap_or(0),
        k_max,
        search: if search {
            Some(opts.search.clone().unwrap_or_default())
        } else {
            opts.search.clone()
        },
        verify,
        out: common.out.clone(),
    };
    commands::prepare_out(&settings.out)?;
    match cli.command {
        Command::Equilibria(_) => commands::equilibria(&loaded, &settings),
        Command::Stability { .. } => commands::stability(&loaded, &settings),
        Command::Simulate(_) => commands::simulate(&loaded, &settings),
        Command::Heteroclinic { .. } => commands::heteroclinic(&loaded, &settings),
        Command::Invariants(_) => commands::invariants(&loaded, &settings),
    }
}
