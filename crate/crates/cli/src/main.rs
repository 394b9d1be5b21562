//! `icstab`: stability regions of the two-user interference channel.
//!
//! Exit codes: 0 success, 1 failed checks or I/O error, 2 configuration
//! error, 3 inconclusive simulation.

mod commands;
mod config;
mod format;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Inconclusive(String),
    Failed(String),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) | CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Inconclusive(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Inconclusive(m) => write!(f, "inconclusive: {m}"),
            CliError::Failed(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<icstab_core::Error> for CliError {
    fn from(e: icstab_core::Error) -> Self {
        match e {
            icstab_core::Error::Inconclusive { .. } => CliError::Inconclusive(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "icstab", version, about = "Stability regions of the two-user interference channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; required by validate and simulate.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config value, e.g. `power_points=21` (repeatable).
    #[arg(long = "grid-override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Compare closed-form success probabilities with Monte Carlo.
    Validate(Common),
    /// Stability region at the configured powers.
    Region(Common),
    /// Envelope of stability regions over a parameter grid.
    Closure(Common),
    /// Queue simulation and empirical stability verdicts.
    Simulate(Common),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("ICSTAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("ICSTAB_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (Command::Validate(common)
    | Command::Region(common)
    | Command::Closure(common)
    | Command::Simulate(common)) = &cli.command;
    let mut config = ExperimentConfig::load(&common.config)?;
    for o in &common.overrides {
        config.apply_override(o)?;
    }
    config.check()?;
    std::fs::create_dir_all(&common.out).map_err(|e| CliError::io(&common.out, e))?;
    let out = common.out.as_path();
    match &cli.command {
        Command::Validate(c) => commands::validate(&config, out, c.seed),
        Command::Region(_) => commands::region(&config, out),
        Command::Closure(_) => commands::closure(&config, out),
        Command::Simulate(c) => commands::simulate(&config, out, c.seed),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("icstab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
