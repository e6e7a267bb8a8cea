//! Command-line driver for `compulse-core`: configuration parsing, the
//! `propagate | scan | solve | verify` subcommands and their output formats.

use std::io;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;

use config::{Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Input { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] compulse_core::Error),
    #[error("thread pool: {0}")]
    Threads(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => 2,
            CliError::Output { .. } => 3,
            CliError::Core(_) | CliError::Threads(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "compulse", version, about = "Composite pulse sequences for V and Y multistate systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Solver seed, overriding `[solve] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Built-in phase set, overriding `preset` in the file.
    #[arg(long, global = true)]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Print the propagator and transfer probabilities at the configured point.
    Propagate,
    /// Emit a CSV robustness landscape.
    Scan,
    /// Design phases and emit a JSON solution catalog.
    Solve,
    /// Compare the closed form with the integrator over a grid.
    Verify,
}

pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let overrides = Overrides { preset: cli.preset.clone(), seed: cli.seed };
    match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::Input { path: path.clone(), source })?;
            RunConfig::from_toml(&text, &overrides)
                .map_err(|e| match e {
                    CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                    other => other,
                })
        }
        None => match &cli.preset {
            Some(name) => RunConfig::from_preset(name, &overrides),
            None => Err(CliError::Config("give --config or --preset".into())),
        },
    }
}

/// Runs one subcommand on a dedicated thread pool.
pub fn execute(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let cfg = load_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Threads(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Propagate => commands::cmd_propagate(&cfg),
        Command::Scan => commands::cmd_scan(&cfg),
        Command::Solve => commands::cmd_solve(&cfg),
        Command::Verify => commands::cmd_verify(&cfg),
    })
}
