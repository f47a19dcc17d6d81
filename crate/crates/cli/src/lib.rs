//! Command-line front end: JSON scenario in, JSON or CSV results out.
//!
//! Exit codes: 0 success or PASS, 2 configuration or domain error,
//! 3 tolerance FAIL, 4 no feasible allocation.

pub mod analyze;
pub mod compare;
pub mod config;
pub mod error;
pub mod metrics;
pub mod optimize;
pub mod output;
pub mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use toi_core::{Policy, ZeroWaitVariant};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "toi", version, about = "Timeliness of information: closed forms, simulation, resource allocation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every closed-form metric of a scenario.
    Analyze(RunArgs),
    /// Simulate a scenario and compare with its closed forms.
    Compare(RunArgs),
    /// Evaluate metrics over a one- or two-parameter grid (CSV).
    Sweep(RunArgs),
    /// Optimize rates, bandwidth and CPU across devices; compare baselines.
    Optimize(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Tagged tasks per simulation run.
    #[arg(long, default_value_t = 1_000_000)]
    pub tasks: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Tasks discarded at the start of each run [default: max(10^4, tasks/100)].
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Largest relative error that still counts as PASS.
    #[arg(long, default_value_t = 0.01)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    /// stochastic | zero-wait; overrides the scenario kind's policy.
    #[arg(long)]
    pub policy: Option<Policy>,
    /// printed | corrected: zero-wait formula used as reference.
    #[arg(long, default_value = "corrected")]
    pub variant: ZeroWaitVariant,
}

impl RunArgs {
    pub fn new(config: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            config: config.into(),
            out: out.into(),
            tasks: 1_000_000,
            seed: 1,
            warmup: None,
            tolerance: 0.01,
            replications: 1,
            policy: None,
            variant: ZeroWaitVariant::Corrected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Fail,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Fail => 3,
        }
    }
}

/// Worker pool sized by `TOI_THREADS` (default: all cores).
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("TOI_THREADS") {
        let n = v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Config(format!("TOI_THREADS = {v:?} is not a positive integer")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Io(e.to_string()))
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    thread_pool()?.install(|| match &cli.command {
        Command::Analyze(a) => analyze::cmd_analyze(a),
        Command::Compare(a) => compare::cmd_compare(a),
        Command::Sweep(a) => sweep::cmd_sweep(a),
        Command::Optimize(a) => optimize::cmd_optimize(a),
    })
}

/// Process exit code for a run result, printing errors to stderr.
pub fn exit_code(r: Result<Outcome, CliError>) -> i32 {
    match r {
        Ok(o) => o.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
