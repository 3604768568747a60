//! Command-line front-end: spec documents in, reports, gains, traces and
//! sweeps out.
//!
//! Exit codes: 0 success, 1 IO or parse failure, 2 a hypothesis does not
//! hold, 3 the simulated trajectory diverged.

pub mod commands;
pub mod document;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_HYPOTHESIS: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "matsync", version, about = "Synchronization of arrays of linear systems with matrix-weighted coupling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report which synchronization hypotheses a spec satisfies.
    Check(CheckArgs),
    /// Synthesize coupling gains with a named recipe.
    Gains(GainsArgs),
    /// Simulate the coupled array and write a trace.
    Simulate(SimulateArgs),
    /// Sweep the coupling coefficient and write the disagreement growth rate.
    Sweep(SweepArgs),
    /// Write a builtin example as a spec document (no name lists them).
    Example(ExampleArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Spec document (TOML).
    #[arg(long)]
    pub spec: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized searches and initial states.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Only this recipe's hypotheses decide the exit code.
    #[arg(long)]
    pub recipe: Option<String>,
}

#[derive(Debug, Args)]
pub struct GainsArgs {
    #[command(flatten)]
    pub common: Common,
    /// theorem1, alg1, alg2 or direct.
    #[arg(long)]
    pub recipe: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Proceed past failed hypotheses, recording them as warnings.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Gains document; otherwise `--recipe`, otherwise a builder's own coupling.
    #[arg(long)]
    pub gains: Option<PathBuf>,
    #[arg(long)]
    pub recipe: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub force: bool,
    /// Discrete-time coupling step; defaults to the document's, then `eps_bar`.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Final time (continuous) or number of steps (discrete).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// RK4 step size.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Initial state file of q·n numbers; seeded standard normal otherwise.
    #[arg(long)]
    pub x0: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.1)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    pub name: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the example's own gains, when it has them.
    #[arg(long)]
    pub gains_out: Option<PathBuf>,
}

/// Runs a parsed command line and returns the process exit code. Errors are
/// reported on standard error.
pub fn run(cli: Cli) -> u8 {
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            commands::exit_code_for(&err)
        }
    }
}
