//! The `hawklab` command-line front end.
//!
//! Every run writes deterministic JSON reports (and CSV tables where
//! relevant) into the output directory. Exit codes: 0 when every asserted
//! bound holds, 1 when a mathematical identity or bound fails, 2 for
//! configuration and parse errors, 3 when the mean-field sweep finds a
//! nonzero candidate.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use commands::{cmd_meanfield, cmd_profile, cmd_sht_check, cmd_spectrum, Outcome};
pub use config::{ConfigFile, MetricChoice, ProfileConfig, RunConfig, SpectrumSource};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IDENTITY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CANDIDATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hawklab", version, about = "Numerical checks for Hawking-mass rigidity")]
pub struct Cli {
    /// Harmonic band limit [default: 12].
    #[arg(long, global = true)]
    pub band_limit: Option<usize>,

    /// Seed of all random draws [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory [default: hawklab_out].
    #[arg(long, global = true, env = "HAWKLAB_OUT")]
    pub out: Option<PathBuf>,

    /// Factor applied to every acceptance tolerance [default: 1].
    #[arg(long, global = true)]
    pub tol_scale: Option<f64>,

    /// File of `key=value` lines; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spherical-harmonic product table, Hersch energies and orthonormality.
    ShtCheck,
    /// Local uniqueness sweep for the mean-field equation.
    Meanfield(MeanfieldArgs),
    /// Spectrum of `−Δ_g + K` on a conformal sphere.
    Spectrum(SpectrumArgs),
    /// Centered-sphere profile of a rotationally symmetric metric.
    Profile(ProfileArgs),
}

#[derive(Debug, Args, Default)]
pub struct MeanfieldArgs {
    /// Sup norm of the random starts [default: 0.05].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of random starts [default: 100].
    #[arg(long)]
    pub trials: Option<u64>,
    /// Number of random E₂ vectors for the projection identity [default: 1000].
    #[arg(long)]
    pub p2_draws: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct SpectrumArgs {
    /// `zero`, `random` or `file` [default: zero].
    #[arg(long)]
    pub u: Option<String>,
    /// Coefficient file (`l m value` lines) for `--u file`.
    #[arg(long)]
    pub u_file: Option<PathBuf>,
    /// Sup norm of a random `u` [default: 0.2].
    #[arg(long)]
    pub u_sup: Option<f64>,
    /// Number of lowest eigenvalues reported [default: 9].
    #[arg(long)]
    pub n_eigs: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct ProfileArgs {
    /// `flat`, `schwarzschild`, `hyperbolic`, `ads-schwarzschild` or
    /// `mass-profile` [default: flat].
    #[arg(long)]
    pub metric: Option<String>,
    /// Mass parameter `m` (or `m∞` for `mass-profile`) [default: 1].
    #[arg(long)]
    pub m: Option<f64>,
    /// Smoothing scale of `mass-profile` [default: 2m].
    #[arg(long)]
    pub a: Option<f64>,
    /// Hawking-mass mode, `flat` or `hyperbolic` [default: the metric's].
    #[arg(long)]
    pub mode: Option<String>,
    /// Number of profile samples [default: 200].
    #[arg(long)]
    pub points: Option<usize>,
    /// Smallest sampled area radius.
    #[arg(long)]
    pub r_lo: Option<f64>,
    /// Largest sampled area radius.
    #[arg(long)]
    pub r_hi: Option<f64>,
    /// Force (`true`) or skip (`false`) the small-volume limit; by default
    /// it runs on horizon-free metrics.
    #[arg(long)]
    pub small_volume: Option<bool>,
}

/// Exit code for an error that ended a command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Identity { .. }
        | Error::FormulaRegression { .. }
        | Error::Integration(_)
        | Error::LinearSolve(_)
        | Error::Assembly(_) => EXIT_IDENTITY,
        _ => EXIT_CONFIG,
    }
}

/// Parses the process arguments, runs the command and returns its exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    run(cli)
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> i32 {
    let result = RunConfig::resolve(&cli).and_then(|cfg| match &cli.command {
        Command::ShtCheck => cmd_sht_check(&cfg),
        Command::Meanfield(_) => cmd_meanfield(&cfg),
        Command::Spectrum(_) => cmd_spectrum(&cfg),
        Command::Profile(_) => cmd_profile(&cfg),
    });
    match result {
        Ok(outcome) => {
            for line in &outcome.messages {
                eprintln!("{line}");
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("hawklab: {e}");
            exit_code(&e)
        }
    }
}
