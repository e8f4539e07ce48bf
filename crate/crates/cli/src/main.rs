//! Experiment runner for the frequency-guided composition sandbox.
//!
//! Four subcommands: `compose` runs a sampler and writes the image plus
//! weight, energy, and error tables; `freq-analysis` tracks band energy
//! along a trajectory; `verify` runs the invariant checks and the
//! localized-pair interference report; `jacobian` prints per-band encoder
//! gains. Exit codes: 0 ok, 2 config error, 3 numeric or io failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CmdError;

#[derive(Parser)]
#[command(name = "multlfg", version, about = "Subband-guided multi-concept composition sandbox")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a composition experiment; write final.pgm, weights.csv,
    /// energy.csv, and errors.csv.
    Compose(RunArgs),
    /// Run a trajectory and report how band energy fractions move with
    /// the timestep; write energy.csv and trend.csv.
    FreqAnalysis(RunArgs),
    /// Run the invariant check table and the 1000-pair interference
    /// report; write lemma1.csv.
    Verify(RunArgs),
    /// Assemble the encoder in band coordinates and report per-band
    /// gains; write jacobian.csv.
    Jacobian(RunArgs),
}

/// Flags shared by every subcommand. Each one mirrors a config-file key
/// and overrides the file value.
#[derive(Args, Debug)]
pub struct RunArgs {
    /// Config file with flat `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Run seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Sampler: multlfg, composite, or switch.
    #[arg(long)]
    pub method: Option<String>,

    /// Concept count; defaults cycle blob, checker, stripes.
    #[arg(long)]
    pub n: Option<usize>,

    /// Concepts kept per band by the top-k softmax (clamped to n).
    #[arg(long)]
    pub k: Option<usize>,

    /// Denoising steps.
    #[arg(long)]
    pub steps: Option<usize>,

    /// Guidance scale.
    #[arg(long)]
    pub scale: Option<f64>,

    /// Per-band guidance scales as LL,LH,HL,HH.
    #[arg(long)]
    pub band_scales: Option<String>,

    /// Area threshold for the relevance scores.
    #[arg(long)]
    pub tau: Option<f64>,

    /// Finite-difference step for the image-to-latent score transfer.
    #[arg(long)]
    pub eps_fd: Option<f64>,

    /// Latent codec: identity or downsample.
    #[arg(long)]
    pub codec: Option<String>,

    /// Use the noise-free scheduler update.
    #[arg(long)]
    pub deterministic: bool,

    /// Replace the adaptive weights with flat 1/n weights.
    #[arg(long)]
    pub uniform_weights: bool,

    /// Force every band scale to the spatial guidance scale.
    #[arg(long)]
    pub equal_scales: bool,

    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compose(args) => commands::cmd_compose(args),
        Command::FreqAnalysis(args) => commands::cmd_freq_analysis(args),
        Command::Verify(args) => commands::cmd_verify(args),
        Command::Jacobian(args) => commands::cmd_jacobian(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
