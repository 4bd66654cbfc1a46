//! The `phaseloc` command-line front end.
//!
//! Every command validates its inputs and computes all outputs in memory
//! before writing them, so a failing command leaves no files behind. Exit
//! codes: 0 on success, 2 on validation errors, 3 on numeric failures.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{DecayConfig, GridOverrides, MinimizerConfig, RunConfig};

use crate::error::Result;
use crate::io::OutputSet;

#[derive(Debug, Parser)]
#[command(
    name = "phaseloc",
    version,
    about = "Localization and uncertainty of generalized wavelet transforms"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created when missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed of every random choice, overriding the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a signal: `V_f[s]` on the phase grid.
    Analyze {
        /// Signal CSV, overriding `signal` in the configuration.
        #[arg(long)]
        signal: Option<PathBuf>,
    },
    /// Synthesize a signal from a phase-function CSV or a sparse JSON array.
    Synthesize {
        /// Input file, overriding `phase` in the configuration.
        #[arg(long)]
        phase: Option<PathBuf>,
    },
    /// Global uncertainty report of the window.
    Uncertainty,
    /// Minimize the uncertainty functional over unit-norm windows.
    Optimize,
    /// Moments of the asymptotic minimizer family of the 1D wavelet transform.
    VerifyMinimizer,
    /// Chebyshev decay bound of the ambiguity function over the phase grid.
    Decay,
    /// Ambiguity function `V_f[f]` of the window.
    Ambiguity,
    /// Matching-pursuit recovery with the optimized window and the flat window.
    MpBench,
}

/// Runs one command and returns the files it would write.
pub fn execute(cli: &Cli) -> Result<OutputSet> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    }
    .with_seed(cli.seed);
    match &cli.command {
        Command::Analyze { signal } => commands::analyze(&cfg, signal.as_deref()),
        Command::Synthesize { phase } => commands::synthesize(&cfg, phase.as_deref()),
        Command::Uncertainty => commands::uncertainty(&cfg),
        Command::Optimize => commands::optimize(&cfg),
        Command::VerifyMinimizer => commands::verify_minimizer(&cfg),
        Command::Decay => commands::decay(&cfg),
        Command::Ambiguity => commands::ambiguity(&cfg),
        Command::MpBench => commands::mp_bench(&cfg),
    }
}

/// Parses arguments, runs the command, writes its outputs and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli).and_then(|out| out.commit(&cli.out)) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
