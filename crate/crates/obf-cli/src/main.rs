//! Experiment runner for the opportunistic-beamforming rate library:
//! Monte-Carlo and analytic rates, threshold optimization, certification
//! maps, and figure-data regeneration, all emitting CSV/JSON with
//! provenance headers.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Exit classes: usage/parse problems exit 2, numeric failures 3, property
/// or certification failures 4.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    Property(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Property(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) | CliError::Property(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}

impl From<obf_core::Error> for CliError {
    fn from(e: obf_core::Error) -> Self {
        use obf_core::Error::*;
        match e {
            Parse(_) | Domain(_) | Dimension(_) => CliError::Usage(e.to_string()),
            NonConvergence(_) | Bracket(_) | Indeterminate(_) => CliError::Runtime(e.to_string()),
            NotCertified(_) => CliError::Property(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "obf",
    version,
    about = "Sum-rate analysis of selective threshold feedback in opportunistic beamforming"
)]
struct Cli {
    /// Plain `key = value` file supplying defaults for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap the worker thread count; results are unaffected
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo and analytic rate, load, and outage for one model and policy
    Rate(commands::RateArgs),
    /// Exhaustive two-user threshold search at one budget
    Optimize(commands::OptimizeArgs),
    /// Optimality gap of the homogeneous point across SNR
    Gap(commands::GapArgs),
    /// Certification verdict map over a shape-parameter x SNR grid
    SchurMap(commands::SchurMapArgs),
    /// Rate ratio with and without thresholding per user count and budget
    Tradeoff(commands::TradeoffArgs),
    /// Regenerate the figure-data CSV set
    Figures(commands::FiguresArgs),
    /// Run the property suites
    Verify(commands::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let cfg = match config::Settings::load(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    let result = match cli.command {
        Command::Rate(args) => commands::rate(args, &cfg),
        Command::Optimize(args) => commands::optimize(args, &cfg),
        Command::Gap(args) => commands::gap(args, &cfg),
        Command::SchurMap(args) => commands::schur_map(args, &cfg),
        Command::Tradeoff(args) => commands::tradeoff(args, &cfg),
        Command::Figures(args) => commands::figures(args, &cfg),
        Command::Verify(args) => commands::verify(args, &cfg),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
