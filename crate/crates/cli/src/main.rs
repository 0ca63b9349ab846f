//! `fairsel` command-line experiment harness.
//!
//! Exit codes: 0 success, 2 configuration errors, 3 data errors,
//! 4 scorer-protocol errors, 1 anything else.

mod commands;
mod common;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "fairsel", version, about = "Fair-classification training, selection, and model export")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for grid cells and folds.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Shell command of an external scorer process.
    #[arg(long)]
    blackbox: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model with the refining loop and report metrics.
    Fit(RunArgs),
    /// Sweep a parameter grid with warm starts and optional cross-validation.
    Grid(RunArgs),
    /// Solve a standalone selection problem from a scores file.
    Select(RunArgs),
    /// Export an exact mixed-integer model for an external solver.
    ExportMicp(RunArgs),
    /// Compare the refining loop against the exhaustive oracle.
    OracleCheck(RunArgs),
    /// Generate the synthetic 2-D Gaussian benchmark.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the line-protocol scorer backed by the logistic trainer.
    Scorer {
        /// Training data CSV.
        #[arg(long)]
        data: PathBuf,
        /// Schema JSON for the data file.
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
    },
}

/// Failures carrying their process exit code.
pub enum CliError {
    Config(Vec<String>),
    Tool(fairsel::Error),
    Io(String),
}

impl From<fairsel::Error> for CliError {
    fn from(e: fairsel::Error) -> Self {
        CliError::Tool(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn exit_code(err: &CliError) -> u8 {
    use fairsel::Error::*;
    match err {
        CliError::Config(_) => 2,
        CliError::Io(_) => 1,
        CliError::Tool(e) => match e {
            MissingColumn(_) | NonNumericValue { .. } | UnseenCategory { .. } | Data(_) => 3,
            Protocol(_) | Timeout(_) | ScoreOutOfRange(_) => 4,
            _ => 1,
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => commands::fit::run(&args),
        Command::Grid(args) => commands::grid::run(&args),
        Command::Select(args) => commands::select::run(&args),
        Command::ExportMicp(args) => commands::export::run(&args),
        Command::OracleCheck(args) => commands::oracle_check::run(&args),
        Command::Synth { seed, out } => commands::synth::run(seed, &out),
        Command::Scorer { data, schema, lambda, iterations } => {
            commands::scorer::run(&data, &schema, lambda, iterations)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Config(errors) => {
                    eprintln!("configuration errors:");
                    for e in errors {
                        eprintln!("  - {e}");
                    }
                }
                CliError::Tool(e) => eprintln!("error: {e}"),
                CliError::Io(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
