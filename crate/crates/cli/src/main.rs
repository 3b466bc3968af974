//! `trefree`: verification suites and training runs for trust-region-free
//! policy optimization.
//!
//! Exit codes are a stable contract: 0 = success, 1 = a property or run
//! failure, 2 = usage error.

mod checkpoint;
mod commands;
mod config;
mod report;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Bad flags or config values; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(String);

impl UsageError {
    pub fn new(msg: impl Into<String>) -> anyhow::Error {
        anyhow::Error::new(UsageError(msg.into()))
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(
    name = "trefree",
    version,
    about = "Trust-region-free policy optimization: bound verification and desk-scale training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Machine-verify the improvement bounds on randomized tabular MDPs
    VerifyBounds(commands::verify::VerifyArgs),
    /// Train a policy with one of pg|ppo|ratio-cons|trefree|trpo
    Train(commands::train::TrainArgs),
    /// Check every loss family's gradient against finite differences
    GradCheck(commands::gradcheck::GradArgs),
    /// Run several objectives on shared seeds and tabulate the results
    Compare(commands::compare::CompareArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::VerifyBounds(args) => commands::verify::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::GradCheck(args) => commands::gradcheck::run(args),
        Command::Compare(args) => commands::compare::run(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) if err.is::<UsageError>() => {
            eprintln!("usage error: {err}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
