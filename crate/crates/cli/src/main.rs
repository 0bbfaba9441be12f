//! `illposed solve | verify | study`: runs the discrete regularization
//! experiments and writes CSV artifacts.
//!
//! Exit codes: 0 success, 1 a verified bound failed, 2 configuration or usage
//! error, 3 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::{CommonArgs, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<illposed::Error> for CliError {
    fn from(e: illposed::Error) -> Self {
        use illposed::Error::*;
        match e {
            InvalidParameter(_) | UnknownProblem(_) | RuleTooCoarse(_) | OutsideAsymptoticRegime(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "illposed",
    version,
    about = "Discrete regularization of ill-posed operator equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem; writes `summary.csv` and `solution_<n>.csv`.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write each assembled matrix as `matrix_<n>.csv`.
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Check every bound on the (possibly restricted) grid; writes `bounds.csv`.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Verify a single cell against a matrix dump instead of the assembled matrix.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Convergence table over the n list; writes `convergence.csv`.
    Study {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Solve { common, dump_matrix } => commands::solve(&RunConfig::resolve(&common)?, dump_matrix),
        Command::Verify { common, replay } => commands::verify(&RunConfig::resolve(&common)?, replay.as_deref()),
        Command::Study { common } => commands::study(&RunConfig::resolve(&common)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::BoundFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
