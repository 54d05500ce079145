//! `hilfer`: batch experiment driver over the core library.
//!
//! Subcommands read a JSON config, write CSV (17 significant digits) and
//! print a one-line summary. Exit codes: 0 success, 2 validation error,
//! 3 numerical failure, 64 unknown subcommand.

mod config;
mod csv;
mod runner;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hilfer", version, about = "Hilfer fractional-evolution toolkit driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; stdout when omitted (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rayon thread count (overrides the config's `threads`).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate E_{alpha,beta}(z) on a uniform z range.
    MlfTable {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        zmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        zmax: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the forward problem and dump modal traces.
    SolveForward(ConfigArgs),
    /// Solve the backward dual problem and dump modal traces.
    SolveAdjoint(ConfigArgs),
    /// Duality identity residual over a time-grid refinement ladder.
    VerifyDuality(ConfigArgs),
    /// Fractional-calculus identity residuals over a refinement ladder.
    VerifyIdentities(ConfigArgs),
    /// Smallest singular value of the weighted observation operator.
    UcpSvd(ConfigArgs),
    /// Tikhonov control synthesis report over an eps path.
    Control(ConfigArgs),
}

/// Errors sorted by exit code.
pub enum AppError {
    /// Bad input: config parse failure or module invariant violation.
    Validation(String),
    /// A numerical routine failed.
    Numerical(String),
}

impl From<hilfer_core::Error> for AppError {
    fn from(e: hilfer_core::Error) -> Self {
        match e {
            hilfer_core::Error::InvalidInput { .. } => AppError::Validation(e.to_string()),
            other => AppError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Validation(format!("io: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::InvalidSubcommand | ErrorKind::UnknownArgument => 64,
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    e.print().ok();
                    return ExitCode::SUCCESS;
                }
                _ => 2,
            };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::MlfTable {
            alpha,
            beta,
            zmin,
            zmax,
            steps,
            out,
        } => runner::mlf_table(alpha, beta, zmin, zmax, steps, out.as_deref()),
        Command::SolveForward(a) => runner::with_config(&a, runner::solve_forward),
        Command::SolveAdjoint(a) => runner::with_config(&a, runner::solve_adjoint),
        Command::VerifyDuality(a) => runner::with_config(&a, runner::verify_duality),
        Command::VerifyIdentities(a) => runner::with_config(&a, runner::verify_identities),
        Command::UcpSvd(a) => runner::with_config(&a, runner::ucp_svd),
        Command::Control(a) => runner::with_config(&a, runner::control),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Numerical(msg)) => {
            eprintln!("numerical error: {msg}");
            ExitCode::from(3)
        }
    }
}
