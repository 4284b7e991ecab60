//! Command-line front end.
//!
//! Exit codes: 0 success, 1 output failure, 2 unreadable or invalid input,
//! 3 numerical failure, 4 no pure steady state (`certify`).

mod commands;
pub mod problem;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use problem::{Problem, ProblemFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Parse(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] crate::Error),
    #[error("no pure steady state")]
    NoCertificate,
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::NoCertificate => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "purestate", version, about = "Pure steady states of Lindblad and homodyne-feedback master equations")]
pub struct Cli {
    /// Certification tolerance for eigen-residuals.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Directory for JSON reports and CSV output.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Suppress the text summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the steady state and report purity, concurrence and uniqueness.
    Steady { problem: PathBuf },
    /// Search for a pure steady state (common eigenvector test).
    Certify { problem: PathBuf },
    /// Generate a feedback family member as a problem file plus certificate.
    #[command(subcommand)]
    Family(FamilyCommand),
    /// Run homodyne trajectories (or only the averaged equation when n_traj = 0).
    Simulate { problem: PathBuf },
    /// Check whether the first `d` basis states span a decoherence-free subspace.
    Dfs {
        problem: PathBuf,
        #[arg(long)]
        d: usize,
        /// Also require the coupling out of the subspace to vanish.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum FamilyCommand {
    /// Two-level atom with drive ασ_y and feedback λσ_y on the pure-state manifold.
    SingleAtom(SingleAtomArgs),
    /// Two qubits with collective measurement; Bell-state family or the J_x scheme.
    TwoQubit(TwoQubitArgs),
}

#[derive(Debug, Args)]
pub struct SingleAtomArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    /// Branch of λ: `+` or `-`.
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    pub sign: String,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct TwoQubitArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x3: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x4: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Use H = αJ_x, F = λJ_x instead of the Bell-state family.
    #[arg(long)]
    pub original: bool,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda: f64,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
