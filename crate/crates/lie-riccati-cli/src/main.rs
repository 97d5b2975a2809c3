//! Command-line front end for the lie-riccati library: solve Riccati
//! equations through group factorizations, superpose particular solutions,
//! reduce second-order linear equations, scan the oscillator spectrum, and
//! run the invariant suites.
//!
//! Exit codes: 0 success, 1 configuration/parse error, 2 integration or
//! runtime failure, 3 verify-suite property failure.  Identical
//! configurations produce byte-identical output files; floats are printed
//! with 17 significant digits so every CSV round-trips losslessly.

mod commands;
mod emit;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// A classified command failure: `code` follows the exit-code contract.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    /// Configuration problem (bad flag value, unreadable spec): exit 1.
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    /// Runtime problem (integration failure, file write error): exit 2.
    pub fn run(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lie-riccati",
    version,
    about = "Riccati equations through SL(2,R): solve, superpose, reduce, spectrum, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a Riccati equation in factorization coordinates and report
    /// the trajectory from a given initial value.
    Solve(SolveArgs),
    /// Combine three particular solutions into a fourth through the
    /// superposition rule.
    Superpose(SuperposeArgs),
    /// Integrate a second-order linear equation and project it onto its
    /// Riccati equation via the logarithmic derivative.
    Reduce(ReduceArgs),
    /// Scan an interval for harmonic-oscillator eigenvalues by projective
    /// shooting.
    Spectrum(SpectrumArgs),
    /// Run the invariant suites and report measured residuals.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct SolveArgs {
    /// Coefficient a0: `const:<v>`, `poly:<c0>,<c1>,...`, or `table:<path.csv>`
    #[arg(long)]
    a0: String,
    /// Coefficient a1 (same mini-language as --a0)
    #[arg(long)]
    a1: String,
    /// Coefficient a2 (same mini-language as --a0)
    #[arg(long)]
    a2: String,
    /// Initial value: a float, or `inf`
    #[arg(long)]
    x0: String,
    /// Time grid `start:stop:nodes`
    #[arg(long)]
    t: String,
    /// Factorization ordering I..VI, or `all`
    #[arg(long, default_value = "all")]
    ordering: String,
    /// Integration tolerance (overrides LIE_RICCATI_TOL and the default)
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for output files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
pub struct SuperposeArgs {
    /// Coefficient a0: `const:<v>`, `poly:<c0>,<c1>,...`, or `table:<path.csv>`
    #[arg(long)]
    a0: String,
    /// Coefficient a1 (same mini-language as --a0)
    #[arg(long)]
    a1: String,
    /// Coefficient a2 (same mini-language as --a0)
    #[arg(long)]
    a2: String,
    /// Time grid `start:stop:nodes`
    #[arg(long)]
    t: String,
    /// Superposition constant: a float, or `inf`
    #[arg(long)]
    k: String,
    /// Initial value of the first particular solution
    #[arg(long, default_value = "inf")]
    x1: String,
    /// Initial value of the second particular solution
    #[arg(long, default_value = "0")]
    x2: String,
    /// Initial value of the third particular solution
    #[arg(long, default_value = "1")]
    x3: String,
    /// Integration tolerance (overrides LIE_RICCATI_TOL and the default)
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for output files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
pub struct ReduceArgs {
    /// Damping coefficient b of u'' + b u' + c u = 0 (coefficient mini-language)
    #[arg(long)]
    b: String,
    /// Restoring coefficient c of u'' + b u' + c u = 0
    #[arg(long)]
    c: String,
    /// Initial value u(t0)
    #[arg(long)]
    u0: f64,
    /// Initial derivative u'(t0)
    #[arg(long)]
    du0: f64,
    /// Time grid `start:stop:nodes`
    #[arg(long)]
    t: String,
    /// Integration tolerance (overrides LIE_RICCATI_TOL and the default)
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for output files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
pub struct SpectrumArgs {
    /// Eigenvalue scan interval `lo,hi`
    #[arg(long)]
    lambda_range: String,
    /// Shooting cutoff in the spatial variable
    #[arg(long, default_value_t = 8.0)]
    xi_max: f64,
    /// Bisection tolerance (overrides LIE_RICCATI_TOL and the default 1e-8)
    #[arg(long)]
    tol: Option<f64>,
    /// Also write one eigenfunction CSV per eigenvalue found
    #[arg(long)]
    emit_eigenfunction: bool,
    /// Directory for output files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Property to check: all, wnrel, cross-ratio, annihilation, hermite
    #[arg(long, default_value = "all")]
    property: String,
    /// Restrict wnrel to one ordering I..VI (default: all six)
    #[arg(long)]
    ordering: Option<String>,
    /// Restrict to one built-in system: tan, poly (default: both)
    #[arg(long)]
    system: Option<String>,
    /// Integration tolerance (overrides LIE_RICCATI_TOL and the default)
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for output files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outcomes; everything else is
            // a configuration error (exit 1 per the contract, not clap's
            // default 2).
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                ExitCode::SUCCESS
            } else {
                eprint!("{e}");
                ExitCode::from(1)
            };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => commands::solve(args),
        Command::Superpose(args) => commands::superpose(args),
        Command::Reduce(args) => commands::reduce(args),
        Command::Spectrum(args) => commands::spectrum(args),
        Command::Verify(args) => commands::verify(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
