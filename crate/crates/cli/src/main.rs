//! `driftlab`: classify advection profiles, predict and compute principal
//! eigenvalues, and run large-advection ladders.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use driftlab_core::lab::LabError;
use driftlab_core::limit::LimitError;
use driftlab_core::maxset::MaxsetError;
use driftlab_core::operator::OperatorError;
use driftlab_core::profile::ProfileError;
use driftlab_core::templates::TemplateError;
use driftlab_core::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Core(Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
}

macro_rules! via_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(Error::from(e))
            }
        }
    )*};
}
via_core!(ProfileError, TemplateError, MaxsetError, OperatorError, LabError, LimitError);

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "Usage",
            CliError::Read { .. } => "ReadFailed",
            CliError::Write { .. } => "WriteFailed",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_validation() => 3,
            CliError::Write { .. } => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "driftlab", version, about = "Principal eigenvalues under large advection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Builtin template, `name` or `name:p1,p2,...`.
    #[arg(long)]
    pub template: Option<String>,
    /// Profile JSON file.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Potential: `zero`, `const:v`, `poly:c0,c1,...` or a JSON file.
    #[arg(long = "c")]
    pub c: Option<String>,
    /// `robin:hbar1,ell1,hbar2,ell2`, `neumann`, `dirichlet` or `periodic`.
    #[arg(long, default_value = "neumann")]
    pub bc: String,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Fixed number of grid unknowns, overriding the policy.
    #[arg(long)]
    pub n: Option<usize>,
    /// Smallest grid the policy may choose.
    #[arg(long, default_value_t = 2000)]
    pub min_n: usize,
    /// Policy resolution factor multiplying `s * max|m'|`.
    #[arg(long, default_value_t = 16.0)]
    pub grid_factor: f64,
}

#[derive(Debug, Args)]
pub struct LadderArgs {
    /// `start,stop,count`.
    #[arg(long, default_value = "25,400,5")]
    pub ladder: String,
    /// Space the ladder linearly instead of geometrically.
    #[arg(long)]
    pub linear: bool,
    /// Mass interval `a,b`; repeatable.
    #[arg(long = "mass", value_name = "A,B")]
    pub mass: Vec<String>,
    /// Record measured wall time instead of 0.
    #[arg(long)]
    pub timing: bool,
    /// Output directory (defaults to $DRIFTLAB_OUT).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the max-set decomposition as JSON.
    Classify {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Print the predicted limit of the principal eigenvalue as JSON.
    Predict {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Sub-interval resolution per unit length.
        #[arg(long, default_value_t = driftlab_core::limit::DEFAULT_GRID_N)]
        grid_n: usize,
    },
    /// Compute the principal eigenvalue at one advection strength.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        s: f64,
        /// Write the eigenfunction as `x,w` CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Solve along a ladder of advection strengths and emit CSV.
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        ladder: LadderArgs,
    },
    /// Predict, sweep and estimate; emit a JSON verdict and plot data.
    Report {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        ladder: LadderArgs,
        /// Sub-interval resolution per unit length for the prediction.
        #[arg(long, default_value_t = driftlab_core::limit::DEFAULT_GRID_N)]
        grid_n: usize,
        /// Tolerance of the convergence check on the ladder tail.
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
    },
    /// List builtin templates.
    Templates,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Classify { problem } => commands::classify(&problem),
        Command::Predict { problem, grid_n } => commands::predict(&problem, grid_n),
        Command::Solve { problem, grid, s, dump } => commands::solve(&problem, &grid, s, dump.as_deref()),
        Command::Sweep { problem, grid, ladder } => commands::sweep(&problem, &grid, &ladder),
        Command::Report { problem, grid, ladder, grid_n, tol } => {
            commands::report(&problem, &grid, &ladder, grid_n, tol)
        }
        Command::Templates => commands::templates(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code())
        }
    }
}
