//! `ncx2`: evaluate, classify and locate modes of noncentral chi-squared
//! densities from the command line.

mod commands;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::output::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] ncx2::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
    #[error("cannot encode output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot encode output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Library(e) if !e.is_numerical() => 2,
            CliError::Library(_) => 3,
            CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ncx2",
    version,
    about = "Noncentral chi-squared density, shape and modes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Density, log-density and its first two derivatives at one point or on a grid.
    Eval(EvalArgs),
    /// Shape classification: log-concavity, decreasing, bimodal.
    Classify(PointArgs),
    /// Critical noncentrality separating decreasing from bimodal densities.
    CriticalTable(TableArgs),
    /// Interior mode, antimode, inflection point and mode bounds.
    Modes(PointArgs),
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Degrees of freedom, > 0.
    #[arg(long, allow_negative_numbers = true)]
    nu: f64,
    /// Noncentrality, >= 0.
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Single evaluation point.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["x_min", "x_max", "points", "spacing"])]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["x_max", "points"], required_unless_present = "x")]
    x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["x_min", "points"])]
    x_max: Option<f64>,
    #[arg(long, requires_all = ["x_min", "x_max"])]
    points: Option<usize>,
    #[arg(long, value_enum, default_value = "linear")]
    spacing: commands::SpacingArg,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Tolerance for the critical noncentrality and mode positions.
    #[arg(long, default_value_t = commands::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Comma-separated degrees of freedom in (0, 2).
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true,
          conflicts_with_all = ["nu_min", "nu_max", "steps"])]
    nu: Vec<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["nu_max", "steps"])]
    nu_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["nu_min", "steps"])]
    nu_max: Option<f64>,
    #[arg(long, requires_all = ["nu_min", "nu_max"])]
    steps: Option<usize>,
    #[arg(long, default_value_t = commands::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn run(cli: Cli, out: &mut impl Write) -> Result<(), CliError> {
    match cli.command {
        Command::Eval(a) => {
            let grid = match (a.x, a.x_min, a.x_max, a.points) {
                (Some(x), ..) => commands::EvalPoints::Single(x),
                (None, Some(lo), Some(hi), Some(n)) => commands::EvalPoints::Grid {
                    lo,
                    hi,
                    points: n,
                    spacing: a.spacing,
                },
                _ => {
                    return Err(CliError::Usage(
                        "give --x or --x-min/--x-max/--points".into(),
                    ))
                }
            };
            commands::eval(out, a.format, a.params.nu, a.params.lambda, grid)
        }
        Command::Classify(a) => {
            commands::classify(out, a.format, a.params.nu, a.params.lambda, a.tol)
        }
        Command::Modes(a) => commands::modes(out, a.format, a.params.nu, a.params.lambda, a.tol),
        Command::CriticalTable(a) => {
            let nus = match (a.nu_min, a.nu_max, a.steps) {
                (Some(lo), Some(hi), Some(steps)) => commands::nu_range(lo, hi, steps)?,
                _ if a.nu.is_empty() => commands::TABLE_NUS.to_vec(),
                _ => a.nu,
            };
            commands::critical_table(out, a.format, &nus, a.tol)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ncx2: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
