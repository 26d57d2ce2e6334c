mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Convex hulls of planar Brownian motions and bridges: closed forms,
/// quadrature tables, Monte Carlo experiments and validation.
#[derive(Debug, Parser)]
#[command(
    name = "bmhull",
    version,
    arg_required_else_help = true,
    args_conflicts_with_subcommands = true
)]
struct Cli {
    /// Re-run the command recorded in a manifest file.
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print catalogued closed-form constants.
    Analytic(AnalyticArgs),
    /// Quadrature table of E[L] or E[A] for 1..=m motions and 1..=n bridges.
    Table(TableArgs),
    /// Monte Carlo estimate of a hull functional or the argmax-time law.
    Simulate(SimulateArgs),
    /// Dump a density on a grid as CSV.
    Density(DensityArgs),
    /// Run the validation checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AnalyticArgs {
    /// Constant names; all of them when omitted.
    pub names: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFunctional {
    Perimeter,
    Area,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TableArgs {
    /// Largest number of motions (1..=6).
    #[arg(long)]
    pub m: u32,
    /// Largest number of bridges (1..=6).
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum, default_value = "perimeter")]
    pub functional: TableFunctional,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Write the CSV here (and a manifest next to it) instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimFunctional {
    Perimeter,
    Area,
    /// Combined argmax time of the first coordinate.
    #[value(name = "density-of-t", alias = "density-of-T")]
    DensityOfT,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Number of planar Brownian motions.
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Number of planar Brownian bridges.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = bmhull::process_sim::DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = bmhull::montecarlo::DEFAULT_REPS)]
    pub reps: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "perimeter")]
    pub functional: SimFunctional,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Confidence level of the reported interval.
    #[arg(long, default_value_t = bmhull::montecarlo::DEFAULT_CI_LEVEL)]
    pub ci_level: f64,
    /// Write the JSON summary here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Write per-replicate values as CSV.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub samples_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Which {
    #[value(name = "T", alias = "t")]
    T,
    #[value(name = "M", alias = "m")]
    M,
    #[value(name = "joint")]
    #[serde(rename = "joint")]
    Joint,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    /// Grid points per axis.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Upper end of the level grid for `M` and `joint`.
    #[arg(long, default_value_t = 5.0)]
    pub x_max: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value = "fast")]
    pub level: Level,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Emit the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Perturb a catalogue constant before checking (harness self-test).
    #[arg(long, hide = true)]
    pub tamper: Option<String>,
    /// Override replicate counts of the Monte Carlo checks.
    #[arg(long, hide = true)]
    pub mc_reps: Option<u64>,
    #[arg(long, hide = true)]
    pub ks_reps: Option<u64>,
}

/// Failure classes mapped onto the exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl From<bmhull::Error> for CliError {
    fn from(e: bmhull::Error) -> Self {
        match e {
            bmhull::Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("I/O error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failure(format!("CSV error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failure(format!("JSON error: {e}"))
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analytic(a) => commands::analytic(&a),
        Command::Table(a) => commands::table(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Density(a) => commands::density(&a),
        Command::Validate(a) => commands::validate(&a),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match (cli.manifest, cli.command) {
        (Some(path), _) => {
            let argv = manifest::replay_argv(&path)?;
            let replayed = Cli::try_parse_from(argv).map_err(|e| {
                CliError::Usage(format!("manifest does not describe a valid run: {e}"))
            })?;
            match replayed.command {
                Some(c) => dispatch(c),
                None => Err(CliError::Usage("manifest names no command".into())),
            }
        }
        (None, Some(c)) => dispatch(c),
        (None, None) => Err(CliError::Usage("no command given".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
