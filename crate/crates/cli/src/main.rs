//! `rdae`: data generation, training, gradient checks, energy maps,
//! rate-distortion curves and basis export.
//!
//! Exit codes: 0 success, 1 check failure, 2 numerical abort, 64 usage.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdae::Error;

mod commands;
mod manifest;
mod train;

pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "rdae", version, about = "Rate-distortion auto-encoders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a synthetic data set to CSV.
    GenData(GenDataArgs),
    /// Train an auto-encoder and write checkpoint, history and manifest.
    Train(Box<train::TrainArgs>),
    /// Compare analytic Lagrangian gradients with central differences.
    GradCheck(GradCheckArgs),
    /// Evaluate |x - f(x)|^2 over a 2-D grid.
    EnergyMap(EnergyMapArgs),
    /// Water-filling rate-distortion curve of a parallel Gaussian source.
    RdCurve(RdCurveArgs),
    /// Render encoder rows or decoder columns as a PGM tile grid.
    ExportBases(ExportBasesArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Preset: gauss2d, gmm3 or blobs.
    #[arg(required_unless_present = "spec")]
    pub preset: Option<String>,
    /// TOML file with either `mean`/`covariance` or `components`/`weights`.
    #[arg(long, conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradCheckArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 3)]
    pub units: usize,
    /// An activation name, or `all`.
    #[arg(long, default_value = "logsig")]
    pub activation: String,
    /// Comma-separated list of distortion multipliers.
    #[arg(long, default_value = "0.5", value_delimiter = ',')]
    pub mu: Vec<f64>,
    /// Comma-separated list of entropy orders.
    #[arg(long, default_value = "1.01", value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Kernel size used for both Gram matrices.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub h: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Test hook: corrupt one analytic gradient entry before comparing.
    #[arg(long)]
    pub perturb: bool,
}

#[derive(Debug, Args)]
pub struct EnergyMapArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// x0,x1,y0,y1,steps
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Samples whose mean energy is compared with the grid mean in a footer line.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RdCurveArgs {
    /// Component variances, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub variances: Vec<f64>,
    /// lo,hi,steps
    #[arg(long, allow_hyphen_values = true)]
    pub d_grid: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportBasesArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// `analysis` (rows of W) or `synthesis` (columns of A).
    #[arg(long, default_value = "analysis")]
    pub which: String,
    /// Tile size as HxW.
    #[arg(long, default_value = "28x28")]
    pub tile: String,
    /// Tiles per row.
    #[arg(long, default_value_t = 10)]
    pub cols: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Ok,
    CheckFailed,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NonFinite { .. } | Error::Numerical(_) | Error::Internal(_) => EXIT_NUMERICAL,
        Error::Usage(_) | Error::Format(_) | Error::Io { .. } => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::GenData(a) => commands::gen_data(&a),
        Command::Train(a) => train::run(&a),
        Command::GradCheck(a) => commands::grad_check(&a),
        Command::EnergyMap(a) => commands::energy_map(&a),
        Command::RdCurve(a) => commands::rd_curve(&a),
        Command::ExportBases(a) => commands::export_bases(&a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("rdae: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
