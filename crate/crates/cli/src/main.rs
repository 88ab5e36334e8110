//! `lmgd`: fixed points, bifurcations, trajectories and phase portraits of
//! the mean-field two-species condensate model, written as CSV or JSON.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod output;

use output::Format;

#[derive(Parser)]
#[command(name = "lmgd", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// The three dimensionless model parameters.
#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct ModelArgs {
    /// Detuning over the field-ensemble coupling (Delta)
    #[arg(long, allow_negative_numbers = true)]
    pub delta: f64,
    /// Intra-ensemble over field-ensemble coupling (Lambda, not the physical lambda)
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_ratio: f64,
    /// Excitation ratio k = 2N/N_q
    #[arg(long, allow_negative_numbers = true)]
    pub k: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutputArgs {
    /// Output format; classify defaults to json, everything else to csv
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Directory receiving the data files and manifest.json
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IntegrationArgs {
    /// Final dimensionless time
    #[arg(long, default_value_t = 100.0)]
    pub tau_max: f64,
    /// Spacing of recorded samples
    #[arg(long, default_value_t = 0.05)]
    pub stride: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FixedPointsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CriticalArgs {
    /// One or more coupling ratios, each > 0
    #[arg(long, required = true, num_args = 1.., allow_negative_numbers = true)]
    pub lambda_ratio: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_ratio: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Initial population imbalance
    #[arg(long, allow_negative_numbers = true)]
    pub z0: f64,
    /// Initial relative phase
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    #[command(flatten)]
    pub integration: IntegrationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PortraitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Initial phase shared by the surveyed trajectories
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    /// Number of evenly spread initial populations
    #[arg(long, default_value_t = 41)]
    pub samples: usize,
    /// Extra initial populations, skipped when not admissible
    #[arg(long, num_args = 0.., value_delimiter = ',', allow_negative_numbers = true,
          default_values_t = [0.9, 0.5, -0.5, -0.9])]
    pub highlight: Vec<f64>,
    /// Landscape nodes along the phase axis
    #[arg(long, default_value_t = 181)]
    pub landscape_phi: usize,
    /// Landscape nodes along the population axis
    #[arg(long, default_value_t = 201)]
    pub landscape_z: usize,
    #[command(flatten)]
    pub integration: IntegrationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    K,
    LambdaRatio,
    Delta,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BifurcationArgs {
    /// Required unless it is the swept parameter
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Required unless it is the swept parameter
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_ratio: Option<f64>,
    /// Required unless it is the swept parameter
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long, value_enum)]
    pub sweep: SweepParam,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SurfaceArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub k: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_to: f64,
    #[arg(long, default_value_t = 41)]
    pub delta_steps: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_to: f64,
    #[arg(long, default_value_t = 41)]
    pub lambda_steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TransitionArgs {
    #[arg(long)]
    pub lambda_from: f64,
    #[arg(long)]
    pub lambda_to: f64,
    #[arg(long, default_value_t = 10)]
    pub lambda_steps: usize,
    #[arg(long, default_value_t = 0.01)]
    pub k_from: f64,
    #[arg(long, default_value_t = 20.0)]
    pub k_to: f64,
    #[arg(long, default_value_t = 200)]
    pub k_steps: usize,
    /// Space both axes geometrically instead of linearly
    #[arg(long)]
    pub log: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary points on the phi = 0 and phi = pi branches
    FixedPoints(FixedPointsArgs),
    /// On-resonance critical population and fold window k_c-, k_c+
    Critical(CriticalArgs),
    /// Bounds z-, z+ of the excluded population band
    Bounds(BoundsArgs),
    /// One trajectory of the mean-field flow
    Trajectory(TrajectoryArgs),
    /// Trajectory survey, landscape, fixed points and separatrix
    Portrait(PortraitArgs),
    /// Fixed points along a parameter sweep
    Bifurcation(BifurcationArgs),
    /// Rabi or Josephson regime of one parameter set
    Classify(ClassifyArgs),
    /// Fixed-point counts over a (delta, lambda_ratio) grid
    Surface(SurfaceArgs),
    /// Fold windows against fixed-point counts over lambda_ratio and k
    Transition(TransitionArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::FixedPoints(a) => commands::fixed_points(&a),
        Command::Critical(a) => commands::critical(&a),
        Command::Bounds(a) => commands::bounds(&a),
        Command::Trajectory(a) => commands::trajectory(&a),
        Command::Portrait(a) => commands::portrait(&a),
        Command::Bifurcation(a) => commands::bifurcation(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Surface(a) => commands::surface(&a),
        Command::Transition(a) => commands::transition(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
