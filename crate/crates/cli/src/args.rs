use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "welander", version, about = "Simulation and bifurcation analysis of Welander's convection model")]
pub struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory.
    Simulate(SimulateArgs),
    /// Attractor type over a range of epsilon.
    Diagram(DiagramArgs),
    /// Check the homoclinic orbit at the upper border collision.
    Homoclinic(HomoclinicArgs),
    /// List pseudo-equilibria.
    Pseudo(PseudoArgs),
    /// Hopf and periodic-orbit saddle-node of the smoothed model.
    Smoothbif(SmoothbifArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Nonsmooth,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    EscapeUpper,
    EscapeLower,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub beta: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Model::Nonsmooth)]
    pub model: Model,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ModelArgs,
    /// Smoothing width, required for the smooth model.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    pub y0: f64,
    #[arg(long, default_value_t = 200.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 0.1)]
    pub max_step: f64,
    /// Direction taken on repelling sliding segments.
    #[arg(long, value_enum, default_value_t = Policy::EscapeUpper)]
    pub policy: Policy,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Event log in JSON lines (default: `<output>.events.jsonl`).
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagramArgs {
    /// Epsilon range as `LO HI`.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-0.1, 0.25])]
    pub range: Vec<f64>,
    /// Number of grid points, at least 2.
    #[arg(long, default_value_t = 71)]
    pub n: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HomoclinicArgs {
    /// Launch offset below the boundary equilibrium.
    #[arg(long, default_value_t = 1e-8)]
    pub delta: f64,
    /// Return tolerance.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Also build the sliding family for these slide times.
    #[arg(long, num_args = 1..)]
    pub slide_times: Vec<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PseudoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ModelArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SmoothbifArgs {
    /// Smoothing widths, in decreasing order.
    #[arg(long, num_args = 1.., required = true)]
    pub a: Vec<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
