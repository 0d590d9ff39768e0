use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "pdm", version, about = "Position-dependent-mass oscillators: simulation, maps and invariant checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the catalog families and their parameters.
    ListModels {
        #[arg(long)]
        json: bool,
    },
    /// Integrate a model and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Report compatibility, quadrature and linearization residuals as JSON.
    TransformCheck(TransformCheckArgs),
    /// Run the invariant suite for one model.
    Verify(VerifyArgs),
    /// Measure the period over a range of one parameter.
    Sweep(SweepArgs),
    /// Tabulate x, q, q', f, g over an interval.
    MapTable(MapTableArgs),
}

/// Model selection: a family name and/or a JSON document, overridden by
/// individual parameter flags.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Family name (ml1, ml2, shifted-ml, quadratic, morse, isotonic, sho).
    pub family: Option<String>,
    /// Model JSON document, inline or as a file path.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Isotonic x-space frequency, used instead of --omega.
    #[arg(long = "Omega", allow_negative_numbers = true)]
    pub big_omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long = "A", allow_negative_numbers = true)]
    pub amplitude: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ToleranceArgs {
    /// Relative tolerance (default: $PDM_DEFAULT_TOL or 1e-10).
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    /// Initial position (default: closed-form x(0)).
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Initial velocity (default: closed-form ẋ(0)).
    #[arg(long, allow_negative_numbers = true)]
    pub xdot0: Option<f64>,
    /// End time; overrides --periods.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// End time in closed-form periods.
    #[arg(long, default_value_t = 1.0)]
    pub periods: f64,
    /// Number of uniformly spaced output rows.
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    /// Output spacing; overrides --samples.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformCheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Random points for the compatibility check.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[arg(long, default_value_t = 10.0)]
    pub periods: f64,
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    /// Parameter to vary.
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub hi: f64,
    #[arg(long, default_value_t = 11)]
    pub count: usize,
    /// Closed-form periods integrated per point.
    #[arg(long, default_value_t = 10.0)]
    pub periods: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MapTableArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Left end (default: sampling window of the map domain).
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub count: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
