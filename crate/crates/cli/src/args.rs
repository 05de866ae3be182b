//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "lft", version, about = "Legendre-Fenchel transforms of deformed convex functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate F* on a dual grid.
    Conjugate(ConjugateArgs),
    /// Tabulate F_P on a grid.
    Deform(DeformArgs),
    /// Print P⋄ for the given parameters.
    Diamond(DiamondArgs),
    /// Run a verification suite and report PASS/FAIL.
    Verify(VerifyArgs),
    /// Bregman and Fenchel-Young divergences at one point or a CSV batch.
    Divergence(DivergenceArgs),
    /// Plot-ready curves for F, F* and the subgradients of F.
    Plotdata(PlotdataArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineName {
    Closed,
    Newton,
    GridBrute,
    GridFast,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Theorem,
    Involution,
    Convexity,
    ClosedForms,
    Oracle,
    Biconjugate,
    ReverseOrder,
    Gradients,
    Divergence,
    Subdifferential,
    LegendreType,
}

/// Flags shared by every verb.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON file with `tolerances` and `aliases`; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; each verb has its own default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// A parameter tuple given literally or drawn at random.
#[derive(Args, Debug, Clone)]
pub struct ParamsArgs {
    /// Parameters as JSON `{"lambda":..,"A":[[..]],"b":[..],"c":[..],"d":..}`.
    #[arg(long = "P", conflicts_with = "p_random")]
    pub p: Option<String>,
    /// Number of seeded random parameter tuples.
    #[arg(long = "P-random")]
    pub p_random: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ConjugateArgs {
    /// Catalog spec such as `exp` or `power-norm{p=3}`, or a config alias.
    #[arg(long = "fn")]
    pub function: String,
    /// Primal sampling grid `lo:hi:n[,lo:hi:n]`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Dual grid; defaults to the slope range of the primal samples.
    #[arg(long, allow_hyphen_values = true)]
    pub dual_grid: Option<String>,
    /// Defaults to `closed` when a rule exists and `grid-fast` otherwise.
    #[arg(long, value_enum)]
    pub engine: Option<EngineName>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct DeformArgs {
    #[arg(long = "fn")]
    pub function: String,
    #[command(flatten)]
    pub params: ParamsArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct DiamondArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    /// Dimension of random parameters.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Function under test for `theorem` and `legendre-type`.
    #[arg(long = "fn")]
    pub function: Option<String>,
    #[command(flatten)]
    pub params: ParamsArgs,
    #[arg(long, value_enum)]
    pub engine: Option<EngineName>,
    /// Window for the grid engines.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Overrides the suite's main tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Probe points per parameter tuple for `theorem`.
    #[arg(long, default_value_t = 41)]
    pub probes: usize,
    /// Also check the identity at P⋄.
    #[arg(long)]
    pub both_readings: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct DivergenceArgs {
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, value_enum)]
    pub engine: Option<EngineName>,
    /// Window for the grid engines.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Primal point θ, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required_unless_present = "batch")]
    pub theta: Vec<f64>,
    /// Dual point η′, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required_unless_present = "batch")]
    pub eta: Vec<f64>,
    /// CSV with columns theta0[,theta1],eta0[,eta1].
    #[arg(long, conflicts_with_all = ["theta", "eta"])]
    pub batch: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct PlotdataArgs {
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub dual_grid: Option<String>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineName>,
    #[arg(long)]
    pub with_conjugate: bool,
    #[arg(long)]
    pub with_subgradients: bool,
    /// Finite-difference step for the subgradients.
    #[arg(long, default_value_t = 1e-6)]
    pub step: f64,
    #[command(flatten)]
    pub common: Common,
}
