//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_BUDGET_MB: usize = 1536;

#[derive(Debug, Parser)]
#[command(
    name = "polyharm",
    version,
    about = "Polyharmonic Dirichlet problems on the unit ball",
    args_override_self = true
)]
pub struct Cli {
    /// File of `key = value` lines supplying flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Grid cache directory (default: $POLYHARM_CACHE_DIR or ./.cache).
    #[arg(long, global = true, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Do not read or write the grid cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Seed of the sampling-based checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Memory kept for assembled operators, in MiB.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET_MB, value_name = "MIB")]
    pub budget_mb: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exponents α, β and the regime of (p, q).
    Regimes(Exponents),
    /// Exponent bootstrap trace.
    Bootstrap(BootstrapArgs),
    /// Green kernel values, lower-bound sampling and matrix dump.
    Green(GreenArgs),
    /// Solve (-Δ)^m u = f with Dirichlet data.
    Solve(SolveArgs),
    /// Principal eigenpair.
    Eigen(EigenArgs),
    /// Refinement study of an a priori estimate.
    Estimate(EstimateArgs),
    /// Cone-singular solutions of the system.
    Singular(SingularArgs),
    /// Full acceptance battery.
    Suite(SuiteArgs),
}

impl Command {
    pub const NAMES: [&'static str; 8] =
        ["regimes", "bootstrap", "green", "solve", "eigen", "estimate", "singular", "suite"];
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct Exponents {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub exponents: Exponents,
    /// Initial k as a fraction of (n+m)/(n-m).
    #[arg(long, default_value_t = 0.98)]
    pub initial_fraction: f64,
    /// Position of ρ in its admissible interval.
    #[arg(long, default_value_t = 0.5)]
    pub rho_position: f64,
    /// Position of 1/k1 in its admissible interval.
    #[arg(long, default_value_t = 0.1)]
    pub k1_position: f64,
    /// Position of 1/k2 in its admissible interval.
    #[arg(long, default_value_t = 0.5)]
    pub k2_position: f64,
    #[arg(long, default_value_t = 100)]
    pub max_rounds: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct GreenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Evaluate G(x, y); comma-separated coordinates.
    #[arg(long, requires = "y", allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, requires = "x", allow_hyphen_values = true)]
    pub y: Option<String>,
    /// Pairs at the coarsest sampling density (×4 per density).
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    /// Number of sampling densities.
    #[arg(long, default_value_t = 3)]
    pub densities: u32,
    /// Grid level of the dumped matrix.
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    /// Write the quadrature matrix of the grid at --level.
    #[arg(long, value_name = "PATH")]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SolveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// const, linear, gaussian, boundary_singular or interior_bump.
    #[arg(long, default_value = "const")]
    pub rhs: String,
    #[arg(long, default_value_t = 2)]
    pub level: u32,
    /// Radial grading exponent.
    #[arg(long, default_value_t = 2.0)]
    pub grading: f64,
    /// Write the solution field.
    #[arg(long, value_name = "PATH")]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct EigenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub level: u32,
    /// Relative change of λ at convergence.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Residual ‖Gφ - φ/λ‖∞ / ‖φ‖∞ at convergence.
    #[arg(long, default_value_t = 1e-6)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Write the eigenfunction.
    #[arg(long, value_name = "PATH")]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateKind {
    #[value(name = "prop21_1")]
    SupNorm,
    #[value(name = "prop21_2")]
    WeightedLpLq,
    #[value(name = "prop23")]
    HigherIntegrability,
    #[value(name = "lemma_propDS", alias = "lemma")]
    Lemma,
    Falsify,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct EstimateArgs {
    #[arg(long = "case", value_enum)]
    pub case: EstimateKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Data exponent; `inf` allowed.
    #[arg(long)]
    pub p: Option<f64>,
    /// Solution exponent; `inf` allowed.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated refinement levels.
    #[arg(long, default_value = "0,1,2")]
    pub levels: String,
    /// Comma-separated right-hand sides (default: the standard family).
    #[arg(long)]
    pub rhs: Option<String>,
    /// Allow falsification runs between the two hypotheses.
    #[arg(long)]
    pub exploratory: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SingularArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value = "0,1,2,3")]
    pub levels: String,
    /// Write u(r), v(r) along the cone axis on the finest level as CSV.
    #[arg(long, value_name = "PATH")]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub profile_points: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SuiteArgs {
    /// Refinement ladder (dimension 2 runs one level finer).
    #[arg(long, default_value = "0,1,2,3")]
    pub levels: String,
}
