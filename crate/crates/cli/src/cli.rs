use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Higher-order expansions for the location maximum likelihood estimator.
#[derive(Debug, Parser)]
#[command(name = "mlexp", version, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fisher information, likelihood-derivative means a1..a6 and eta2..eta10 (CSV or JSON).
    Moments(MomentsArgs),
    /// Edgeworth approximations of the standardized MLE distribution on a grid (CSV).
    Cdf(CdfArgs),
    /// Cornish-Fisher quantiles of the standardized MLE on a probability grid (CSV).
    Quantile(QuantileArgs),
    /// Location MLE of a data set or of a simulated sample (JSON).
    Mle(MleArgs),
    /// Monte Carlo comparison of the expansions with simulated MLEs (writes a directory).
    Simulate(SimulateArgs),
    /// Numerical checks of a family: normalization, derivatives, regularity conditions (JSON).
    Validate(ValidateArgs),
    /// Coefficient tables from computed moments; fails unless every correction vanishes (CSV).
    CollapseCheck(CollapseArgs),
    /// Residual of the Edgeworth / Cornish-Fisher composition and its decay in n (JSON).
    ComposeCheck(ComposeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Density family: normal, logistic, student-t, expression, tabulated [default: normal]
    #[arg(long)]
    pub family: Option<String>,
    /// Family parameter as KEY=VALUE; repeatable (nu=5, expr=..., table=path.csv, loc=1.5)
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Significant digits of numeric output
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=17))]
    pub precision: u32,
    /// Write outputs and a manifest.json into this directory instead of stdout
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Replay the settings recorded in a manifest.json; other settings are ignored
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Worker threads (1 = sequential) [default: one per core]
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Absolute quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Print JSON instead of CSV (with --out-dir both are written)
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CdfArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Sample size
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Highest expansion order (1..=5); columns for orders 1..=ORDER are written
    #[arg(long, default_value_t = 5)]
    pub order: u8,
    /// Points x of the standardized scale: START:STOP:STEP or a comma list
    #[arg(long, default_value = "-4:4:0.1", allow_hyphen_values = true)]
    pub grid: String,
    /// Clamp approximations to [0, 1]; out_of_range_flag still reports the raw values
    #[arg(long)]
    pub clamp_cdf: bool,
    /// Absolute quadrature tolerance for the moments
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QuantileArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Sample size
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Highest expansion order (1..=5)
    #[arg(long, default_value_t = 5)]
    pub order: u8,
    /// Probabilities in (0, 1): START:STOP:STEP or a comma list
    #[arg(long, default_value = "0.05:0.95:0.05")]
    pub grid: String,
    /// Absolute quadrature tolerance for the moments
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MleArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Data file of numbers separated by whitespace or commas ("-" for stdin)
    #[arg(long, value_name = "FILE", conflicts_with_all = ["n", "seed", "theta"])]
    pub data: Option<PathBuf>,
    /// Size of a simulated sample, used when --data is absent
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed of the simulated sample
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// True location of the simulated sample
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Stop once the mean score is below this in absolute value
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// TOML study configuration; flags given explicitly override its entries
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Sample sizes, comma separated [default: 25,50,100,200,400]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Replications per sample size [default: 10000]
    #[arg(long)]
    pub reps: Option<usize>,
    /// Base seed; replicate r uses base_seed XOR r [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Highest expansion order compared (1..=5) [default: 5]
    #[arg(long)]
    pub order: Option<u8>,
    /// ECDF evaluation grid: START:STOP:STEP or a comma list [default: -4:4:0.01]
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// MLE solver tolerance on the mean score [default: 1e-12]
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Absolute quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CollapseArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Absolute quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Largest |coefficient| accepted as zero
    #[arg(long, default_value_t = 1e-8)]
    pub threshold: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ComposeArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Smallest sample size; the check uses n, 2n, 4n, 8n, 16n
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Highest expansion order (1..=5)
    #[arg(long, default_value_t = 5)]
    pub order: u8,
    /// Probabilities v in (0, 1): START:STOP:STEP or a comma list
    #[arg(long, default_value = "0.05:0.95:0.05")]
    pub grid: String,
    /// Absolute quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
