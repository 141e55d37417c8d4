use std::path::PathBuf;

use betamix::{ConstraintSpec, Dataset, InitMode};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::contaminate::Contamination;
use crate::error::CliError;

/// Default multiplier of the scaled eigenvalue floor.
pub const DEFAULT_C1_SCALE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "betamix", version, about = "Robust MVN mixture fits by pseudo beta-likelihood")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Robust fit maximising the pseudo beta-likelihood.
    Fit(FitArgs),
    /// Maximum-likelihood EM baseline under the same constraints.
    FitMle(FitArgs),
    /// Checks the lower bound on the largest mixing weight.
    CheckAssumption(AssumptionArgs),
    /// Error of the robust fit against the population maximiser over a grid of sample sizes.
    Consistency(ConsistencyArgs),
    /// Fits both estimators with and without contaminants and reports how far each moves.
    Contaminate(FitArgs),
    /// Randomised check of the determinant, Mahalanobis and integral inequalities.
    InequalitySuite(SuiteArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    RandomRows,
    MedianMad,
}

impl From<InitArg> for InitMode {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::RandomRows => InitMode::RandomRows,
            InitArg::MedianMad => InitMode::MedianMad,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ConstraintArgs {
    /// Eigenvalue-ratio bound.
    #[arg(long, default_value_t = 50.0)]
    pub c: f64,
    /// Eigenvalue floor; absolute unless --c1-scaled is given.
    #[arg(long)]
    pub c1: Option<f64>,
    /// Read --c1 as a multiplier of trace(pooled covariance)/p (default 1e-6).
    #[arg(long)]
    pub c1_scaled: bool,
}

impl ConstraintArgs {
    /// Resolves the floor against `data`: scaled mode unless an absolute --c1 was given.
    pub fn resolve(&self, data: &Dataset) -> Result<ConstraintSpec, CliError> {
        let c1 = match (self.c1, self.c1_scaled) {
            (Some(v), false) => v,
            (scale, _) => {
                let p = data.p();
                let cov = data.covariance();
                let trace: f64 = (0..p).map(|i| cov[i * p + i]).sum();
                scale.unwrap_or(DEFAULT_C1_SCALE) * trace / p as f64
            }
        };
        ConstraintSpec::new(self.c, c1).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV file of numeric rows; a non-numeric first line is skipped as a header.
    #[arg(long)]
    pub input: PathBuf,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Number of components.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.3)]
    pub beta: f64,
    #[command(flatten)]
    pub constraints: ConstraintArgs,
    #[arg(long, default_value_t = 20)]
    pub starts: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "max-iter", default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Tail probability for anomaly flags; 0 disables them.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Rows to append before fitting: `thyroid` or `file:PATH`.
    #[arg(long)]
    pub contaminate: Option<Contamination>,
    #[arg(long, value_enum, default_value_t = InitArg::RandomRows)]
    pub init: InitArg,
    /// Also refine padded fits with fewer components.
    #[arg(long)]
    pub nested_starts: bool,
    /// CSV of row index, label and anomaly flag.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Writes the data actually fitted (after contamination) as CSV.
    #[arg(long)]
    pub echo_data: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AssumptionArgs {
    /// Comma-separated mixing weights.
    #[arg(long, value_delimiter = ',', required = true)]
    pub weights: Vec<f64>,
    /// Data dimension.
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 0.3)]
    pub beta: f64,
    /// Margin constant; tiny values approximate the limit k0 -> 0.
    #[arg(long, default_value_t = 1e-12)]
    pub k0: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ConsistencyArgs {
    /// JSON file holding a mixture (weights, means, covariances); the default is
    /// the 1-d truth with weights (0.6, 0.4), means -2 and 2, unit variances.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![200, 1000, 5000])]
    pub n_grid: Vec<usize>,
    /// Number of seeds, 1..=seeds.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0.3)]
    pub beta: f64,
    #[arg(long, default_value_t = 50.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub c1: f64,
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    /// Draws used to approximate the population maximiser; 0 compares with the truth.
    #[arg(long, default_value_t = 50_000)]
    pub reference_n: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
