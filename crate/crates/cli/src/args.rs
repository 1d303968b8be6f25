use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "graphw", version, about = "Hypothesis tests for distributions of random graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct Global {
    /// Master seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run manifest path (default: `<out>.manifest.json` when `--out` is set).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Draw a graph sample from a model.
    Sample(SampleArgs),
    /// One-sample Monte Carlo test or two-sample permutation test.
    Test(TestArgs),
    /// Power curve of the W test over a parameter grid.
    Power(PowerArgs),
    /// Mean edge density of an ERGM over a parameter grid.
    DensitySweep(DensityArgs),
    /// Graph sample from windowed correlations of a multichannel CSV.
    BuildGraphs(BuildArgs),
    /// Most frequent edges of a graph sample.
    Summary(SummaryArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Er,
    ModifiedEr,
    ErgmTriangle,
    #[value(name = "ergm-2star")]
    #[serde(rename = "ergm-2star")]
    Ergm2star,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullName {
    Er,
    ErgmTriangle,
    #[value(name = "ergm-2star")]
    #[serde(rename = "ergm-2star")]
    Ergm2star,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    Bonferroni,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsName {
    Triangle,
    #[value(name = "2star")]
    #[serde(rename = "2star")]
    TwoStar,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct McmcArgs {
    /// Metropolis-Hastings burn-in, in sweeps of E proposals.
    #[arg(long, default_value_t = 200)]
    pub burn_in: usize,
    /// Sweeps between retained ERGM draws.
    #[arg(long, default_value_t = 10)]
    pub thinning: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    /// Vertex count.
    #[arg(long)]
    pub v: usize,
    /// Number of graphs.
    #[arg(long)]
    pub n: usize,
    /// Edge probability (ER), or probability on modified pairs.
    #[arg(long)]
    pub p: Option<f64>,
    /// Probability on unmodified pairs (modified ER).
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    /// Fraction of pairs that are modified (modified ER).
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta2: Option<f64>,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    /// Vertex numbering in the output file.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub base: u8,
}

#[derive(Args, Debug, Serialize)]
pub struct TestArgs {
    /// Graph-sample file.
    #[arg(long)]
    pub sample: PathBuf,
    /// Second sample; switches to the two-sample permutation test.
    #[arg(long, conflicts_with_all = ["null", "null_marginals"])]
    pub sample2: Option<PathBuf>,
    /// Null model of the one-sample test.
    #[arg(long, value_enum)]
    pub null: Option<NullName>,
    /// Edge probability of an ER null.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta2: Option<f64>,
    /// CSV of null edge marginals (`i,j,frequency`), for ERGM nulls too large to enumerate.
    #[arg(long)]
    pub null_marginals: Option<PathBuf>,
    /// Vertex numbering of the marginals file.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub base: u8,
    #[arg(long, default_value_t = graphw_core::testing::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Null replications for the critical value.
    #[arg(long, default_value_t = graphw_core::testing::DEFAULT_QUANTILE_REPLICATIONS)]
    pub replications: usize,
    /// Permutation rounds of the two-sample test.
    #[arg(long, default_value_t = graphw_core::testing::DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    /// Count only permuted statistics strictly above the observed one.
    #[arg(long)]
    pub strict_ties: bool,
    /// Use `(count + 1) / (R + 1)` as the permutation p-value.
    #[arg(long)]
    pub add_one: bool,
    #[command(flatten)]
    pub mcmc: McmcArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct PowerArgs {
    /// Null model.
    #[arg(long, value_enum, default_value = "er")]
    pub null: NullName,
    /// Edge probability of an ER null; also the base probability of a modified-ER alternative.
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    /// θ2 of an ERGM null (θ1 is shared with the alternative).
    #[arg(long, allow_negative_numbers = true)]
    pub null_theta2: Option<f64>,
    #[arg(long)]
    pub null_marginals: Option<PathBuf>,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub base: u8,
    /// Alternative family. The grid sweeps p for ER models and θ2 for ERGMs.
    #[arg(long, value_enum)]
    pub model: ModelName,
    #[arg(long)]
    pub v: usize,
    /// Fraction of modified pairs (modified ER).
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    /// Comma-separated parameter values.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub grid: Vec<f64>,
    /// Sample size per replication.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Replications per grid point.
    #[arg(long, default_value_t = graphw_core::testing::DEFAULT_POWER_REPLICATIONS)]
    pub replications: usize,
    /// Null replications for the critical value.
    #[arg(long, default_value_t = graphw_core::testing::DEFAULT_QUANTILE_REPLICATIONS)]
    pub quantile_replications: usize,
    #[arg(long, default_value_t = graphw_core::testing::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Also report the per-edge Bonferroni baseline.
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    #[command(flatten)]
    pub mcmc: McmcArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub stats: StatsName,
    #[arg(long)]
    pub v: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: f64,
    /// Comma-separated θ2 values.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub grid: Vec<f64>,
    /// Draws per grid point.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[command(flatten)]
    pub mcmc: McmcArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    /// Channel CSV: a header of labels, then one time sample per row.
    #[arg(long)]
    pub input: PathBuf,
    /// Samples per second.
    #[arg(long)]
    pub sampling_rate: f64,
    #[arg(long, default_value_t = graphw_core::timeseries::DEFAULT_WIDTH_MS)]
    pub width_ms: f64,
    #[arg(long, default_value_t = graphw_core::timeseries::DEFAULT_STEP_MS)]
    pub step_ms: f64,
    /// Correlation threshold.
    #[arg(long, default_value_t = graphw_core::timeseries::DEFAULT_THRESHOLD)]
    pub c: f64,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub base: u8,
}

#[derive(Args, Debug, Serialize)]
pub struct SummaryArgs {
    #[arg(long)]
    pub sample: PathBuf,
    /// Number of edges to keep.
    #[arg(long)]
    pub k: usize,
    /// Vertex numbering of the output table.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub base: u8,
}
