use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "charn", version, about = "Innovation independence test for nonparametric AR-ARCH models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a series read from a file (one value per line, oldest first).
    Test(TestArgs),
    /// Simulate one of the study designs.
    Simulate(SimulateArgs),
    /// Rejection frequencies over repeated simulated series.
    Montecarlo(MonteCarloArgs),
    /// Re-run a command from a manifest or a report that embeds one.
    Replay(ReplayArgs),
}

/// Estimation, weight and bootstrap settings shared by `test` and `montecarlo`.
#[derive(Debug, Clone, Default, Args)]
pub struct MethodArgs {
    /// Flat key=value file; flags take precedence over its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of lags tested against the innovation.
    #[arg(long)]
    pub k: Option<usize>,
    /// Bootstrap replicates B.
    #[arg(long)]
    pub boot_reps: Option<usize>,
    /// Weight family: laplace or gauss.
    #[arg(long)]
    pub weight: Option<String>,
    /// One γ for every coordinate, or k+1 comma-separated values.
    #[arg(long)]
    pub gamma: Option<String>,
    /// a_n as a quantile of |X_{j-1}|.
    #[arg(long, conflicts_with = "a_n")]
    pub a_n_quantile: Option<f64>,
    /// a_n as a fixed bound, or "inf" to keep every observation.
    #[arg(long)]
    pub a_n: Option<String>,
    /// silverman, fixed:<c> or power:<rho>.
    #[arg(long)]
    pub bandwidth: Option<String>,
    /// epanechnikov, quartic or triweight.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Bootstrap smoothing bandwidth h, or "auto" for n^{-1/4}.
    #[arg(long)]
    pub smoothing_bandwidth: Option<String>,
    /// Burn-in of simulated and bootstrap series.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Reuse the original fit in every bootstrap replicate.
    #[arg(long)]
    pub no_refit: bool,
    /// Rescale smoothed bootstrap innovations to unit variance.
    #[arg(long)]
    pub variance_correction: bool,
    /// Minimum observations inside the truncation window.
    #[arg(long)]
    pub min_kept: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 2 when the null hypothesis is rejected.
    #[arg(long)]
    pub exit_on_reject: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// ar-i or arch-ii.
    #[arg(long, default_value = "ar-i")]
    pub model: String,
    /// null or alternative.
    #[arg(long, default_value = "null")]
    pub hypothesis: String,
    /// Observations after the pre-sample lags.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Pre-sample lags written before the n observations.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = charn_core::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    /// csv (index,value with header) or lines (plain values, readable by `test`).
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Write here instead of stdout; a manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    /// ar-i, arch-ii or all.
    #[arg(long)]
    pub model: Option<String>,
    /// null, alternative or all.
    #[arg(long)]
    pub hypothesis: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long)]
    pub n: Option<String>,
    /// Comma-separated nominal levels.
    #[arg(long)]
    pub alphas: Option<String>,
    /// Monte Carlo replicates M.
    #[arg(long)]
    pub mc_reps: Option<usize>,
    /// M = B = 400 and n up to 400 unless given explicitly.
    #[arg(long)]
    pub paper_scale: bool,
    /// Directory for rejection.csv, rejection.txt and manifest.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// A manifest.json or a JSON test report.
    pub manifest: PathBuf,
    /// Output file (test, simulate) or directory (montecarlo); stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}
