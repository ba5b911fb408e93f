//! Specification test for nonparametric AR(1)-ARCH(1) (CHARN) models.
//!
//! For `X_j = m(X_{j-1}) + σ(X_{j-1})·ε_j` the crate tests whether the
//! innovations `ε_j` are independent of the past values
//! `(X_{j-1}, ..., X_{j-k})`:
//!
//! 1. [`FittedCharn`] estimates `m`, `σ²` and the marginal density with
//!    Nadaraya–Watson smoothers and produces truncation-weighted residuals.
//! 2. [`statistic_closed_form`] computes `T_n`, the weighted L² distance
//!    between the joint empirical characteristic function of residuals and
//!    lags and the product of the marginals, through pairwise sums.
//! 3. [`bootstrap_test`] calibrates `T_n` with a smooth residual bootstrap.
//! 4. [`montecarlo`] measures size and power on simulated AR and ARCH data.

pub mod bootstrap;
pub mod error;
pub mod innovation;
pub mod kernel;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod series;
pub mod statistic;
pub mod weight;

pub use bootstrap::{
    bootstrap_test, evaluate_series, p_value, quantile, BootstrapConfig, Evaluation, ReportConfig, SmoothingRule,
    TestReport,
};
pub use error::{Error, Result};
pub use innovation::{FernandezSteel, InnovationLaw, SKEW_FLOOR};
pub use kernel::{
    silverman_bandwidth, BandwidthRule, Estimate, FitConfig, FittedCharn, KernelSpec, ResidualSet, TruncationRule,
};
pub use model::{simulate, CharnModel, Hypothesis, ModelId, ALTERNATIVE_SKEW_SCALE, DEFAULT_BURN_IN};
pub use montecarlo::{
    consistency_probe, run_experiment, tables_to_csv, with_threads, ExperimentConfig, ProbeConfig, RejectionCell,
    RejectionTable,
};
pub use rng::SeedStream;
pub use series::TimeSeries;
pub use statistic::{statistic_closed_form, statistic_quadrature, statistic_tiled, QuadratureSpec, StatisticInput};
pub use weight::{cosine_transform, WeightFamily, WeightSpec};
