//! Smooth autoregressive residual bootstrap for the critical value of `T_n`.
//!
//! Each replicate draws innovations from the normal-kernel smooth of the
//! standardized residuals, regenerates a series through the fitted
//! recursion `X*_j = m̂(X*_{j-1}) + σ̂(X*_{j-1})·ε*_j`, and recomputes the
//! statistic on it. Bootstrap innovations are independent of the bootstrap
//! past, so the replicates follow the null hypothesis.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::innovation::InnovationLaw;
use crate::kernel::{FitConfig, FittedCharn, ResidualSet};
use crate::model::{run_recursion, DEFAULT_BURN_IN};
use crate::rng::SeedStream;
use crate::series::TimeSeries;
use crate::statistic::{statistic_closed_form, StatisticInput};
use crate::weight::WeightSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingRule {
    /// `h = n^{-1/4}`.
    QuarterPower,
    Fixed(f64),
}

impl SmoothingRule {
    pub fn bandwidth(self, n: usize) -> f64 {
        match self {
            SmoothingRule::QuarterPower => (n as f64).powf(-0.25),
            SmoothingRule::Fixed(h) => h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub smoothing: SmoothingRule,
    pub burn_in: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Re-estimate `m̂`, `σ̂`, `c_n` and `a_n` on every bootstrap series.
    /// `false` reuses the original fit (fast, exploratory).
    pub refit: bool,
    /// Rescale smoothed innovations by `1/√(1 + h²)`.
    pub variance_correction: bool,
    /// Minimum number of observations inside the truncation window.
    pub min_kept: usize,
    /// Largest tolerated fraction of failed replicates.
    pub max_failure_rate: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 200,
            smoothing: SmoothingRule::QuarterPower,
            burn_in: DEFAULT_BURN_IN,
            alpha: 0.05,
            seed: 0,
            refit: true,
            variance_correction: false,
            min_kept: 20,
            max_failure_rate: 0.05,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(invalid("at least one bootstrap replicate is required"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if let SmoothingRule::Fixed(h) = self.smoothing {
            if !(h.is_finite() && h >= 0.0) {
                return Err(invalid(format!("smoothing bandwidth must be >= 0, got {h}")));
            }
        }
        if self.min_kept < 2 {
            return Err(invalid("min_kept must be at least 2"));
        }
        Ok(())
    }
}

/// Settings and derived quantities echoed in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub n: usize,
    pub k: usize,
    pub bandwidth: f64,
    pub truncation: f64,
    pub kept_count: usize,
    pub smoothing_bandwidth: f64,
    pub fit: FitConfig,
    pub weight: WeightSpec,
    pub bootstrap: BootstrapConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub critical_value: f64,
    pub alpha: f64,
    pub p_value: f64,
    pub reject: bool,
    /// `T*_b` in replicate order; failed replicates are omitted.
    pub bootstrap_statistics: Vec<f64>,
    pub failed_replicates: usize,
    pub config: ReportConfig,
}

impl TestReport {
    fn sorted(&self) -> Vec<f64> {
        let mut s = self.bootstrap_statistics.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    /// `c*_{1-α}` for another level, from the same bootstrap sample.
    pub fn critical_value_at(&self, alpha: f64) -> Result<f64> {
        quantile(&self.sorted(), 1.0 - alpha)
    }

    pub fn rejects_at(&self, alpha: f64) -> Result<bool> {
        Ok(self.statistic > self.critical_value_at(alpha)?)
    }
}

/// Empirical quantile of an ascending sample: the `⌈level·B⌉`-th order
/// statistic (1-based).
pub fn quantile(sorted: &[f64], level: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(invalid("quantile of an empty sample"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("quantile level must lie in (0, 1), got {level}")));
    }
    let b = sorted.len();
    // guard against 0.95·100 = 95.00000000000001
    let rank = ((level * b as f64) - 1e-9).ceil().clamp(1.0, b as f64) as usize;
    Ok(sorted[rank - 1])
}

/// `(1 + #{b : T*_b >= T}) / (B + 1)`.
pub fn p_value(statistic: f64, bootstrap: &[f64]) -> f64 {
    let exceed = bootstrap.iter().filter(|&&t| t >= statistic).count();
    (1 + exceed) as f64 / (bootstrap.len() + 1) as f64
}

/// Fit, residuals and statistic of one series.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub fit: FittedCharn,
    pub residuals: ResidualSet,
    pub statistic: f64,
}

/// Run the full estimation pipeline on `series` and compute `T_n`.
pub fn evaluate_series(series: &TimeSeries, fit_cfg: &FitConfig, weight: &WeightSpec) -> Result<Evaluation> {
    let fit = FittedCharn::fit(series, fit_cfg)?;
    let residuals = fit.residuals()?;
    let input = StatisticInput::from_residuals(series, &residuals, weight.clone())?;
    let statistic = statistic_closed_form(&input)?;
    Ok(Evaluation {
        fit,
        residuals,
        statistic,
    })
}

struct Replicator<'a> {
    series: &'a TimeSeries,
    original: &'a FittedCharn,
    law: InnovationLaw,
    fit_cfg: &'a FitConfig,
    weight: &'a WeightSpec,
    boot: &'a BootstrapConfig,
}

impl Replicator<'_> {
    fn run(&self, stream: SeedStream) -> Result<f64> {
        let mut rng = stream.rng();
        let values = self.series.values();
        let x0 = values[rng.random_range(0..values.len())];
        let path = run_recursion(
            |x| {
                let e = self.original.evaluate_clamped(x);
                (e.mean, e.variance.sqrt())
            },
            &self.law,
            x0,
            self.boot.burn_in,
            values.len(),
            &mut rng,
        )?;
        let bseries = TimeSeries::new(path, self.series.lag_depth())?;
        if self.boot.refit {
            Ok(evaluate_series(&bseries, self.fit_cfg, self.weight)?.statistic)
        } else {
            let res = self.original.residuals_of(&bseries)?;
            let input = StatisticInput::from_residuals(&bseries, &res, self.weight.clone())?;
            statistic_closed_form(&input)
        }
    }

    /// One retry on a fresh stream, then give up on the replicate.
    fn run_with_retry(&self, stream: SeedStream) -> Option<f64> {
        self.run(stream.child(0))
            .or_else(|_| self.run(stream.child(1)))
            .ok()
    }
}

/// Bootstrap test of independence between innovations and the `k` lags
/// (`k` = lag depth of `series`, matching `weight`).
///
/// Deterministic given `boot.seed`, whatever the thread count.
pub fn bootstrap_test(
    series: &TimeSeries,
    fit_cfg: &FitConfig,
    weight: &WeightSpec,
    boot: &BootstrapConfig,
) -> Result<TestReport> {
    boot.validate()?;
    let k = series.lag_depth();
    if k == 0 {
        return Err(invalid("the test needs k >= 1"));
    }
    if weight.k() != k {
        return Err(invalid(format!(
            "weight has {} lag coordinates but the series has k = {k}",
            weight.k()
        )));
    }
    let original = evaluate_series(series, fit_cfg, weight)?;
    let kept = original.residuals.kept_count();
    if kept < boot.min_kept {
        return Err(Error::DegenerateTruncation {
            kept,
            needed: boot.min_kept,
            a_n: original.residuals.a_n,
        });
    }

    let n = series.n();
    let h = boot.smoothing.bandwidth(n);
    let (pool, smoothing) = if boot.variance_correction {
        let s = (1.0 + h * h).sqrt();
        let pool: Vec<f64> = original.residuals.eps_tilde.iter().map(|e| e / s).collect();
        (pool, h / s)
    } else {
        (original.residuals.eps_tilde.clone(), h)
    };
    let replicator = Replicator {
        series,
        original: &original.fit,
        law: InnovationLaw::smoothed_residual(pool, smoothing)?,
        fit_cfg,
        weight,
        boot,
    };

    let root = SeedStream::new(boot.seed);
    let outcomes: Vec<Option<f64>> = (0..boot.replicates)
        .into_par_iter()
        .map(|b| replicator.run_with_retry(root.child(b as u64)))
        .collect();
    let failed = outcomes.iter().filter(|o| o.is_none()).count();
    let limit = (boot.max_failure_rate * boot.replicates as f64).floor() as usize;
    if failed > limit || failed == boot.replicates {
        return Err(Error::BootstrapFailure {
            failed,
            total: boot.replicates,
            limit,
        });
    }
    let bootstrap_statistics: Vec<f64> = outcomes.into_iter().flatten().collect();
    let mut sorted = bootstrap_statistics.clone();
    sorted.sort_by(f64::total_cmp);
    let critical_value = quantile(&sorted, 1.0 - boot.alpha)?;
    let statistic = original.statistic;

    Ok(TestReport {
        statistic,
        critical_value,
        alpha: boot.alpha,
        p_value: p_value(statistic, &bootstrap_statistics),
        reject: statistic > critical_value,
        bootstrap_statistics,
        failed_replicates: failed,
        config: ReportConfig {
            n,
            k,
            bandwidth: original.fit.bandwidth(),
            truncation: original.fit.truncation(),
            kept_count: kept,
            smoothing_bandwidth: h,
            fit: *fit_cfg,
            weight: weight.clone(),
            bootstrap: *boot,
        },
    })
}
