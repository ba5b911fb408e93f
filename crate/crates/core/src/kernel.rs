//! Nadaraya–Watson estimation of the marginal density, conditional mean and
//! conditional variance, plus residuals with indicator truncation weights.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::series::TimeSeries;

/// Compactly supported, symmetric kernel densities on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelSpec {
    #[default]
    Epanechnikov,
    Quartic,
    Triweight,
}

impl KernelSpec {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        let a = 1.0 - u * u;
        if a <= 0.0 {
            return 0.0;
        }
        match self {
            KernelSpec::Epanechnikov => 0.75 * a,
            KernelSpec::Quartic => 0.9375 * a * a,
            KernelSpec::Triweight => 1.09375 * a * a * a,
        }
    }

    /// Half-width `C` of the support.
    pub fn support(self) -> f64 {
        1.0
    }
}

impl std::str::FromStr for KernelSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epanechnikov" => Ok(KernelSpec::Epanechnikov),
            "quartic" | "biweight" => Ok(KernelSpec::Quartic),
            "triweight" => Ok(KernelSpec::Triweight),
            _ => Err(invalid(format!(
                "unknown kernel '{s}' (expected epanechnikov, quartic or triweight)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthRule {
    /// `0.9·min(sd, IQR/1.34)·n^{-1/5}`.
    Silverman,
    Fixed(f64),
    /// Silverman's scale with the exponent replaced: `0.9·spread·n^{-rho}`.
    Power(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationRule {
    /// `a_n` is this empirical quantile of `|X_{j-1}|`.
    Quantile(f64),
    /// Fixed `a_n`.
    Absolute(f64),
    /// `a_n = ∞`: every observation is kept.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub kernel: KernelSpec,
    pub bandwidth: BandwidthRule,
    pub truncation: TruncationRule,
    pub density_floor: f64,
    pub variance_floor: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            kernel: KernelSpec::Epanechnikov,
            bandwidth: BandwidthRule::Silverman,
            truncation: TruncationRule::Quantile(0.975),
            density_floor: 1e-8,
            variance_floor: 1e-8,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        match self.bandwidth {
            BandwidthRule::Fixed(c) if !(c.is_finite() && c > 0.0) => {
                return Err(invalid(format!("fixed bandwidth must be positive, got {c}")))
            }
            BandwidthRule::Power(rho) if !(rho.is_finite() && rho > 0.0) => {
                return Err(invalid(format!("bandwidth exponent must be positive, got {rho}")))
            }
            _ => {}
        }
        match self.truncation {
            TruncationRule::Quantile(q) if !(q > 0.0 && q <= 1.0) => {
                return Err(invalid(format!("truncation quantile must lie in (0, 1], got {q}")))
            }
            TruncationRule::Absolute(a) if !(a > 0.0) => {
                return Err(invalid(format!("truncation bound must be positive, got {a}")))
            }
            _ => {}
        }
        if !(self.density_floor > 0.0 && self.variance_floor > 0.0) {
            return Err(invalid("density and variance floors must be positive"));
        }
        Ok(())
    }
}

/// Type-7 (linear interpolation) quantile of an ascending sample.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn spread(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = empirical_quantile(&sorted, 0.75) - empirical_quantile(&sorted, 0.25);
    let s = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::ZeroSpread)
    }
}

/// Silverman's rule of thumb, `0.9·min(sd, IQR/1.34)·n^{-1/5}`.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    Ok(0.9 * spread(values)? * (values.len() as f64).powf(-0.2))
}

fn resolve_bandwidth(rule: BandwidthRule, predictors: &[f64]) -> Result<f64> {
    match rule {
        BandwidthRule::Silverman => silverman_bandwidth(predictors),
        BandwidthRule::Fixed(c) => Ok(c),
        BandwidthRule::Power(rho) => {
            Ok(0.9 * spread(predictors)? * (predictors.len() as f64).powf(-rho))
        }
    }
}

fn resolve_truncation(rule: TruncationRule, predictors: &[f64]) -> f64 {
    match rule {
        TruncationRule::Absolute(a) => a,
        TruncationRule::Unbounded => f64::INFINITY,
        TruncationRule::Quantile(q) => {
            let mut abs: Vec<f64> = predictors.iter().map(|v| v.abs()).collect();
            abs.sort_by(f64::total_cmp);
            empirical_quantile(&abs, q)
        }
    }
}

/// Kernel estimates at one point, sharing the same kernel sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub density: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Nadaraya–Watson fit of `X_j` on `X_{j-1}`.
///
/// Immutable after construction; all evaluations are read-only.
#[derive(Debug, Clone)]
pub struct FittedCharn {
    predictors: Vec<f64>,
    responses: Vec<f64>,
    sorted_x: Vec<f64>,
    sorted_y: Vec<f64>,
    bandwidth: f64,
    kernel: KernelSpec,
    a_n: f64,
    density_floor: f64,
    variance_floor: f64,
}

impl FittedCharn {
    /// Fit on the pairs `(X_{j-1}, X_j)`, `j = 1..n`. Needs `k >= 1`.
    pub fn fit(series: &TimeSeries, cfg: &FitConfig) -> Result<Self> {
        if series.lag_depth() == 0 {
            return Err(invalid("kernel fit needs at least one pre-sample lag (k >= 1)"));
        }
        Self::from_pairs(series.predictors().to_vec(), series.responses().to_vec(), cfg)
    }

    pub fn from_pairs(predictors: Vec<f64>, responses: Vec<f64>, cfg: &FitConfig) -> Result<Self> {
        cfg.validate()?;
        if predictors.len() != responses.len() {
            return Err(invalid("predictor and response lengths differ"));
        }
        if predictors.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: predictors.len(),
            });
        }
        let bandwidth = resolve_bandwidth(cfg.bandwidth, &predictors)?;
        let a_n = resolve_truncation(cfg.truncation, &predictors);
        let mut order: Vec<usize> = (0..predictors.len()).collect();
        order.sort_by(|&a, &b| predictors[a].total_cmp(&predictors[b]));
        let sorted_x = order.iter().map(|&i| predictors[i]).collect();
        let sorted_y = order.iter().map(|&i| responses[i]).collect();
        Ok(FittedCharn {
            predictors,
            responses,
            sorted_x,
            sorted_y,
            bandwidth,
            kernel: cfg.kernel,
            a_n,
            density_floor: cfg.density_floor,
            variance_floor: cfg.variance_floor,
        })
    }

    pub fn n(&self) -> usize {
        self.predictors.len()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn truncation(&self) -> f64 {
        self.a_n
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    /// Smallest and largest predictor.
    pub fn predictor_range(&self) -> (f64, f64) {
        (self.sorted_x[0], self.sorted_x[self.sorted_x.len() - 1])
    }

    fn window(&self, x: f64) -> std::ops::Range<usize> {
        let reach = self.kernel.support() * self.bandwidth;
        let lo = self.sorted_x.partition_point(|&v| v < x - reach);
        let hi = self.sorted_x.partition_point(|&v| v <= x + reach);
        lo..hi.max(lo)
    }

    pub fn evaluate(&self, x: f64) -> Estimate {
        let c = self.bandwidth;
        let range = self.window(x);
        let xs = &self.sorted_x[range.clone()];
        let ys = &self.sorted_y[range];
        let mut sum_k = 0.0;
        let mut sum_ky = 0.0;
        for (&xi, &yi) in xs.iter().zip(ys) {
            let kv = self.kernel.eval((x - xi) / c);
            sum_k += kv;
            sum_ky += kv * yi;
        }
        let norm = self.n() as f64 * c;
        let density = sum_k / norm;
        let mean = if density >= self.density_floor {
            sum_ky / sum_k
        } else {
            sum_ky / norm / self.density_floor
        };
        let mut sum_dev = 0.0;
        for (&xi, &yi) in xs.iter().zip(ys) {
            let kv = self.kernel.eval((x - xi) / c);
            sum_dev += kv * (yi - mean).powi(2);
        }
        let raw_var = if density >= self.density_floor {
            sum_dev / sum_k
        } else {
            sum_dev / norm / self.density_floor
        };
        Estimate {
            density,
            mean,
            variance: raw_var.max(self.variance_floor),
        }
    }

    /// Evaluate at `x` clamped to the observed predictor range.
    pub fn evaluate_clamped(&self, x: f64) -> Estimate {
        let (lo, hi) = self.predictor_range();
        self.evaluate(x.clamp(lo, hi))
    }

    pub fn density_hat(&self, x: f64) -> f64 {
        self.evaluate(x).density
    }

    pub fn mean_hat(&self, x: f64) -> f64 {
        self.evaluate(x).mean
    }

    pub fn var_hat(&self, x: f64) -> f64 {
        self.evaluate(x).variance
    }

    /// Residuals of the fitted pairs.
    pub fn residuals(&self) -> Result<ResidualSet> {
        ResidualSet::build(&self.predictors, &self.responses, self.a_n, |x| {
            let e = self.evaluate(x);
            (e.mean, e.variance.sqrt())
        })
    }

    /// Residuals of another series under this fit (no re-estimation).
    /// Evaluation points are clamped to the fitted predictor range.
    pub fn residuals_of(&self, series: &TimeSeries) -> Result<ResidualSet> {
        if series.lag_depth() == 0 {
            return Err(invalid("residuals need at least one pre-sample lag (k >= 1)"));
        }
        ResidualSet::build(series.predictors(), series.responses(), self.a_n, |x| {
            let e = self.evaluate_clamped(x);
            (e.mean, e.variance.sqrt())
        })
    }
}

/// Residuals `ε̂_j`, normalized truncation weights `w̄_j` and standardized
/// residuals `ε̃` on the kept indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSet {
    pub eps_hat: Vec<f64>,
    pub weights: Vec<f64>,
    pub eps_tilde: Vec<f64>,
    pub kept: Vec<usize>,
    pub a_n: f64,
}

impl ResidualSet {
    fn build(
        predictors: &[f64],
        responses: &[f64],
        a_n: f64,
        mean_vol: impl Fn(f64) -> (f64, f64),
    ) -> Result<Self> {
        let eps_hat: Vec<f64> = predictors
            .iter()
            .zip(responses)
            .map(|(&x, &y)| {
                let (m, s) = mean_vol(x);
                (y - m) / s
            })
            .collect();
        let kept: Vec<usize> = (0..predictors.len())
            .filter(|&j| predictors[j].abs() <= a_n)
            .collect();
        if kept.len() < 2 {
            return Err(Error::DegenerateTruncation {
                kept: kept.len(),
                needed: 2,
                a_n,
            });
        }
        if let Some(j) = kept.iter().find(|&&j| !eps_hat[j].is_finite()) {
            return Err(Error::NonFinite(*j));
        }
        let w = 1.0 / kept.len() as f64;
        let mut weights = vec![0.0; predictors.len()];
        for &j in &kept {
            weights[j] = w;
        }
        let m = kept.len() as f64;
        let mean = kept.iter().map(|&j| eps_hat[j]).sum::<f64>() / m;
        let sd = (kept.iter().map(|&j| (eps_hat[j] - mean).powi(2)).sum::<f64>() / m).sqrt();
        if !(sd > 0.0) {
            return Err(Error::ZeroSpread);
        }
        let eps_tilde = kept.iter().map(|&j| (eps_hat[j] - mean) / sd).collect();
        Ok(ResidualSet {
            eps_hat,
            weights,
            eps_tilde,
            kept,
            a_n,
        })
    }

    /// Residuals under known mean and volatility functions.
    pub fn from_functions(
        series: &TimeSeries,
        a_n: f64,
        mean: impl Fn(f64) -> f64,
        vol: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if series.lag_depth() == 0 {
            return Err(invalid("residuals need at least one pre-sample lag (k >= 1)"));
        }
        Self::build(series.predictors(), series.responses(), a_n, |x| (mean(x), vol(x)))
    }

    pub fn kept_count(&self) -> usize {
        self.kept.len()
    }
}
