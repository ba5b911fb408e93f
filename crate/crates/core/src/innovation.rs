//! Innovation distributions: standard normal, the kernel-smoothed residual
//! law used by the bootstrap, and the state-dependent Fernández–Steel skew
//! normal used as the alternative in the simulation study.

use std::f64::consts::FRAC_2_PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Lower bound applied to the state-driven asymmetry parameter.
pub const SKEW_FLOOR: f64 = 1e-3;

/// Two-piece (Fernández–Steel) normal with asymmetry `gamma`.
///
/// The density is `2/(γ + 1/γ) · [φ(x/γ) 1{x ≥ 0} + φ(γx) 1{x < 0}]`;
/// `γ = 1` is the standard normal and `γ ↔ 1/γ` mirrors the law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FernandezSteel {
    gamma: f64,
}

impl FernandezSteel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidSkewness(gamma));
        }
        Ok(FernandezSteel { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn spread(&self) -> f64 {
        self.gamma - self.gamma.recip()
    }

    /// `E[X] = √(2/π)·(γ − 1/γ)`.
    pub fn mean(&self) -> f64 {
        FRAC_2_PI.sqrt() * self.spread()
    }

    /// `Var[X] = 1 + (1 − 2/π)·(γ − 1/γ)²`, from `E[X²] = γ² − 1 + γ⁻²`.
    pub fn variance(&self) -> f64 {
        let d = self.spread();
        1.0 + (1.0 - FRAC_2_PI) * d * d
    }

    /// Third central moment divided by `variance^{3/2}`.
    pub fn skewness(&self) -> f64 {
        let d = self.spread();
        let m1 = FRAC_2_PI.sqrt();
        // raw moments: E[X³] = 2√(2/π)·d·(d² + 2), E[X²] = d² + 1
        let raw3 = 2.0 * m1 * d * (d * d + 2.0);
        let mu = m1 * d;
        let raw2 = d * d + 1.0;
        let central3 = raw3 - 3.0 * mu * raw2 + 2.0 * mu.powi(3);
        central3 / self.variance().powf(1.5)
    }

    pub fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        let p_positive = 1.0 / (1.0 + self.gamma.powi(-2));
        if rng.random::<f64>() < p_positive {
            self.gamma * z.abs()
        } else {
            -z.abs() / self.gamma
        }
    }

    /// Draw shifted and scaled to mean 0, variance 1.
    pub fn sample_standardized<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        (self.sample_raw(rng) - self.mean()) / self.variance().sqrt()
    }
}

/// Law of the innovation `ε_j` driving a CHARN recursion.
#[derive(Debug, Clone, PartialEq)]
pub enum InnovationLaw {
    StandardNormal,
    /// `ε̃_I + h·Z`: the standard-normal kernel smooth of a residual pool.
    SmoothedResidual { pool: Arc<[f64]>, bandwidth: f64 },
    /// Standardized Fernández–Steel law with `γ = max(scale·x², SKEW_FLOOR)`,
    /// `x` being the previous state.
    ConditionalSkewNormal { scale: f64 },
}

impl InnovationLaw {
    pub fn smoothed_residual(pool: impl Into<Arc<[f64]>>, bandwidth: f64) -> Result<Self> {
        let pool = pool.into();
        if pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        if !(bandwidth.is_finite() && bandwidth >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "smoothing bandwidth must be finite and >= 0, got {bandwidth}"
            )));
        }
        Ok(InnovationLaw::SmoothedResidual { pool, bandwidth })
    }

    /// Asymmetry parameter used at `state` (conditional law only).
    pub fn skew_parameter(scale: f64, state: f64) -> f64 {
        (scale * state * state).max(SKEW_FLOOR)
    }

    pub fn draw<R: Rng + ?Sized>(&self, state: f64, rng: &mut R) -> Result<f64> {
        match self {
            InnovationLaw::StandardNormal => Ok(StandardNormal.sample(rng)),
            InnovationLaw::SmoothedResidual { pool, bandwidth } => {
                if pool.is_empty() {
                    return Err(Error::EmptyPool);
                }
                let centre = pool[rng.random_range(0..pool.len())];
                if *bandwidth == 0.0 {
                    Ok(centre)
                } else {
                    let z: f64 = StandardNormal.sample(rng);
                    Ok(centre + bandwidth * z)
                }
            }
            InnovationLaw::ConditionalSkewNormal { scale } => {
                let gamma = Self::skew_parameter(*scale, state);
                Ok(FernandezSteel::new(gamma)?.sample_standardized(rng))
            }
        }
    }
}

/// Sample mean, variance (n − 1 denominator) and skewness.
#[cfg(test)]
pub(crate) fn sample_moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    (mean, m2 * n / (n - 1.0), m3 / m2.powf(1.5))
}
