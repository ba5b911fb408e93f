use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observations `X_{-k+1}, ..., X_n` of a univariate series.
///
/// The first `lag_depth` values are pre-sample lags, so that the lag vector
/// `(X_{j-1}, ..., X_{j-k})` exists for every `j = 1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    lag_depth: usize,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, lag_depth: usize) -> Result<Self> {
        if values.len() < lag_depth + 1 {
            return Err(Error::TooShort {
                needed: lag_depth + 1,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(TimeSeries { values, lag_depth })
    }

    /// Number of observations after the pre-sample lags.
    pub fn n(&self) -> usize {
        self.values.len() - self.lag_depth
    }

    pub fn lag_depth(&self) -> usize {
        self.lag_depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `X_t` for `t` in `-k+1..=n`.
    pub fn at(&self, t: isize) -> f64 {
        let idx = t + self.lag_depth as isize - 1;
        self.values[usize::try_from(idx).expect("time index before series start")]
    }

    /// `(X_{j-nu})_{j=1..n}`. Requires `1 <= nu <= k`.
    pub fn lag_column(&self, nu: usize) -> &[f64] {
        assert!(
            nu >= 1 && nu <= self.lag_depth,
            "lag {nu} outside 1..={}",
            self.lag_depth
        );
        let start = self.lag_depth - nu;
        &self.values[start..start + self.n()]
    }

    /// Predictors `X_0, ..., X_{n-1}`.
    pub fn predictors(&self) -> &[f64] {
        self.lag_column(1)
    }

    /// Responses `X_1, ..., X_n`.
    pub fn responses(&self) -> &[f64] {
        &self.values[self.lag_depth..]
    }
}
