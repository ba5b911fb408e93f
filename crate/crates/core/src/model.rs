//! CHARN recursion `X_j = m(X_{j-1}) + σ(X_{j-1})·ε_j` and the two study
//! designs (AR model (i) and ARCH model (ii)).

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::innovation::InnovationLaw;
use crate::rng::SeedStream;
use crate::series::TimeSeries;

pub type StateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const DEFAULT_BURN_IN: usize = 200;

/// Asymmetry scale of the skew-normal alternative: `γ_t = 10·X_t²`.
pub const ALTERNATIVE_SKEW_SCALE: f64 = 10.0;

#[derive(Clone)]
pub struct CharnModel {
    pub mean_fn: StateFn,
    pub vol_fn: StateFn,
    pub innovation: InnovationLaw,
    pub burn_in: usize,
    pub initial_state: f64,
}

impl fmt::Debug for CharnModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharnModel")
            .field("innovation", &self.innovation)
            .field("burn_in", &self.burn_in)
            .field("initial_state", &self.initial_state)
            .finish_non_exhaustive()
    }
}

impl CharnModel {
    pub fn new(
        mean_fn: impl Fn(f64) -> f64 + Send + Sync + 'static,
        vol_fn: impl Fn(f64) -> f64 + Send + Sync + 'static,
        innovation: InnovationLaw,
    ) -> Self {
        CharnModel {
            mean_fn: Arc::new(mean_fn),
            vol_fn: Arc::new(vol_fn),
            innovation,
            burn_in: DEFAULT_BURN_IN,
            initial_state: 0.0,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_initial_state(mut self, x0: f64) -> Self {
        self.initial_state = x0;
        self
    }
}

/// Iterate `x ← m(x) + σ(x)·ε` `burn_in + len` times from `x0` and keep the
/// last `len` states. `mean_vol` returns `(m(x), σ(x))`.
pub(crate) fn run_recursion<F, R>(
    mean_vol: F,
    law: &InnovationLaw,
    x0: f64,
    burn_in: usize,
    len: usize,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    F: Fn(f64) -> (f64, f64),
    R: Rng + ?Sized,
{
    let mut out = Vec::with_capacity(len);
    let mut x = x0;
    for step in 0..burn_in + len {
        let (m, s) = mean_vol(x);
        if !(s > 0.0) {
            return Err(invalid(format!(
                "volatility must be positive, got {s} at step {step} (state {x})"
            )));
        }
        let eps = law.draw(x, rng)?;
        let next = m + s * eps;
        if !next.is_finite() {
            return Err(Error::Divergence { step, state: next });
        }
        x = next;
        if step >= burn_in {
            out.push(x);
        }
    }
    Ok(out)
}

/// Simulate `n + k` observations `X_{-k+1}, ..., X_n` after discarding
/// `model.burn_in` steps.
pub fn simulate(model: &CharnModel, n: usize, k: usize, seed: SeedStream) -> Result<TimeSeries> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let mut rng = seed.rng();
    let values = run_recursion(
        |x| ((model.mean_fn)(x), (model.vol_fn)(x)),
        &model.innovation,
        model.initial_state,
        model.burn_in,
        n + k,
        &mut rng,
    )?;
    TimeSeries::new(values, k)
}

/// Data-generating designs of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    /// `m(x) = 0.9x`, `σ ≡ 1`.
    ArI,
    /// `m ≡ 0`, `σ(x) = √(1 + 0.25x²)`.
    ArchIi,
}

impl ModelId {
    pub const ALL: [ModelId; 2] = [ModelId::ArI, ModelId::ArchIi];

    pub fn mean(self, x: f64) -> f64 {
        match self {
            ModelId::ArI => 0.9 * x,
            ModelId::ArchIi => 0.0,
        }
    }

    pub fn vol(self, x: f64) -> f64 {
        match self {
            ModelId::ArI => 1.0,
            ModelId::ArchIi => (1.0 + 0.25 * x * x).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelId::ArI => "ar-i",
            ModelId::ArchIi => "arch-ii",
        }
    }

    pub fn index(self) -> u64 {
        self as u64
    }

    /// CHARN model for this design under the given hypothesis.
    pub fn model(self, hypothesis: Hypothesis) -> CharnModel {
        let innovation = match hypothesis {
            Hypothesis::Null => InnovationLaw::StandardNormal,
            Hypothesis::Alternative => InnovationLaw::ConditionalSkewNormal {
                scale: ALTERNATIVE_SKEW_SCALE,
            },
        };
        CharnModel::new(move |x| self.mean(x), move |x| self.vol(x), innovation)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ar-i" | "ar" | "i" => Ok(ModelId::ArI),
            "arch-ii" | "arch" | "ii" => Ok(ModelId::ArchIi),
            _ => Err(invalid(format!("unknown model '{s}' (expected ar-i or arch-ii)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    Null,
    Alternative,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 2] = [Hypothesis::Null, Hypothesis::Alternative];

    pub fn name(self) -> &'static str {
        match self {
            Hypothesis::Null => "null",
            Hypothesis::Alternative => "alternative",
        }
    }

    pub fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Hypothesis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "null" | "h0" => Ok(Hypothesis::Null),
            "alternative" | "alt" | "h1" => Ok(Hypothesis::Alternative),
            _ => Err(invalid(format!(
                "unknown hypothesis '{s}' (expected null or alternative)"
            ))),
        }
    }
}
