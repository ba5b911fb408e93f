use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightFamily {
    /// `V(t) = e^{-γ|t|}`.
    Laplace,
    /// `V(t) = e^{-γt²}`.
    Gaussian,
}

impl WeightFamily {
    pub fn name(self) -> &'static str {
        match self {
            WeightFamily::Laplace => "laplace",
            WeightFamily::Gaussian => "gauss",
        }
    }

    /// `V(t)`.
    pub fn weight(self, gamma: f64, t: f64) -> f64 {
        match self {
            WeightFamily::Laplace => (-gamma * t.abs()).exp(),
            WeightFamily::Gaussian => (-gamma * t * t).exp(),
        }
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for WeightFamily {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace" => Ok(WeightFamily::Laplace),
            "gauss" | "gaussian" => Ok(WeightFamily::Gaussian),
            _ => Err(invalid(format!("unknown weight family '{s}' (expected laplace or gauss)"))),
        }
    }
}

/// `∫ cos(tx) V(t) dt` for the family's `V` with parameter `gamma`.
///
/// Laplace: `2γ/(γ² + x²)`. Gaussian: `√(π/γ)·e^{-x²/(4γ)}`.
#[inline]
pub fn cosine_transform(family: WeightFamily, gamma: f64, x: f64) -> f64 {
    match family {
        WeightFamily::Laplace => 2.0 * gamma / (gamma * gamma + x * x),
        WeightFamily::Gaussian => (PI / gamma).sqrt() * (-x * x / (4.0 * gamma)).exp(),
    }
}

/// Product weight `W(t_0, ..., t_k) = V_0(t_0)·∏ V_j(t_j)` within one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    family: WeightFamily,
    gammas: Vec<f64>,
}

impl WeightSpec {
    pub const DEFAULT_GAMMA: f64 = 0.5;

    pub fn new(family: WeightFamily, gammas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(invalid("weight needs at least one γ (coordinate t_0)"));
        }
        if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(invalid(format!("weight parameters must be positive, got {g}")));
        }
        Ok(WeightSpec { family, gammas })
    }

    /// Same `gamma` on all `k + 1` coordinates.
    pub fn uniform(family: WeightFamily, gamma: f64, k: usize) -> Result<Self> {
        Self::new(family, vec![gamma; k + 1])
    }

    /// Gaussian product with every `γ = 0.5`.
    pub fn default_for(k: usize) -> Self {
        Self::uniform(WeightFamily::Gaussian, Self::DEFAULT_GAMMA, k).expect("valid default")
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Number of lag coordinates.
    pub fn k(&self) -> usize {
        self.gammas.len() - 1
    }

    pub fn weight(&self, coord: usize, t: f64) -> f64 {
        self.family.weight(self.gammas[coord], t)
    }

    pub fn transform(&self, coord: usize, x: f64) -> f64 {
        cosine_transform(self.family, self.gammas[coord], x)
    }
}
