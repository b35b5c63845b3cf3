use serde::{Deserialize, Serialize};

use super::prior::{PriorSpec, SidePrior};
use crate::error::{Error, Result};

/// Rule giving the `X` dimension `m` as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeMap {
    /// `m(n) = max(1, round(α n))`.
    #[default]
    Round,
}

impl SizeMap {
    pub fn m(&self, alpha: f64, n: usize) -> usize {
        match self {
            SizeMap::Round => ((alpha * n as f64).round() as usize).max(1),
        }
    }
}

/// Problem size: `n`, the limiting aspect ratio `α`, and the rule `m(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n: usize,
    pub alpha: f64,
    #[serde(default)]
    pub size_map: SizeMap,
}

impl ModelConfig {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        let config = ModelConfig {
            n,
            alpha,
            size_map: SizeMap::Round,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.size_map.m(self.alpha, self.n)
    }

    /// `N = sqrt(m n)`.
    pub fn big_n(&self) -> f64 {
        ((self.m() * self.n) as f64).sqrt()
    }

    /// `β(n) = |m(n)/n − α|`.
    pub fn beta_n(&self) -> f64 {
        (self.m() as f64 / self.n as f64 - self.alpha).abs()
    }

    /// `m(1)` under the same size map.
    pub fn m_at_one(&self) -> usize {
        self.size_map.m(self.alpha, 1)
    }

    pub fn with_n(&self, n: usize) -> Self {
        ModelConfig { n, ..*self }
    }
}

/// On-disk model configuration.
///
/// ```json
/// { "prior": { "kind": "iid_discrete", "atoms": [[-1, 0.5], [1, 0.5]] },
///   "alpha": 1.0, "n": 4, "seed": 7 }
/// ```
///
/// `prior` applies to both sides unless `prior_y` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub prior: SidePrior,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_y: Option<SidePrior>,
    pub alpha: f64,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub size_map: SizeMap,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.prior_spec().validate()?;
        file.model_config().validate()?;
        Ok(file)
    }

    pub fn prior_spec(&self) -> PriorSpec {
        PriorSpec::new(
            self.prior.clone(),
            self.prior_y.clone().unwrap_or_else(|| self.prior.clone()),
        )
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            n: self.n,
            alpha: self.alpha,
            size_map: self.size_map,
        }
    }
}
