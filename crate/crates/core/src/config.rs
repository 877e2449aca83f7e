//! Integrator configuration, accepted as a JSON document.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::CountableGenerator;
use crate::spaces::RESOLUTION;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub tol: f64,
    /// Deepest dyadic refinement level an integrator may visit.
    pub max_depth: u32,
    /// Tags drawn per cell when estimating tag oscillation.
    pub tag_samples: usize,
    /// Random finer partitions used to certify a candidate value.
    pub partitions_checked: usize,
    /// Tag draws per certification partition.
    pub tag_draws: usize,
    /// Length of the certified window `[N, N + window]` of partial sums.
    pub window: usize,
    /// Random gauge-fine partitions sampled by the Mc Shane integrator.
    pub trials: usize,
    /// Sums with norm above `divergence_factor * M` count as divergent.
    pub divergence_factor: f64,
    pub generator: CountableGenerator,
    pub seed: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_depth: 20,
            tag_samples: 8,
            partitions_checked: 50,
            tag_draws: 8,
            window: 64,
            trials: 50,
            divergence_factor: 1e6,
            generator: CountableGenerator::default(),
            seed: 0,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tol(self, tol: f64) -> Self {
        Self { tol, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_depth > RESOLUTION {
            return Err(Error::InvalidConfig(format!("maxDepth must be at most {RESOLUTION}, got {}", self.max_depth)));
        }
        if self.tag_samples < 2 || self.tag_draws == 0 {
            return Err(Error::InvalidConfig("tagSamples must be at least 2 and tagDraws positive".into()));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(Error::InvalidConfig(format!("divergenceFactor must exceed 1, got {}", self.divergence_factor)));
        }
        self.generator.validate()
    }
}
