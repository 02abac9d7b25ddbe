// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::adversary::AttackStrategy;
use crate::error::ConfigError;
use crate::protocol::ProtocolVariant;

/// Minimum horizon; shorter runs have nothing committed to measure.
pub const MIN_ROUNDS: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: u32,
    pub f: u32,
    pub variant: ProtocolVariant,
    pub strategy: AttackStrategy,
    pub rounds: u64,
    pub seed: u64,
    pub runs: u32,
    /// Allow n < 3f + 1, alpha = 1 and horizons below [`MIN_ROUNDS`].
    #[serde(default)]
    pub unsafe_override: bool,
    /// Overrides f / n as the adversarial leader probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl SimConfig {
    pub fn new(n: u32, f: u32, variant: ProtocolVariant, strategy: AttackStrategy) -> Self {
        SimConfig {
            n,
            f,
            variant,
            strategy,
            rounds: 100_000,
            seed: 0,
            runs: 1,
            unsafe_override: false,
            alpha: None,
        }
    }

    pub fn with_rounds(mut self, rounds: u64) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_runs(mut self, runs: u32) -> Self {
        self.runs = runs;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(if self.n == 0 { 0.0 } else { self.f as f64 / self.n as f64 })
    }

    pub fn beta(&self) -> f64 {
        1.0 - self.alpha()
    }

    pub fn run_seed(&self, run: u32) -> u64 {
        self.seed.wrapping_add(run as u64)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::ZeroNodes);
        }
        if self.f > self.n {
            return Err(ConfigError::TooManyFaulty { n: self.n, f: self.f });
        }
        if !self.unsafe_override && (self.n as u64) < 3 * self.f as u64 + 1 {
            return Err(ConfigError::ResilienceBound { n: self.n, f: self.f });
        }
        if self.runs == 0 {
            return Err(ConfigError::ZeroRuns);
        }
        if !self.unsafe_override && self.rounds < MIN_ROUNDS {
            return Err(ConfigError::TooFewRounds(self.rounds));
        }
        let alpha = self.alpha();
        let limit_ok = if self.unsafe_override { alpha <= 1.0 } else { alpha < 1.0 };
        if !(alpha >= 0.0 && limit_ok) {
            return Err(ConfigError::AlphaOutOfRange(alpha));
        }
        self.strategy.check_variant(self.variant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u32, f: u32) -> SimConfig {
        SimConfig::new(n, f, ProtocolVariant::HotStuffPipelined, AttackStrategy::Forking)
    }

    #[test]
    fn resilience_bound() {
        assert!(cfg(16, 5).validate().is_ok());
        assert_eq!(cfg(16, 6).validate(), Err(ConfigError::ResilienceBound { n: 16, f: 6 }));
        let mut c = cfg(16, 6);
        c.unsafe_override = true;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn other_rejections() {
        assert_eq!(cfg(0, 0).validate(), Err(ConfigError::ZeroNodes));
        assert_eq!(cfg(4, 1).with_rounds(9).validate(), Err(ConfigError::TooFewRounds(9)));
        assert_eq!(cfg(4, 1).with_runs(0).validate(), Err(ConfigError::ZeroRuns));
        assert!(cfg(4, 1).with_alpha(1.0).validate().is_err());
        let mut c = cfg(4, 1);
        c.strategy = AttackStrategy::DelayLibra;
        assert!(matches!(c.validate(), Err(ConfigError::StrategyVariantMismatch { .. })));
    }

    #[test]
    fn alpha_from_counts() {
        assert_eq!(cfg(3, 1).alpha(), 1.0 / 3.0);
        assert_eq!(cfg(16, 5).beta(), 11.0 / 16.0);
        assert_eq!(cfg(16, 5).with_alpha(0.25).alpha(), 0.25);
    }
}
