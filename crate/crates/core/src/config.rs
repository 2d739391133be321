//! Engine configuration shared by the CLI and the benchmark.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::InferenceConfig;
use crate::rulebase::{RuleError, WidthConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Widths(#[from] RuleError),
    #[error("tau must lie in [0, 1], got {0}")]
    TauOutOfRange(f64),
    #[error("adjacency gate must be nonnegative and finite, got {0}")]
    BadAdjacencyGate(f64),
    #[error("tie tolerance must be nonnegative and finite, got {0}")]
    BadTieTolerance(f64),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// All tunables in one place. Every field has a default, so a config file
/// may set any subset.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Trapezoid half-width parameters used at induction time.
    pub widths: WidthConfig,
    /// Merge retention threshold on shape membership.
    pub tau: f64,
    /// Merge adjacency gate as a fraction of the model diagonal.
    pub adjacency_gate: f64,
    /// Absolute score gap under which classes tie.
    pub tie_tolerance: f64,
    /// Rescale class scores so a perfect match reaches 1.0.
    pub normalize_perfect_match: bool,
    /// Benchmark random seed.
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            widths: WidthConfig::default(),
            tau: 0.5,
            adjacency_gate: 0.1,
            tie_tolerance: 1e-9,
            normalize_perfect_match: false,
            seed: 1,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.widths.validate()?;
        if !(0.0..=1.0).contains(&self.tau) || !self.tau.is_finite() {
            return Err(ConfigError::TauOutOfRange(self.tau));
        }
        if !self.adjacency_gate.is_finite() || self.adjacency_gate < 0.0 {
            return Err(ConfigError::BadAdjacencyGate(self.adjacency_gate));
        }
        if !self.tie_tolerance.is_finite() || self.tie_tolerance < 0.0 {
            return Err(ConfigError::BadTieTolerance(self.tie_tolerance));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self, ConfigError> {
        let cfg: Config = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn inference(&self) -> InferenceConfig {
        InferenceConfig {
            tie_tolerance: self.tie_tolerance,
            normalize_perfect_match: self.normalize_perfect_match,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.tau, 0.5);
        assert_eq!(cfg.adjacency_gate, 0.1);
        assert_eq!(cfg.widths.shape_core, 0.15);
        assert_eq!(cfg.seed, 1);
        assert!(!cfg.normalize_perfect_match);
    }

    #[test]
    fn partial_config_files_fill_from_defaults() {
        let cfg = Config::from_json(r#"{"tau": 0.3}"#).unwrap();
        assert_eq!(cfg.tau, 0.3);
        assert_eq!(cfg.adjacency_gate, 0.1);
        let cfg = Config::from_json(r#"{"widths": {"shape_support": 0.6}}"#).unwrap();
        assert_eq!(cfg.widths.shape_support, 0.6);
        assert_eq!(cfg.widths.shape_core, 0.15);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(Config::from_json(r#"{"tau": 1.5}"#).is_err());
        assert!(Config::from_json(r#"{"adjacency_gate": -0.2}"#).is_err());
        assert!(Config::from_json(r#"{"widths": {"shape_core": 0.9}}"#).is_err());
        assert!(Config::from_json("not json").is_err());
    }
}
