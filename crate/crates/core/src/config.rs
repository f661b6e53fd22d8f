//! Run configuration: tunable constants and enumeration budgets.
//!
//! The on-disk format is JSON:
//!
//! ```json
//! {
//!   "constants": { "y_constant": 1.0, "heavy_threshold": 16.0, ... },
//!   "budgets": { "max_codewords": 4194304, "max_received_words": 16777216, "max_subsets": 16777216 },
//!   "defaults": { "eta_rule": "1/log2(L)" }
//! }
//! ```
//!
//! Every key is optional; missing keys take the documented defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::ConstantsConfig;
use crate::error::{invalid, Result};

/// Upper limits on exhaustive enumerations. Exceeding one is an error, never
/// a silent approximation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Codewords materialized for distance and oracle computations.
    pub max_codewords: u64,
    /// Received words `q^n` scanned by the standard oracle.
    pub max_received_words: u64,
    /// Elementary word comparisons `q^n * N` in the standard oracle.
    pub max_comparisons: u64,
    /// Codeword subsets enumerated by exact plurality-mass and average-radius searches.
    pub max_subsets: u64,
    /// Columns of a Hadamard generator.
    pub max_hadamard_columns: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_codewords: 1 << 22,
            max_received_words: 1 << 24,
            max_comparisons: 1 << 28,
            max_subsets: 1 << 24,
            max_hadamard_columns: 1 << 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Defaults {
    /// Either `"1/log2(L)"` or a fixed number in `(0, 1/2]`.
    pub eta_rule: String,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            eta_rule: "1/log2(L)".to_string(),
        }
    }
}

impl Defaults {
    /// The chain parameter for list size `list_size`.
    pub fn eta(&self, list_size: usize) -> Result<f64> {
        let rule = self.eta_rule.trim();
        let eta = if rule == "1/log2(L)" {
            1.0 / (list_size as f64).log2()
        } else {
            rule.parse::<f64>()
                .map_err(|_| invalid(format!("unknown eta rule {rule:?}")))?
        };
        if !(eta > 0.0 && eta <= 0.5) {
            return Err(invalid(format!("eta = {eta} outside (0, 1/2] for L = {list_size}")));
        }
        Ok(eta)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub constants: ConstantsConfig,
    pub budgets: Budgets,
    pub defaults: Defaults,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Config = serde_json::from_str(&text)?;
        cfg.constants.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: Config =
            serde_json::from_str(r#"{"budgets": {"max_subsets": 10}, "constants": {"y_constant": 0.5}}"#)
                .unwrap();
        assert_eq!(cfg.budgets.max_subsets, 10);
        assert_eq!(cfg.budgets.max_codewords, 1 << 22);
        assert_eq!(cfg.constants.y_constant, 0.5);
        assert_eq!(cfg.defaults.eta_rule, "1/log2(L)");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"budget": {}}"#).is_err());
    }

    #[test]
    fn eta_rules() {
        let d = Defaults::default();
        assert!((d.eta(64).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!(d.eta(2).is_err()); // 1/log2(2) = 1 > 1/2
        let fixed = Defaults {
            eta_rule: "0.25".into(),
        };
        assert_eq!(fixed.eta(64).unwrap(), 0.25);
    }
}
