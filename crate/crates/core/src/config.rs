//! Plain-text grid configuration.
//!
//! ```text
//! rows = 32
//! cols = 32
//! canvas = 512
//! sigma_ratio = 4.0
//! cutoff_ratio = 2.0
//! dropout_rate = 0.1
//! seed = 7
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phosphene::{PhospheneGrid, DEFAULT_CUTOFF_RATIO, DEFAULT_SIGMA_RATIO};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    /// Side of the square output canvas in pixels.
    pub canvas: usize,
    pub sigma_ratio: f64,
    pub cutoff_ratio: f64,
    pub dropout_rate: f64,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            rows: 32,
            cols: 32,
            canvas: 512,
            sigma_ratio: DEFAULT_SIGMA_RATIO,
            cutoff_ratio: DEFAULT_CUTOFF_RATIO,
            dropout_rate: 0.10,
            seed: 0,
        }
    }
}

impl GridConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("grid config is always representable")
    }

    /// Builds the lattice and applies this config's dropout.
    pub fn build(&self) -> Result<PhospheneGrid> {
        PhospheneGrid::build_with_ratios(
            self.rows,
            self.cols,
            self.canvas,
            self.canvas,
            self.sigma_ratio,
            self.cutoff_ratio,
        )?
        .apply_dropout(self.dropout_rate, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let text = "rows = 32\ncols = 32\ncanvas = 512\nsigma_ratio = 4.0\ncutoff_ratio = 2.0\ndropout_rate = 0.1\nseed = 7\n";
        let cfg = GridConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.build().unwrap().alive_count(), 922);
        assert_eq!(GridConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn missing_keys_take_defaults_and_unknown_keys_fail() {
        assert_eq!(GridConfig::from_toml_str("").unwrap(), GridConfig::default());
        assert!(GridConfig::from_toml_str("radius = 3").is_err());
    }
}
