//! Model configuration read from JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbmod::ModuleSpec;

fn default_tol() -> f64 {
    1e-9
}

fn default_frame_size() -> usize {
    1
}

/// `{"fibers": [2, 3], "seed": 7, "tol": 1e-9, "frame_size": 1}`; `seed`,
/// `tol` and `frame_size` are optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub fibers: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_frame_size")]
    pub frame_size: usize,
}

impl ModelConfig {
    pub fn new(fibers: Vec<usize>) -> Self {
        ModelConfig {
            fibers,
            seed: 0,
            tol: default_tol(),
            frame_size: default_frame_size(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ModelConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fibers.is_empty() {
            return Err(Error::InvalidConfig("fibers must be nonempty".into()));
        }
        if self.fibers.contains(&0) {
            return Err(Error::InvalidConfig(
                "fiber dimensions must be positive".into(),
            ));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.frame_size == 0 {
            return Err(Error::InvalidConfig("frame_size must be positive".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ModuleSpec> {
        self.validate()?;
        ModuleSpec::new(self.fibers.clone())
    }
}
