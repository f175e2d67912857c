use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use starbf_core::agents::AgentHyperParams;
use starbf_core::controllers::{ActionLayout, Scheme};
use starbf_core::env::SystemConfig;

use crate::error::{Error, Result};

/// Everything a run needs. Every field defaults, so `{}` (or an empty file)
/// is the default system with the hybrid scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub scheme: Scheme,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub agent: AgentHyperParams,
    /// Where `train` writes checkpoints; the CLI `--out` overrides it.
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            scheme: Scheme::Hybrid,
            episodes: 300,
            seeds: (1..=5).collect(),
            agent: AgentHyperParams::default(),
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.agent.validate()?;
        if self.episodes == 0 {
            return Err(Error::config("episodes", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed required"));
        }
        ActionLayout::new(self.scheme, &self.system)?;
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let text = if text.trim().is_empty() { "{}" } else { text.as_str() };
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn save_config(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(cfg)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
