//! Versioned run configuration shared by all subcommands.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use spectral_transfer::spectral::{PcaFitConfig, Projection};
use spectral_transfer::synth::SceneConfig;
use spectral_transfer::transfer::TransferConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcaSection {
    pub k: usize,
    pub max_samples: usize,
    pub seed: u64,
}

impl Default for PcaSection {
    fn default() -> Self {
        let fit = PcaFitConfig::default();
        Self {
            k: 3,
            max_samples: fit.max_samples,
            seed: fit.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub synth: SceneConfig,
    pub transfer: TransferConfig,
    pub pca: PcaSection,
    /// Cube rendering the transfer matches against.
    pub projection: Projection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            synth: SceneConfig::default(),
            transfer: TransferConfig::default(),
            pca: PcaSection::default(),
            projection: Projection::Mean,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if cfg.version != CONFIG_VERSION {
            bail!(
                "config {} has schema version {}, expected {CONFIG_VERSION}",
                path.display(),
                cfg.version
            );
        }
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> anyhow::Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}
