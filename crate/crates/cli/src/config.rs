//! Run configuration: one JSON file describing the dataset, encoding,
//! augmentation, network, and optimizer of a reproducible run.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use skelimg_core::augment::AugmentationSpec;
use skelimg_core::net::{AvgHeadMode, NetConfig, OptimizerConfig, TrunkConfig};
use skelimg_core::synth::SynthSpec;

use crate::{Result, ToolError};

/// Where sequences come from: a manifest on disk or an in-memory synthetic
/// dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    Manifest { path: PathBuf },
    Synth(SynthSpec),
}

/// Which quantization the encoder applies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MappingKind {
    #[default]
    Proposed,
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MappingSetting {
    #[serde(default)]
    pub kind: MappingKind,
    /// Stats file produced by `skelimg stats`; required for the baseline.
    #[serde(default)]
    pub stats: Option<PathBuf>,
}

/// Network shape without the class count (which the dataset determines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSettings {
    #[serde(default = "default_trunk")]
    pub trunk: TrunkConfig,
    #[serde(default = "default_scales")]
    pub scales: Vec<usize>,
    #[serde(default = "default_avg_head")]
    pub avg_head: AvgHeadMode,
    #[serde(default = "default_true")]
    pub shared_classifier: bool,
}

fn default_trunk() -> TrunkConfig {
    TrunkConfig::desk_default()
}

fn default_scales() -> Vec<usize> {
    vec![64, 48, 32]
}

fn default_avg_head() -> AvgHeadMode {
    AvgHeadMode::Logits
}

fn default_true() -> bool {
    true
}

impl Default for NetSettings {
    fn default() -> Self {
        NetSettings {
            trunk: default_trunk(),
            scales: default_scales(),
            avg_head: default_avg_head(),
            shared_classifier: true,
        }
    }
}

impl NetSettings {
    pub fn to_net_config(&self, class_count: usize) -> NetConfig {
        NetConfig {
            trunk: self.trunk.clone(),
            scales: self.scales.clone(),
            class_count,
            avg_head: self.avg_head,
            shared_classifier: self.shared_classifier,
        }
    }
}

/// Numeric precision of network parameters and activations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F32,
    F64,
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Precision::F32 => f.write_str("f32"),
            Precision::F64 => f.write_str("f64"),
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "f32" | "single" => Ok(Precision::F32),
            "f64" | "double" => Ok(Precision::F64),
            other => Err(format!("unknown precision {other:?} (use f32 or f64)")),
        }
    }
}

/// One reproducible run: everything an invocation needs besides its output
/// directory, which may also come from a flag or `SKELIMG_OUT_DIR`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    /// Layout file path; defaults to the built-in layout for the dataset's
    /// joint count.
    #[serde(default)]
    pub layout: Option<PathBuf>,
    #[serde(default)]
    pub mapping: MappingSetting,
    /// Kept coordinate channels, e.g. "xyz", "xy", "z".
    #[serde(default = "default_mask")]
    pub channel_mask: String,
    /// Training-split expansion; absent means no augmentation.
    #[serde(default)]
    pub augmentation: Option<AugmentationSpec>,
    #[serde(default)]
    pub net: NetSettings,
    #[serde(default = "OptimizerConfig::sgd_default")]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default)]
    pub precision: Precision,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_mask() -> String {
    "xyz".into()
}

fn default_epochs() -> usize {
    30
}

fn default_batch() -> usize {
    32
}

impl RunConfig {
    /// A full desk-scale synthetic run.
    pub fn desk_default(seed: u64) -> Self {
        RunConfig {
            dataset: DatasetSource::Synth(SynthSpec::desk_default(seed)),
            layout: None,
            mapping: MappingSetting::default(),
            channel_mask: default_mask(),
            augmentation: None,
            net: NetSettings::default(),
            optimizer: OptimizerConfig::sgd_default(),
            epochs: default_epochs(),
            batch_size: default_batch(),
            precision: Precision::F32,
            seed,
            out_dir: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| ToolError::io(path, e))?;
        let config: RunConfig = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| ToolError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Full validation; every command runs this before touching the
    /// filesystem.
    pub fn validate(&self) -> Result<()> {
        if let DatasetSource::Synth(spec) = &self.dataset {
            spec.validate()
                .map_err(|e| ToolError::Config(e.to_string()))?;
        }
        skelimg_core::skeleton::ChannelMask::from_axes(&self.channel_mask)
            .map_err(|e| ToolError::Config(e.to_string()))?;
        if let Some(aug) = &self.augmentation {
            aug.validate().map_err(|e| ToolError::Config(e.to_string()))?;
        }
        if self.batch_size == 0 {
            return Err(ToolError::Config("batch_size must be positive".into()));
        }
        if self.mapping.kind == MappingKind::Baseline && self.mapping.stats.is_none() {
            return Err(ToolError::Config(
                "baseline mapping needs a stats file; run `skelimg stats` first and set mapping.stats"
                    .into(),
            ));
        }
        // Class count is dataset-dependent; validate the rest of the net
        // config with a placeholder.
        self.net
            .to_net_config(2)
            .validate()
            .map_err(|e| ToolError::Config(e.to_string()))?;
        if !(self.optimizer.schedule.base.is_finite() && self.optimizer.schedule.base >= 0.0) {
            return Err(ToolError::Config("learning rate must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// Output directory resolution: flag > config > SKELIMG_OUT_DIR > "./out".
    pub fn resolve_out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(dir) = flag {
            return dir.to_path_buf();
        }
        if let Some(dir) = &self.out_dir {
            return dir.clone();
        }
        if let Ok(dir) = std::env::var("SKELIMG_OUT_DIR") {
            return PathBuf::from(dir);
        }
        PathBuf::from("out")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_default_validates_and_round_trips() {
        let config = RunConfig::desk_default(7);
        config.validate().unwrap();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let text = r#"{
            "dataset": {"synth": {
                "class_count": 3, "sequences_per_class": 12, "joint_count": 10,
                "frame_range": [10, 20], "base_noise": 0.01,
                "test_fraction": 0.25, "seed": 1
            }},
            "seed": 5
        }"#;
        let config: RunConfig = serde_json::from_str(text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.epochs, 30);
        assert_eq!(config.batch_size, 32);
        assert_eq!(config.channel_mask, "xyz");
        assert_eq!(config.net.scales, vec![64, 48, 32]);
        assert_eq!(config.precision, Precision::F32);
    }

    #[test]
    fn baseline_without_stats_is_rejected() {
        let mut config = RunConfig::desk_default(1);
        config.mapping.kind = MappingKind::Baseline;
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("stats"));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"dataset": {"manifest": {"path": "m.json"}}, "seed": 1, "bogus": 2}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn bad_mask_fails_validation() {
        let mut config = RunConfig::desk_default(1);
        config.channel_mask = "q".into();
        assert!(config.validate().is_err());
    }
}
