//! Versioned JSON checkpoints: network config, flat parameters, optimizer
//! state, and the encoding pipeline settings needed to evaluate later.
//!
//! Parameters are stored as f64, which represents every f32 exactly, so
//! save/load round-trips are bit-exact in both precisions.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use skelimg_core::mapping::GlobalStats;
use skelimg_core::net::{
    MultiScaleNet, NetConfig, OptimizerConfig, OptimizerState, Real,
};

use crate::config::{MappingKind, Precision};
use crate::{Result, ToolError};

pub const FORMAT_VERSION: u32 = 1;

/// Everything the encoder needs to reproduce the training-time pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeSettings {
    pub mapping: MappingKind,
    /// Training-set stats, resolved at train time for the baseline mapping.
    pub stats: Option<GlobalStats>,
    pub channel_mask: String,
    /// Body-part layout as (name, 1-based joint indices) pairs.
    pub layout_parts: Vec<(String, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSnapshot {
    pub config: OptimizerConfig,
    pub velocity: Vec<f64>,
    pub epochs_done: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub precision: Precision,
    pub net: NetConfig,
    pub class_names: Vec<String>,
    pub encode: EncodeSettings,
    /// Seed the run was trained with; resuming continues its streams.
    pub seed: u64,
    pub params: Vec<f64>,
    pub optimizer: OptimizerSnapshot,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| ToolError::io(path, e))?;
        serde_json::to_writer(BufWriter::new(file), self)
            .map_err(|e| ToolError::Data(format!("writing checkpoint: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| ToolError::io(path, e))?;
        let ck: Checkpoint = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| ToolError::Data(format!("{}: bad checkpoint: {e}", path.display())))?;
        if ck.format_version != FORMAT_VERSION {
            return Err(ToolError::Data(format!(
                "checkpoint format {} unsupported (expected {FORMAT_VERSION})",
                ck.format_version
            )));
        }
        if ck.params.len() != ck.optimizer.velocity.len() {
            return Err(ToolError::Data(
                "checkpoint parameter/velocity length mismatch".into(),
            ));
        }
        Ok(ck)
    }

    pub fn from_state<T: Real>(
        net: &MultiScaleNet<T>,
        state: &OptimizerState<T>,
        precision: Precision,
        class_names: Vec<String>,
        encode: EncodeSettings,
        seed: u64,
    ) -> Self {
        Checkpoint {
            format_version: FORMAT_VERSION,
            precision,
            net: net.config().clone(),
            class_names,
            encode,
            seed,
            params: net.params().iter().map(|v| v.to_f64().unwrap()).collect(),
            optimizer: OptimizerSnapshot {
                config: state.config.clone(),
                velocity: state.velocity.iter().map(|v| v.to_f64().unwrap()).collect(),
                epochs_done: state.epochs_done,
            },
        }
    }

    /// Rebuild the network and optimizer in precision `T`.
    pub fn to_state<T: Real>(&self) -> Result<(MultiScaleNet<T>, OptimizerState<T>)> {
        let params: Vec<T> = self
            .params
            .iter()
            .map(|&v| T::from(v).expect("finite param"))
            .collect();
        let net = MultiScaleNet::from_params(self.net.clone(), params)
            .map_err(|e| ToolError::Data(format!("checkpoint net invalid: {e}")))?;
        let mut state = OptimizerState::new(self.optimizer.config.clone(), net.param_count());
        state.velocity = self
            .optimizer
            .velocity
            .iter()
            .map(|&v| T::from(v).expect("finite velocity"))
            .collect();
        state.epochs_done = self.optimizer.epochs_done;
        Ok((net, state))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use skelimg_core::net::{ConvBlock, TrunkConfig};

    fn small_net_config() -> NetConfig {
        NetConfig {
            trunk: TrunkConfig {
                blocks: vec![ConvBlock {
                    out_channels: 4,
                    stride: 1,
                    pool: true,
                }],
            },
            scales: vec![8, 6],
            class_count: 3,
            avg_head: skelimg_core::net::AvgHeadMode::Logits,
            shared_classifier: true,
        }
    }

    fn settings() -> EncodeSettings {
        EncodeSettings {
            mapping: MappingKind::Proposed,
            stats: None,
            channel_mask: "xyz".into(),
            layout_parts: vec![("all".into(), (1..=10).collect())],
        }
    }

    #[test]
    fn save_load_round_trips_f32_params_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let net: MultiScaleNet<f32> = MultiScaleNet::new(small_net_config(), 3).unwrap();
        let mut state = OptimizerState::new(OptimizerConfig::sgd_default(), net.param_count());
        state.velocity[2] = 0.123456789_f32;
        state.epochs_done = 7;

        let ck = Checkpoint::from_state(
            &net,
            &state,
            Precision::F32,
            vec!["a".into(), "b".into(), "c".into()],
            settings(),
            42,
        );
        let path = dir.path().join("ck.json");
        ck.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(loaded, ck);

        let (net2, state2): (MultiScaleNet<f32>, _) = loaded.to_state().unwrap();
        assert_eq!(net2.params(), net.params());
        assert_eq!(state2.velocity, state.velocity);
        assert_eq!(state2.epochs_done, 7);
    }

    #[test]
    fn saving_twice_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let net: MultiScaleNet<f64> = MultiScaleNet::new(small_net_config(), 5).unwrap();
        let state = OptimizerState::new(OptimizerConfig::sgd_default(), net.param_count());
        let ck = Checkpoint::from_state(
            &net,
            &state,
            Precision::F64,
            vec!["x".into(), "y".into(), "z".into()],
            settings(),
            1,
        );
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        ck.save(&a).unwrap();
        ck.save(&b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn wrong_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let net: MultiScaleNet<f64> = MultiScaleNet::new(small_net_config(), 5).unwrap();
        let state = OptimizerState::new(OptimizerConfig::sgd_default(), net.param_count());
        let mut ck = Checkpoint::from_state(
            &net,
            &state,
            Precision::F64,
            vec!["x".into(), "y".into(), "z".into()],
            settings(),
            1,
        );
        ck.format_version = 99;
        let path = dir.path().join("bad.json");
        ck.save(&path).unwrap();
        assert!(Checkpoint::load(&path).is_err());
    }
}
