//! Model checkpoints as versioned TOML.
//!
//! Layout (version 1):
//!
//! ```toml
//! format = "qtl-checkpoint"
//! version = 1
//! seed = 7
//! config_hash = "<sha-256 hex of the ansatz and training config>"
//! train_mode = "joint"
//! free_params = [ ... ]          # free circuit angles, layer/qubit/slot order
//!
//! [ansatz]                       # family, layers, qubits, reuploading, entangler
//! [head]                         # classes, inputs, weights (row-major), biases, activation
//! [adapter]                      # optional dense adapter
//! [scaler]                       # optional min/max angle scaler
//! [train]                        # training config used
//! [metrics]                      # optional held-out metrics at save time
//! ```
//!
//! Readers reject any `format` other than `qtl-checkpoint` and any version
//! newer than [`CHECKPOINT_VERSION`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ansatz::{AnsatzSpec, ParamTensor};
use crate::data::AngleScaler;
use crate::error::{QtlError, Result};
use crate::hybrid::{Adapter, ClassicalHead, HybridModel, Metrics, TrainConfig, TrainMode};
use crate::scalar::Real;

pub const CHECKPOINT_FORMAT: &str = "qtl-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Checkpoint<T> {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub config_hash: String,
    pub train_mode: TrainMode,
    pub free_params: Vec<T>,
    pub ansatz: AnsatzSpec,
    pub head: ClassicalHead<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adapter: Option<Adapter<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaler: Option<AngleScaler<T>>,
    pub train: TrainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
}

/// SHA-256 (hex) of the TOML encoding of the ansatz and training config.
pub fn config_hash(spec: &AnsatzSpec, train: &TrainConfig) -> String {
    #[derive(Serialize)]
    struct Hashed<'a> {
        ansatz: &'a AnsatzSpec,
        train: &'a TrainConfig,
    }
    let text = toml::to_string(&Hashed { ansatz: spec, train }).expect("config serializes");
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl<T: Real> Checkpoint<T> {
    pub fn from_model(model: &HybridModel<T>, train: &TrainConfig, metrics: Option<Metrics>) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            seed: train.seed,
            config_hash: config_hash(&model.spec, train),
            train_mode: train.mode,
            free_params: model.params.free_values(),
            ansatz: model.spec,
            head: model.head.clone(),
            adapter: model.adapter.clone(),
            scaler: model.scaler.clone(),
            train: *train,
            metrics,
        }
    }

    pub fn to_model(&self) -> Result<HybridModel<T>> {
        let params = ParamTensor::from_free(&self.ansatz, &self.free_params)?;
        let mut model = HybridModel::new(self.ansatz, params, self.head.clone())?;
        model.adapter = self.adapter.clone();
        model.scaler = self.scaler.clone();
        Ok(model)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| QtlError::Validation(format!("checkpoint encode: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let ck: Self = toml::from_str(text).map_err(|e| QtlError::Parse {
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            msg: format!("checkpoint: {}", e.message()),
        })?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(QtlError::Validation(format!(
                "not a checkpoint (format '{}')",
                ck.format
            )));
        }
        if ck.version == 0 || ck.version > CHECKPOINT_VERSION {
            return Err(QtlError::Validation(format!(
                "unsupported checkpoint version {}",
                ck.version
            )));
        }
        if ck.config_hash != config_hash(&ck.ansatz, &ck.train) {
            return Err(QtlError::Validation("checkpoint config hash mismatch".into()));
        }
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_toml()?).map_err(|e| QtlError::io(&path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| QtlError::io(&path, e))?;
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::Family;
    use crate::hybrid::init_model;

    #[test]
    fn round_trip_preserves_model() {
        let spec = AnsatzSpec::new(Family::RealAmplitudes, 3, 3, false);
        let mut model: HybridModel<f64> = init_model(&spec, 2, 5).unwrap();
        model.scaler = Some(AngleScaler {
            mins: vec![-1.0, -2.0, 0.1],
            maxs: vec![1.0, 2.0, 0.7],
            lo: 0.0,
            hi: std::f64::consts::PI,
        });
        let cfg = TrainConfig::default();
        let ck = Checkpoint::from_model(&model, &cfg, None);
        let text = ck.to_toml().unwrap();
        let back = Checkpoint::<f64>::from_toml(&text).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_model().unwrap(), model);
    }

    #[test]
    fn rejects_foreign_or_tampered() {
        let spec = AnsatzSpec::new(Family::StrongEntangling, 1, 3, false);
        let model: HybridModel<f64> = init_model(&spec, 2, 5).unwrap();
        let ck = Checkpoint::from_model(&model, &TrainConfig::default(), None);
        let text = ck.to_toml().unwrap();
        assert!(Checkpoint::<f64>::from_toml(&text.replace("qtl-checkpoint", "other")).is_err());
        assert!(Checkpoint::<f64>::from_toml(&text.replace("version = 1", "version = 9")).is_err());
        assert!(Checkpoint::<f64>::from_toml(&text.replace("epochs = 20", "epochs = 21")).is_err());
    }
}
