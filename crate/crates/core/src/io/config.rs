//! Versioned run-config file (TOML) and its provenance hash.

use crate::error::{Error, Result};
use crate::models::{DatasetConfig, ModelSpec};
use crate::optim::OptimizerConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

fn default_schema_version() -> u32 {
    crate::SCHEMA_VERSION
}

fn default_analysis_batch() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FineTuneInit {
    /// Checkpoint whose weights seed this run. Segment tables must match.
    pub from_checkpoint: String,
    /// Re-draw the input-facing and classifier layers after loading.
    #[serde(default)]
    pub reinit_input_and_head: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Emit a checkpoint every this many epochs (the final epoch is always
    /// included).
    pub checkpoint_every: usize,
    /// Fixed batch size used for HESD analysis.
    #[serde(default = "default_analysis_batch")]
    pub analysis_batch: usize,
    #[serde(default)]
    pub init: Option<FineTuneInit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub run_id: String,
    pub seed: u64,
    pub model: ModelSpec,
    pub dataset: DatasetConfig,
    pub optimizer: OptimizerConfig,
    pub training: TrainingConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version > crate::SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                supported: crate::SCHEMA_VERSION,
            });
        }
        if self.run_id.is_empty() {
            return Err(Error::config("run_id", "must be non-empty"));
        }
        self.model.validate()?;
        self.dataset.validate()?;
        self.optimizer.validate()?;
        if self.model.input_dim != self.dataset.input_dim {
            return Err(Error::config(
                "dataset.input_dim",
                format!(
                    "dataset input_dim {} != model input_dim {}",
                    self.dataset.input_dim, self.model.input_dim
                ),
            ));
        }
        if self.model.classes != self.dataset.classes {
            return Err(Error::config(
                "dataset.classes",
                format!(
                    "dataset classes {} != model classes {}",
                    self.dataset.classes, self.model.classes
                ),
            ));
        }
        if self.training.epochs == 0 {
            return Err(Error::config("training.epochs", "must be positive"));
        }
        if self.training.batch_size == 0 {
            return Err(Error::config("training.batch_size", "must be positive"));
        }
        if self.training.checkpoint_every == 0 {
            return Err(Error::config("training.checkpoint_every", "must be positive"));
        }
        if self.training.analysis_batch == 0 {
            return Err(Error::config("training.analysis_batch", "must be positive"));
        }
        Ok(())
    }

    /// Canonical serialization; what the config hash is computed over.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Hex SHA-256 of the canonical serialization. Format-insensitive:
    /// reformatting the config file does not change the hash.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_toml().as_bytes());
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = toml::from_str(text)?;
    config.validate()?;
    Ok(config)
}

pub fn load_run_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_run_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
run_id = "demo"
seed = 42

[model]
kind = "mlp"
hidden = [8]
input_dim = 4
classes = 3
activation = "tanh"

[dataset]
kind = "gaussian-blobs"
samples = 60
input_dim = 4
classes = 3
seed = 1
shift = 2.0

[optimizer]
kind = "sgd"
lr = 0.05

[training]
epochs = 10
batch_size = 20
checkpoint_every = 5
"#;

    #[test]
    fn minimal_config_parses_and_validates() {
        let cfg = parse_run_config(MINIMAL).unwrap();
        assert_eq!(cfg.run_id, "demo");
        assert_eq!(cfg.training.analysis_batch, 256);
        assert_eq!(cfg.optimizer.kind.name(), "sgd");
    }

    #[test]
    fn hash_is_format_insensitive_but_value_sensitive() {
        let a = parse_run_config(MINIMAL).unwrap();
        let reformatted = MINIMAL.replace("lr = 0.05", "lr    =    0.05");
        let b = parse_run_config(&reformatted).unwrap();
        assert_eq!(a.hash(), b.hash());
        let changed = MINIMAL.replace("lr = 0.05", "lr = 0.06");
        let c = parse_run_config(&changed).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn unknown_optimizer_kind_is_a_config_error() {
        let bad = MINIMAL.replace("kind = \"sgd\"", "kind = \"sgdx\"");
        let err = parse_run_config(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("kind") || msg.to_lowercase().contains("variant"), "{msg}");
    }

    #[test]
    fn mismatched_dims_name_the_field() {
        let bad = MINIMAL.replace("input_dim = 4\nclasses = 3\nseed = 1", "input_dim = 5\nclasses = 3\nseed = 1");
        let err = parse_run_config(&bad).unwrap_err();
        assert!(err.to_string().contains("input_dim"), "{err}");
    }

    #[test]
    fn newer_schema_major_is_rejected() {
        let bad = format!("schema_version = 999\n{MINIMAL}");
        assert!(matches!(
            parse_run_config(&bad),
            Err(Error::SchemaVersion { .. })
        ));
    }
}
