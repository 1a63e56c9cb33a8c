//! Model specifications as they appear in run-config files.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_PARAM_CAP: usize = 50_000;

fn default_param_cap() -> usize {
    DEFAULT_PARAM_CAP
}

fn default_width() -> usize {
    64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Relu,
    Tanh,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    /// Fully connected net: input -> hidden... -> classes.
    Mlp { hidden: Vec<usize> },
    /// Minimal 1-d convnet: kernel-3 valid convolutions over the input
    /// treated as a single-channel sequence, global average pooling, and a
    /// linear head.
    Convnet { channels: Vec<usize> },
    /// Two hidden dense layers of one configurable width. The wide dense
    /// dimension is what makes optimizer-side block averaging over a whole
    /// layer width observable at desk scale.
    WideDense {
        #[serde(default = "default_width")]
        width: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    pub input_dim: usize,
    pub classes: usize,
    pub activation: Activation,
    /// Evaluation-mode batch normalization with frozen statistics.
    #[serde(default)]
    pub batchnorm: bool,
    #[serde(default = "default_param_cap")]
    pub param_cap: usize,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::config("model.input_dim", "must be positive"));
        }
        if self.classes < 2 {
            return Err(Error::config("model.classes", "need at least 2 classes"));
        }
        match &self.kind {
            ModelKind::Mlp { hidden } => {
                if hidden.is_empty() {
                    return Err(Error::config("model.hidden", "need at least one hidden layer"));
                }
                if hidden.iter().any(|&h| h == 0) {
                    return Err(Error::config("model.hidden", "layer sizes must be positive"));
                }
            }
            ModelKind::Convnet { channels } => {
                if channels.is_empty() {
                    return Err(Error::config(
                        "model.channels",
                        "need at least one conv layer",
                    ));
                }
                if channels.iter().any(|&c| c == 0) {
                    return Err(Error::config("model.channels", "channel counts must be positive"));
                }
                let shrink = 2 * channels.len();
                if self.input_dim <= shrink {
                    return Err(Error::config(
                        "model.channels",
                        format!(
                            "input length {} too short for {} kernel-3 valid convolutions",
                            self.input_dim,
                            channels.len()
                        ),
                    ));
                }
            }
            ModelKind::WideDense { width } => {
                if *width == 0 {
                    return Err(Error::config("model.width", "width must be positive"));
                }
            }
        }
        Ok(())
    }
}
