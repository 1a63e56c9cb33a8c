//! Optimizers and the training loop that produces checkpoint series,
//! including the gradient-manipulating regimes (Hessian-diagonal spatial
//! averaging, global-norm clipping) that distort observed spectra.

mod adahessian;
mod steps;
pub mod train;

pub use adahessian::{adahessian_step, hutchinson_diagonal, spatial_average_abs, AdaHessianParams};
pub use steps::{adamw_step, clip_global_norm, sgd_momentum_step, sgd_step, AdamWParams};
pub use train::{run_training, Checkpoint, EpochMetrics, TrainingRun};

use crate::autodiff::ParameterVector;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

fn default_momentum() -> f64 {
    0.9
}

fn default_beta1() -> f64 {
    0.9
}

fn default_beta2() -> f64 {
    0.999
}

fn default_eps() -> f64 {
    1e-8
}

fn default_one() -> usize {
    1
}

fn default_hessian_power() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimizerKind {
    Sgd {
        lr: f64,
    },
    SgdMomentum {
        lr: f64,
        #[serde(default = "default_momentum")]
        momentum: f64,
    },
    Adamw {
        lr: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default)]
        weight_decay: f64,
    },
    Adahessian {
        lr: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        eps: f64,
        /// Hutchinson probes per step for the diagonal estimate.
        #[serde(default = "default_one")]
        probes_per_step: usize,
        /// Spatial-averaging block size; 1 disables averaging, a layer
        /// width reproduces the wide-dimension averaging regime.
        #[serde(default = "default_one")]
        block_size: usize,
        /// Exponent k in the (√v̂)^k denominator.
        #[serde(default = "default_hessian_power")]
        hessian_power: f64,
    },
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd { .. } => "sgd",
            OptimizerKind::SgdMomentum { .. } => "sgd-momentum",
            OptimizerKind::Adamw { .. } => "adamw",
            OptimizerKind::Adahessian { .. } => "adahessian",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    #[serde(flatten)]
    pub kind: OptimizerKind,
    /// Clip gradients to this global L2 norm before the step.
    #[serde(default)]
    pub clip_global_norm: Option<f64>,
    /// Segments whose values stay bit-identical across the run.
    #[serde(default)]
    pub frozen_segments: Vec<String>,
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let lr = match self.kind {
            OptimizerKind::Sgd { lr } => lr,
            OptimizerKind::SgdMomentum { lr, momentum } => {
                if !(0.0..1.0).contains(&momentum) {
                    return Err(Error::config("optimizer.momentum", "must be in [0, 1)"));
                }
                lr
            }
            OptimizerKind::Adamw {
                lr,
                beta1,
                beta2,
                eps,
                weight_decay,
            } => {
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
                    return Err(Error::config("optimizer.beta", "betas must be in [0, 1)"));
                }
                if eps <= 0.0 {
                    return Err(Error::config("optimizer.eps", "must be positive"));
                }
                if weight_decay < 0.0 {
                    return Err(Error::config("optimizer.weight_decay", "must be >= 0"));
                }
                lr
            }
            OptimizerKind::Adahessian {
                lr,
                beta1,
                beta2,
                eps,
                probes_per_step,
                block_size,
                hessian_power,
            } => {
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
                    return Err(Error::config("optimizer.beta", "betas must be in [0, 1)"));
                }
                if eps <= 0.0 {
                    return Err(Error::config("optimizer.eps", "must be positive"));
                }
                if probes_per_step == 0 {
                    return Err(Error::config("optimizer.probes_per_step", "must be >= 1"));
                }
                if block_size == 0 {
                    return Err(Error::config("optimizer.block_size", "must be >= 1"));
                }
                if hessian_power <= 0.0 {
                    return Err(Error::config("optimizer.hessian_power", "must be positive"));
                }
                lr
            }
        };
        if lr <= 0.0 {
            return Err(Error::config("optimizer.lr", "learning rate must be positive"));
        }
        if let Some(c) = self.clip_global_norm {
            if c <= 0.0 {
                return Err(Error::config("optimizer.clip_global_norm", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Moment buffers shared by all optimizers; unused ones stay `None`.
#[derive(Debug, Clone, Default)]
pub struct OptimizerState {
    pub step: usize,
    /// Momentum velocity or Adam-style first moment.
    pub first_moment: Option<ParameterVector>,
    /// Second moment (of gradients for AdamW, of the averaged Hessian
    /// diagonal for AdaHessian).
    pub second_moment: Option<ParameterVector>,
    /// Latest spatially averaged |D| estimate (AdaHessian only).
    pub hessian_diag: Option<ParameterVector>,
}

impl OptimizerState {
    pub fn new() -> Self {
        Self::default()
    }
}
