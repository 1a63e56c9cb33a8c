//! Training loop: deterministic mini-batching, optional freezing and
//! fine-tune initialization, checkpoint emission on a fixed cadence.

use crate::autodiff::{accuracy, hvp, loss_and_gradient, ParameterVector};
use crate::error::{Error, Result};
use crate::io::config::RunConfig;
use crate::models::{build_model, make_dataset, FeedforwardModel, SyntheticDataset};
use crate::optim::{
    adahessian_step, adamw_step, clip_global_norm, sgd_momentum_step, sgd_step, AdaHessianParams,
    AdamWParams, OptimizerKind, OptimizerState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Weights plus bookkeeping for one emitted epoch.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub epoch: usize,
    pub params: ParameterVector,
    pub train_accuracy: f64,
    pub gen_accuracy: f64,
    pub optimizer_kind: String,
    pub run_id: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
    pub gen_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub checkpoints: Vec<Checkpoint>,
    pub metrics: Vec<EpochMetrics>,
    pub final_params: ParameterVector,
    /// Set when the run terminated early on a non-finite loss; the
    /// checkpoints collected so far are kept.
    pub diverged: Option<String>,
}

struct FrozenMask {
    ranges: Vec<std::ops::Range<usize>>,
    values: Vec<Vec<f64>>,
}

impl FrozenMask {
    fn new(params: &ParameterVector, names: &[String]) -> Result<Self> {
        let mut ranges = Vec::new();
        let mut values = Vec::new();
        for name in names {
            let seg = params
                .segment(name)
                .ok_or_else(|| Error::UnknownSegment(name.clone()))?;
            ranges.push(seg.range());
            values.push(params.values()[seg.range()].to_vec());
        }
        Ok(Self { ranges, values })
    }

    fn zero_grads(&self, grads: &mut ParameterVector) {
        for range in &self.ranges {
            grads.values_mut()[range.clone()].fill(0.0);
        }
    }

    fn restore(&self, params: &mut ParameterVector) {
        for (range, vals) in self.ranges.iter().zip(&self.values) {
            params.values_mut()[range.clone()].copy_from_slice(vals);
        }
    }
}

fn shuffled_indices(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x5491_0000 + epoch as u64);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

/// Run the configured training and return the checkpoint series.
pub fn run_training(config: &RunConfig) -> Result<TrainingRun> {
    config.validate()?;
    let (model, mut params) = build_model(&config.model, config.seed)?;
    let dataset = make_dataset(&config.dataset)?;

    if let Some(init) = &config.training.init {
        let loaded = crate::io::load_checkpoint(&init.from_checkpoint)?;
        if !loaded.params.same_layout(&params) {
            return Err(Error::config(
                "training.init.from_checkpoint",
                "checkpoint segment table does not match this model",
            ));
        }
        params = loaded.params;
        if init.reinit_input_and_head {
            model.reinit_input_and_head(&mut params, config.seed ^ 0x51d3_c0de);
        }
    }

    train_loop(config, &model, params, &dataset)
}

fn train_loop(
    config: &RunConfig,
    model: &FeedforwardModel,
    mut params: ParameterVector,
    dataset: &SyntheticDataset,
) -> Result<TrainingRun> {
    let frozen = FrozenMask::new(&params, &config.optimizer.frozen_segments)?;
    let mut state = OptimizerState::new();
    let mut hutchinson_rng = ChaCha8Rng::seed_from_u64(config.seed);
    hutchinson_rng.set_stream(0xada);

    let n = dataset.train.len();
    let batch_size = config.training.batch_size.min(n);
    let mut checkpoints = Vec::new();
    let mut metrics = Vec::new();
    let mut diverged = None;

    'epochs: for epoch in 1..=config.training.epochs {
        let order = shuffled_indices(n, config.seed, epoch);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(batch_size) {
            let batch = dataset.train.select(chunk);
            let (loss, mut grads) = match loss_and_gradient(model, &params, &batch) {
                Ok(ok) => ok,
                Err(Error::NonFinite { context }) => {
                    diverged = Some(format!("epoch {epoch}: non-finite {context}"));
                    break 'epochs;
                }
                Err(e) => return Err(e),
            };
            loss_sum += loss;
            batches += 1;
            frozen.zero_grads(&mut grads);
            if let Some(c) = config.optimizer.clip_global_norm {
                clip_global_norm(&mut grads, c);
            }

            let step_result = match &config.optimizer.kind {
                OptimizerKind::Sgd { lr } => sgd_step(&mut params, &grads, *lr),
                OptimizerKind::SgdMomentum { lr, momentum } => {
                    sgd_momentum_step(&mut params, &mut state, &grads, *lr, *momentum)
                }
                OptimizerKind::Adamw {
                    lr,
                    beta1,
                    beta2,
                    eps,
                    weight_decay,
                } => adamw_step(
                    &mut params,
                    &mut state,
                    &grads,
                    &AdamWParams {
                        lr: *lr,
                        beta1: *beta1,
                        beta2: *beta2,
                        eps: *eps,
                        weight_decay: *weight_decay,
                    },
                ),
                OptimizerKind::Adahessian {
                    lr,
                    beta1,
                    beta2,
                    eps,
                    probes_per_step,
                    block_size,
                    hessian_power,
                } => {
                    let p = AdaHessianParams {
                        lr: *lr,
                        beta1: *beta1,
                        beta2: *beta2,
                        eps: *eps,
                        probes_per_step: *probes_per_step,
                        block_size: *block_size,
                        hessian_power: *hessian_power,
                    };
                    let params_snapshot = params.clone();
                    let op = |v: &ParameterVector| hvp(model, &params_snapshot, &batch, v);
                    adahessian_step(&mut params, &mut state, &grads, &op, &p, &mut hutchinson_rng)
                }
            };
            match step_result {
                Ok(()) => {}
                Err(Error::NonFinite { context }) => {
                    diverged = Some(format!("epoch {epoch}: non-finite {context}"));
                    break 'epochs;
                }
                Err(e) => return Err(e),
            }
            frozen.restore(&mut params);
        }

        let train_accuracy = accuracy(model, &params, &dataset.train)?;
        let gen_accuracy = accuracy(model, &params, &dataset.generalization)?;
        metrics.push(EpochMetrics {
            epoch,
            mean_loss: loss_sum / batches.max(1) as f64,
            train_accuracy,
            gen_accuracy,
        });

        if epoch % config.training.checkpoint_every == 0 || epoch == config.training.epochs {
            checkpoints.push(Checkpoint {
                epoch,
                params: params.clone(),
                train_accuracy,
                gen_accuracy,
                optimizer_kind: config.optimizer.kind.name().to_string(),
                run_id: config.run_id.clone(),
                seed: config.seed,
            });
        }
    }

    Ok(TrainingRun {
        checkpoints,
        metrics,
        final_params: params,
        diverged,
    })
}
