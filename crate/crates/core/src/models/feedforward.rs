//! Concrete forward passes for the three toy architectures.

use crate::autodiff::tape::{Tape, VarId};
use crate::autodiff::{
    mean_cross_entropy, Batch, Classifier, Model, ParameterVector,
};
use crate::error::{Error, Result};
use crate::models::spec::{Activation, ModelKind, ModelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BN_EPS: f64 = 1e-5;

/// A named slice of the flat parameter space, resolved at build time.
#[derive(Debug, Clone)]
struct Seg {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

impl Seg {
    fn len(&self) -> usize {
        self.shape.iter().product()
    }
}

#[derive(Debug, Clone)]
enum Layer {
    Dense {
        w: usize,
        b: usize,
        in_dim: usize,
        out_dim: usize,
    },
    Conv1d {
        w: usize,
        b: usize,
        in_ch: usize,
        out_ch: usize,
        in_len: usize,
    },
    /// Evaluation-mode batch normalization. Statistics are frozen at build
    /// time; only gamma and beta are trainable.
    BatchNorm {
        gamma: usize,
        beta: usize,
        mean: Vec<f64>,
        var: Vec<f64>,
        /// Positions each statistic applies to (1 for dense features,
        /// sequence length for conv channels).
        positions: usize,
    },
    Activation(Activation),
    GlobalAvgPool {
        channels: usize,
        len: usize,
    },
}

/// MLP / convnet / wide-dense forward pass over the tape.
#[derive(Debug, Clone)]
pub struct FeedforwardModel {
    spec: ModelSpec,
    segs: Vec<Seg>,
    layers: Vec<Layer>,
}

const KERNEL: usize = 3;

struct Builder {
    segs: Vec<Seg>,
    offset: usize,
}

impl Builder {
    fn new() -> Self {
        Self {
            segs: Vec::new(),
            offset: 0,
        }
    }

    fn seg(&mut self, name: String, shape: Vec<usize>) -> usize {
        let len: usize = shape.iter().product();
        self.segs.push(Seg {
            name,
            shape,
            offset: self.offset,
        });
        self.offset += len;
        self.segs.len() - 1
    }
}

impl FeedforwardModel {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let mut b = Builder::new();
        let mut layers = Vec::new();

        match spec.kind.clone() {
            ModelKind::Mlp { hidden } => {
                build_dense_stack(&mut b, &mut layers, &spec, spec.input_dim, &hidden);
            }
            ModelKind::WideDense { width } => {
                build_dense_stack(&mut b, &mut layers, &spec, spec.input_dim, &[width, width]);
            }
            ModelKind::Convnet { channels } => {
                let mut in_ch = 1usize;
                let mut in_len = spec.input_dim;
                for (i, &out_ch) in channels.iter().enumerate() {
                    let w = b.seg(format!("conv{i}.weight"), vec![out_ch, in_ch, KERNEL]);
                    let bias = b.seg(format!("conv{i}.bias"), vec![out_ch]);
                    layers.push(Layer::Conv1d {
                        w,
                        b: bias,
                        in_ch,
                        out_ch,
                        in_len,
                    });
                    let out_len = in_len - KERNEL + 1;
                    if spec.batchnorm {
                        let gamma = b.seg(format!("conv{i}.bn.gamma"), vec![out_ch]);
                        let beta = b.seg(format!("conv{i}.bn.beta"), vec![out_ch]);
                        layers.push(Layer::BatchNorm {
                            gamma,
                            beta,
                            mean: vec![0.0; out_ch],
                            var: vec![1.0; out_ch],
                            positions: out_len,
                        });
                    }
                    layers.push(Layer::Activation(spec.activation));
                    in_ch = out_ch;
                    in_len = out_len;
                }
                layers.push(Layer::GlobalAvgPool {
                    channels: in_ch,
                    len: in_len,
                });
                let w = b.seg("head.weight".to_string(), vec![in_ch, spec.classes]);
                let bias = b.seg("head.bias".to_string(), vec![spec.classes]);
                layers.push(Layer::Dense {
                    w,
                    b: bias,
                    in_dim: in_ch,
                    out_dim: spec.classes,
                });
            }
        }

        let model = Self { spec, segs: b.segs, layers };
        let count = model.param_count();
        if count > model.spec.param_cap {
            return Err(Error::ParamCapExceeded {
                count,
                cap: model.spec.param_cap,
            });
        }
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Deterministic Glorot-uniform initialization from `seed`.
    /// Biases start at zero, batchnorm at gamma=1 / beta=0.
    pub fn init_params(&self, seed: u64) -> ParameterVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut parts = Vec::with_capacity(self.segs.len());
        for seg in &self.segs {
            let values = init_segment(seg, &mut rng);
            parts.push((seg.name.clone(), seg.shape.clone(), values));
        }
        ParameterVector::from_parts(parts).expect("segment table is consistent")
    }

    /// Re-draw the first (input-facing) and last (classifier) weight/bias
    /// pairs, leaving everything between untouched. This is the fine-tuning
    /// entry point for swapping input and classifier layers.
    pub fn reinit_input_and_head(&self, params: &mut ParameterVector, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weight_ids: Vec<usize> = self
            .segs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.name.ends_with(".weight"))
            .map(|(i, _)| i)
            .collect();
        let mut targets = Vec::new();
        if let Some(&first) = weight_ids.first() {
            targets.push(first);
            targets.push(first + 1); // paired bias follows its weight
        }
        if let Some(&last) = weight_ids.last() {
            if !targets.contains(&last) {
                targets.push(last);
                targets.push(last + 1);
            }
        }
        for idx in targets {
            let seg = &self.segs[idx];
            let fresh = init_segment(seg, &mut rng);
            let range = seg.offset..seg.offset + seg.len();
            params.values_mut()[range].copy_from_slice(&fresh);
        }
    }

    fn seg_ids<'a>(&self, params: &'a [VarId], idx: usize) -> &'a [VarId] {
        let seg = &self.segs[idx];
        &params[seg.offset..seg.offset + seg.len()]
    }
}

fn build_dense_stack(
    b: &mut Builder,
    layers: &mut Vec<Layer>,
    spec: &ModelSpec,
    input_dim: usize,
    hidden: &[usize],
) {
    let mut in_dim = input_dim;
    for (i, &out_dim) in hidden.iter().enumerate() {
        let w = b.seg(format!("dense{i}.weight"), vec![in_dim, out_dim]);
        let bias = b.seg(format!("dense{i}.bias"), vec![out_dim]);
        layers.push(Layer::Dense {
            w,
            b: bias,
            in_dim,
            out_dim,
        });
        if spec.batchnorm {
            let gamma = b.seg(format!("dense{i}.bn.gamma"), vec![out_dim]);
            let beta = b.seg(format!("dense{i}.bn.beta"), vec![out_dim]);
            layers.push(Layer::BatchNorm {
                gamma,
                beta,
                mean: vec![0.0; out_dim],
                var: vec![1.0; out_dim],
                positions: 1,
            });
        }
        layers.push(Layer::Activation(spec.activation));
        in_dim = out_dim;
    }
    let w = b.seg("head.weight".to_string(), vec![in_dim, spec.classes]);
    let bias = b.seg("head.bias".to_string(), vec![spec.classes]);
    layers.push(Layer::Dense {
        w,
        b: bias,
        in_dim,
        out_dim: spec.classes,
    });
}

fn init_segment(seg: &Seg, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = seg.len();
    if seg.name.ends_with(".bias") || seg.name.ends_with(".bn.beta") {
        vec![0.0; n]
    } else if seg.name.ends_with(".bn.gamma") {
        vec![1.0; n]
    } else {
        // Glorot uniform over the weight's fan-in/fan-out.
        let (fan_in, fan_out) = match seg.shape.as_slice() {
            [i, o] => (*i, *o),
            [o, i, k] => (i * k, o * k),
            other => {
                let n: usize = other.iter().product();
                (n, n)
            }
        };
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        (0..n).map(|_| rng.gen_range(-limit..limit)).collect()
    }
}

fn apply_activation(tape: &mut Tape, act: Activation, xs: &mut [VarId]) {
    for x in xs {
        *x = match act {
            Activation::Relu => tape.relu(*x),
            Activation::Tanh => tape.tanh(*x),
        };
    }
}

impl Model for FeedforwardModel {
    fn segment_table(&self) -> Vec<(String, Vec<usize>)> {
        self.segs
            .iter()
            .map(|s| (s.name.clone(), s.shape.clone()))
            .collect()
    }

    fn loss(&self, tape: &mut Tape, params: &[VarId], batch: &Batch) -> Result<VarId> {
        if batch.is_empty() {
            return Err(Error::config("batch", "batch must be non-empty"));
        }
        let mut logits = Vec::with_capacity(batch.len());
        for i in 0..batch.len() {
            logits.push(self.logits(tape, params, batch.inputs.row(i))?);
        }
        Ok(mean_cross_entropy(tape, &logits, &batch.labels))
    }
}

impl Classifier for FeedforwardModel {
    fn classes(&self) -> usize {
        self.spec.classes
    }

    fn logits(&self, tape: &mut Tape, params: &[VarId], input: &[f64]) -> Result<Vec<VarId>> {
        if input.len() != self.spec.input_dim {
            return Err(Error::ShapeMismatch {
                segment: "<input>".to_string(),
                expected: self.spec.input_dim,
                actual: input.len(),
            });
        }
        let mut feats: Vec<VarId> = input.iter().map(|&x| tape.constant(x)).collect();
        for layer in &self.layers {
            match layer {
                Layer::Dense {
                    w,
                    b,
                    in_dim,
                    out_dim,
                } => {
                    let ws = self.seg_ids(params, *w);
                    let bs = self.seg_ids(params, *b);
                    let mut out = Vec::with_capacity(*out_dim);
                    for j in 0..*out_dim {
                        let mut acc = bs[j];
                        for i in 0..*in_dim {
                            acc = tape.mul_add(ws[i * out_dim + j], feats[i], acc);
                        }
                        out.push(acc);
                    }
                    feats = out;
                }
                Layer::Conv1d {
                    w,
                    b,
                    in_ch,
                    out_ch,
                    in_len,
                } => {
                    let ws = self.seg_ids(params, *w);
                    let bs = self.seg_ids(params, *b);
                    let out_len = in_len - KERNEL + 1;
                    let mut out = Vec::with_capacity(out_ch * out_len);
                    for oc in 0..*out_ch {
                        for p in 0..out_len {
                            let mut acc = bs[oc];
                            for ic in 0..*in_ch {
                                for k in 0..KERNEL {
                                    let wi = (oc * in_ch + ic) * KERNEL + k;
                                    acc = tape.mul_add(ws[wi], feats[ic * in_len + p + k], acc);
                                }
                            }
                            out.push(acc);
                        }
                    }
                    feats = out;
                }
                Layer::BatchNorm {
                    gamma,
                    beta,
                    mean,
                    var,
                    positions,
                } => {
                    let gs = self.seg_ids(params, *gamma);
                    let bs = self.seg_ids(params, *beta);
                    for (i, f) in feats.iter_mut().enumerate() {
                        let c = i / positions;
                        let inv_std = tape.constant(1.0 / (var[c] + BN_EPS).sqrt());
                        let mu = tape.constant(mean[c]);
                        let centered = tape.sub(*f, mu);
                        let normed = tape.mul(centered, inv_std);
                        *f = tape.mul_add(gs[c], normed, bs[c]);
                    }
                }
                Layer::Activation(act) => apply_activation(tape, *act, &mut feats),
                Layer::GlobalAvgPool { channels, len } => {
                    let inv = tape.constant(1.0 / *len as f64);
                    let mut out = Vec::with_capacity(*channels);
                    for c in 0..*channels {
                        let mut acc = tape.constant(0.0);
                        for p in 0..*len {
                            acc = tape.add(acc, feats[c * len + p]);
                        }
                        out.push(tape.mul(acc, inv));
                    }
                    feats = out;
                }
            }
        }
        Ok(feats)
    }
}

/// Build the model and its deterministically initialized parameters.
pub fn build_model(spec: &ModelSpec, seed: u64) -> Result<(FeedforwardModel, ParameterVector)> {
    let model = FeedforwardModel::new(spec.clone())?;
    let params = model.init_params(seed);
    Ok((model, params))
}
