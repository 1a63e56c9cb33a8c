//! Synthetic classification datasets with a train split and a deliberately
//! shifted generalization split.
//!
//! The shift stands in for the train-on-one-dataset, test-on-its-cousin
//! setup the criteria are meant to probe: same generating process, moved
//! far enough that accuracy measurably drops.

use crate::autodiff::{Batch, Tensor};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn default_center_scale() -> f64 {
    4.0
}

fn default_blob_noise() -> f64 {
    0.8
}

fn default_moon_noise() -> f64 {
    0.15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetKind {
    GaussianBlobs {
        #[serde(default = "default_center_scale")]
        center_scale: f64,
        #[serde(default = "default_blob_noise")]
        noise: f64,
    },
    TwoMoons {
        #[serde(default = "default_moon_noise")]
        noise: f64,
    },
    RandomLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    #[serde(flatten)]
    pub kind: DatasetKind,
    /// Samples per split.
    pub samples: usize,
    pub input_dim: usize,
    pub classes: usize,
    pub seed: u64,
    /// Generator shift applied to the generalization split only.
    #[serde(default)]
    pub shift: f64,
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::config("dataset.samples", "must be positive"));
        }
        if self.input_dim == 0 {
            return Err(Error::config("dataset.input_dim", "must be positive"));
        }
        if self.classes < 2 {
            return Err(Error::config("dataset.classes", "need at least 2 classes"));
        }
        match self.kind {
            DatasetKind::TwoMoons { .. } => {
                if self.classes != 2 {
                    return Err(Error::config("dataset.classes", "two-moons is binary"));
                }
                if self.input_dim < 2 {
                    return Err(Error::config(
                        "dataset.input_dim",
                        "two-moons needs at least 2 dimensions",
                    ));
                }
            }
            DatasetKind::GaussianBlobs { noise, center_scale } => {
                if noise <= 0.0 || center_scale <= 0.0 {
                    return Err(Error::config(
                        "dataset",
                        "noise and center_scale must be positive",
                    ));
                }
            }
            DatasetKind::RandomLabel => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitTag {
    Train,
    Generalization,
}

impl std::fmt::Display for SplitTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplitTag::Train => write!(f, "train"),
            SplitTag::Generalization => write!(f, "generalization"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub config: DatasetConfig,
    pub train: Batch,
    pub generalization: Batch,
}

impl SyntheticDataset {
    pub fn split(&self, tag: SplitTag) -> &Batch {
        match tag {
            SplitTag::Train => &self.train,
            SplitTag::Generalization => &self.generalization,
        }
    }
}

/// Class-balanced label sequence: counts differ by at most one, order is a
/// seeded shuffle.
fn balanced_labels(samples: usize, classes: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..samples).map(|i| i % classes).collect();
    // Fisher-Yates
    for i in (1..labels.len()).rev() {
        let j = rng.gen_range(0..=i);
        labels.swap(i, j);
    }
    labels
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; one value per call keeps the stream layout simple.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn stream(seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

pub fn make_dataset(config: &DatasetConfig) -> Result<SyntheticDataset> {
    config.validate()?;
    let train = generate_split(config, SplitTag::Train)?;
    let generalization = generate_split(config, SplitTag::Generalization)?;
    Ok(SyntheticDataset {
        config: config.clone(),
        train,
        generalization,
    })
}

fn generate_split(config: &DatasetConfig, tag: SplitTag) -> Result<Batch> {
    let (label_stream, sample_stream, shift_applied) = match tag {
        SplitTag::Train => (1, 2, 0.0),
        SplitTag::Generalization => (3, 4, config.shift),
    };
    let mut label_rng = stream(config.seed, label_stream);
    let mut rng = stream(config.seed, sample_stream);
    let labels = balanced_labels(config.samples, config.classes, &mut label_rng);
    let d = config.input_dim;
    let mut data = Vec::with_capacity(config.samples * d);

    match &config.kind {
        DatasetKind::GaussianBlobs {
            center_scale,
            noise,
        } => {
            // Class centers sit evenly spaced on a circle of radius
            // center_scale (a line in 1-d), under a seeded rotation. Spacing
            // by construction keeps classes separable for any seed whenever
            // center_scale comfortably exceeds the noise. Shift directions
            // come from the same fixed stream so both splits agree on them.
            let mut center_rng = stream(config.seed, 0);
            let rotation = center_rng.gen_range(0.0..std::f64::consts::TAU);
            let centers: Vec<Vec<f64>> = (0..config.classes)
                .map(|c| {
                    let mut center = vec![0.0; d];
                    if d == 1 {
                        let t = if config.classes == 1 {
                            0.0
                        } else {
                            2.0 * c as f64 / (config.classes - 1) as f64 - 1.0
                        };
                        center[0] = center_scale * t;
                    } else {
                        let angle = rotation
                            + std::f64::consts::TAU * c as f64 / config.classes as f64;
                        center[0] = center_scale * angle.cos();
                        center[1] = center_scale * angle.sin();
                    }
                    center
                })
                .collect();
            let shifts: Vec<Vec<f64>> = (0..config.classes)
                .map(|_| {
                    let v: Vec<f64> = (0..d).map(|_| standard_normal(&mut center_rng)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                    v.into_iter().map(|x| x / norm).collect()
                })
                .collect();
            for &label in &labels {
                for j in 0..d {
                    let value = centers[label][j]
                        + shift_applied * shifts[label][j]
                        + noise * standard_normal(&mut rng);
                    data.push(value);
                }
            }
        }
        DatasetKind::TwoMoons { noise } => {
            // Interleaved half-circles in the first two dims; any extra
            // dims carry small isotropic noise. The generalization shift is
            // a rotation of the moons.
            let (sin_s, cos_s) = shift_applied.sin_cos();
            for &label in &labels {
                let t = rng.gen_range(0.0..std::f64::consts::PI);
                let (mut x, mut y) = if label == 0 {
                    (t.cos(), t.sin())
                } else {
                    (1.0 - t.cos(), 0.5 - t.sin())
                };
                x += noise * standard_normal(&mut rng);
                y += noise * standard_normal(&mut rng);
                let (xr, yr) = (x * cos_s - y * sin_s, x * sin_s + y * cos_s);
                data.push(xr);
                data.push(yr);
                for _ in 2..d {
                    data.push(0.1 * standard_normal(&mut rng));
                }
            }
        }
        DatasetKind::RandomLabel => {
            for _ in &labels {
                for j in 0..d {
                    let mut v = standard_normal(&mut rng);
                    if j == 0 {
                        v += shift_applied;
                    }
                    data.push(v);
                }
            }
        }
    }

    Batch::new(
        Tensor::new(vec![config.samples, d], data)?,
        labels,
        config.classes,
    )
}
