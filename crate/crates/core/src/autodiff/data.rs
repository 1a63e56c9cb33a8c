//! Dense row-major tensors and labeled mini-batches.

use crate::error::{Error, Result};

/// Dense 64-bit tensor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if shape.iter().any(|&d| d == 0) {
            return Err(Error::config("shape", "dimensions must be positive"));
        }
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                segment: "<tensor>".to_string(),
                expected,
                actual: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn into_parts(self) -> (Vec<usize>, Vec<f64>) {
        (self.shape, self.data)
    }

    /// Row `i` of a rank-2 tensor.
    pub fn row(&self, i: usize) -> &[f64] {
        debug_assert_eq!(self.shape.len(), 2);
        let w = self.shape[1];
        &self.data[i * w..(i + 1) * w]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Inputs plus integer class labels.
#[derive(Debug, Clone)]
pub struct Batch {
    pub inputs: Tensor,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn new(inputs: Tensor, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if inputs.shape().first().copied().unwrap_or(0) != labels.len() {
            return Err(Error::config(
                "batch",
                format!(
                    "input rows {} != label count {}",
                    inputs.shape().first().copied().unwrap_or(0),
                    labels.len()
                ),
            ));
        }
        if labels.is_empty() {
            return Err(Error::config("batch", "batch must be non-empty"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::config(
                "labels",
                format!("label {bad} out of range for {classes} classes"),
            ));
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Sub-batch restricted to `indices` (used by the mini-batch sampler).
    pub fn select(&self, indices: &[usize]) -> Batch {
        let dim = self.inputs.shape()[1];
        let mut data = Vec::with_capacity(indices.len() * dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.inputs.row(i));
            labels.push(self.labels[i]);
        }
        Batch {
            inputs: Tensor::new(vec![indices.len(), dim], data).expect("same row width"),
            labels,
        }
    }

    /// First `n` samples (or all of them when the batch is smaller).
    pub fn head(&self, n: usize) -> Batch {
        let n = n.min(self.len());
        let indices: Vec<usize> = (0..n).collect();
        self.select(&indices)
    }
}
