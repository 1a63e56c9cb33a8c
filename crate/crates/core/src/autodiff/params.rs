//! Flat parameter vectors with a named segment table.
//!
//! Everything spectral happens in this flat space: the Hessian is the
//! Hessian of the loss with respect to the concatenation of all trainable
//! segments, and probes/updates are plain `f64` slices over it.

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One named, contiguous slice of the flat parameter space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl SegmentSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Flat view of all trainable weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    segments: Vec<SegmentSpec>,
    values: Vec<f64>,
}

impl ParameterVector {
    /// Build from (name, shape, values) triples; offsets are assigned
    /// contiguously in order.
    pub fn from_parts(parts: Vec<(String, Vec<usize>, Vec<f64>)>) -> Result<Self> {
        let mut segments = Vec::with_capacity(parts.len());
        let mut values = Vec::new();
        for (name, shape, vals) in parts {
            let expected: usize = shape.iter().product();
            if vals.len() != expected {
                return Err(Error::ShapeMismatch {
                    segment: name,
                    expected,
                    actual: vals.len(),
                });
            }
            segments.push(SegmentSpec {
                name,
                shape,
                offset: values.len(),
            });
            values.extend_from_slice(&vals);
        }
        Ok(Self { segments, values })
    }

    /// Same segment table, all-zero values.
    pub fn zeros_like(&self) -> Self {
        Self {
            segments: self.segments.clone(),
            values: vec![0.0; self.values.len()],
        }
    }

    /// Same segment table, provided flat values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::ShapeMismatch {
                segment: "<flat>".to_string(),
                expected: self.values.len(),
                actual: values.len(),
            });
        }
        Ok(Self {
            segments: self.segments.clone(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn segments(&self) -> &[SegmentSpec] {
        &self.segments
    }

    pub fn segment(&self, name: &str) -> Option<&SegmentSpec> {
        self.segments.iter().find(|s| s.name == name)
    }

    pub fn segment_values(&self, name: &str) -> Option<&[f64]> {
        self.segment(name).map(|s| &self.values[s.range()])
    }

    /// True when `other` has the identical segment table.
    pub fn same_layout(&self, other: &ParameterVector) -> bool {
        self.segments == other.segments
    }

    pub fn dot(&self, other: &ParameterVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// self += alpha * other
    pub fn axpy(&mut self, alpha: f64, other: &ParameterVector) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.values {
            *a *= alpha;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Expand back into per-segment tensors. Inverse of [`flatten`].
    pub fn unflatten(&self) -> Vec<(String, Tensor)> {
        self.segments
            .iter()
            .map(|s| {
                (
                    s.name.clone(),
                    Tensor::new(s.shape.clone(), self.values[s.range()].to_vec())
                        .expect("segment table is consistent by construction"),
                )
            })
            .collect()
    }
}

/// Concatenate named tensors into a flat vector. Inverse of
/// [`ParameterVector::unflatten`].
pub fn flatten(weights: Vec<(String, Tensor)>) -> Result<ParameterVector> {
    ParameterVector::from_parts(
        weights
            .into_iter()
            .map(|(name, t)| {
                let (shape, data) = t.into_parts();
                (name, shape, data)
            })
            .collect(),
    )
}
