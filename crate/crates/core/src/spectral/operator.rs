//! Matrix-free symmetric linear operators on the flat parameter space.

use crate::autodiff::{hvp, Batch, Model, ParameterVector};
use crate::error::Result;

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>>;
}

/// The loss Hessian at a fixed (params, batch) pair, applied via exact HVPs.
pub struct HessianOperator<'a> {
    model: &'a dyn Model,
    params: &'a ParameterVector,
    batch: &'a Batch,
}

impl<'a> HessianOperator<'a> {
    pub fn new(model: &'a dyn Model, params: &'a ParameterVector, batch: &'a Batch) -> Self {
        Self {
            model,
            params,
            batch,
        }
    }
}

impl LinearOperator for HessianOperator<'_> {
    fn dim(&self) -> usize {
        self.params.len()
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let direction = self.params.with_values(v.to_vec())?;
        let hv = hvp(self.model, self.params, self.batch, &direction)?;
        Ok(hv.values().to_vec())
    }
}

/// Diagonal matrix; the simplest analytic fixture.
pub struct DiagonalOperator(pub Vec<f64>);

impl LinearOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.0.iter().zip(v).map(|(d, x)| d * x).collect())
    }
}

/// Dense symmetric matrix, row-major.
pub struct DenseSymOperator {
    n: usize,
    data: Vec<f64>,
}

impl DenseSymOperator {
    pub fn new(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }
}

impl LinearOperator for DenseSymOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            out[i] = row.iter().zip(v).map(|(a, x)| a * x).sum();
        }
        Ok(out)
    }
}

/// `A - shift·I`; used to reach the opposite spectral extreme.
pub struct ShiftedOperator<'a, O: LinearOperator + ?Sized> {
    inner: &'a O,
    shift: f64,
}

impl<'a, O: LinearOperator + ?Sized> ShiftedOperator<'a, O> {
    pub fn new(inner: &'a O, shift: f64) -> Self {
        Self { inner, shift }
    }
}

impl<O: LinearOperator + ?Sized> LinearOperator for ShiftedOperator<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.inner.apply(v)?;
        for (o, x) in out.iter_mut().zip(v) {
            *o -= self.shift * x;
        }
        Ok(out)
    }
}
