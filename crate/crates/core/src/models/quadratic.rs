//! Quadratic test model: L(w) = ½ wᵀ A w for a fixed symmetric A.
//!
//! Its Hessian is A itself, which makes it the reference fixture for the
//! gradient/HVP/spectral oracles. Not part of any run config.

use crate::autodiff::tape::{Tape, VarId};
use crate::autodiff::{Batch, Model, ParameterVector, Tensor};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct QuadraticModel {
    n: usize,
    /// Row-major symmetric matrix.
    matrix: Vec<f64>,
}

impl QuadraticModel {
    pub fn new(n: usize, matrix: Vec<f64>) -> Self {
        assert_eq!(matrix.len(), n * n);
        Self { n, matrix }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut matrix = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            matrix[i * n + i] = d;
        }
        Self { n, matrix }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn params_from(&self, values: &[f64]) -> ParameterVector {
        assert_eq!(values.len(), self.n);
        ParameterVector::from_parts(vec![("w".to_string(), vec![self.n], values.to_vec())])
            .expect("consistent by construction")
    }
}

impl Model for QuadraticModel {
    fn segment_table(&self) -> Vec<(String, Vec<usize>)> {
        vec![("w".to_string(), vec![self.n])]
    }

    fn loss(&self, tape: &mut Tape, params: &[VarId], _batch: &Batch) -> Result<VarId> {
        let mut acc = tape.constant(0.0);
        for i in 0..self.n {
            for j in 0..self.n {
                let a = self.matrix[i * self.n + j];
                if a == 0.0 {
                    continue;
                }
                let c = tape.constant(a);
                let wi_wj = tape.mul(params[i], params[j]);
                acc = tape.mul_add(c, wi_wj, acc);
            }
        }
        let half = tape.constant(0.5);
        Ok(tape.mul(acc, half))
    }
}

/// Single-sample placeholder batch for models that ignore their batch.
pub fn dummy_batch() -> Batch {
    Batch::new(Tensor::new(vec![1, 1], vec![0.0]).unwrap(), vec![0], 1).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{gradient, hvp, loss_forward};

    #[test]
    fn gradient_of_diag_quadratic_is_aw() {
        // L = ½ wᵀ diag(1,2) w at w = (1,1): grad = (1,2)
        let model = QuadraticModel::diagonal(&[1.0, 2.0]);
        let w = model.params_from(&[1.0, 1.0]);
        let g = gradient(&model, &w, &dummy_batch()).unwrap();
        assert_eq!(g.values(), &[1.0, 2.0]);
        let loss = loss_forward(&model, &w, &dummy_batch()).unwrap();
        assert!((loss - 1.5).abs() < 1e-15);
    }

    #[test]
    fn gradient_at_minimum_is_zero() {
        let model = QuadraticModel::diagonal(&[1.0, 2.0, 5.0]);
        let w = model.params_from(&[0.0, 0.0, 0.0]);
        let g = gradient(&model, &w, &dummy_batch()).unwrap();
        assert_eq!(g.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn hvp_recovers_matrix_columns() {
        let model = QuadraticModel::diagonal(&[1.0, 2.0]);
        let w = model.params_from(&[0.3, -0.7]);
        let e0 = model.params_from(&[1.0, 0.0]);
        let h0 = hvp(&model, &w, &dummy_batch(), &e0).unwrap();
        assert_eq!(h0.values(), &[1.0, 0.0]);
        let e1 = model.params_from(&[0.0, 1.0]);
        let h1 = hvp(&model, &w, &dummy_batch(), &e1).unwrap();
        assert_eq!(h1.values(), &[0.0, 2.0]);
    }

    #[test]
    fn hvp_of_zero_vector_is_zero() {
        let model = QuadraticModel::diagonal(&[3.0, -1.0, 0.5]);
        let w = model.params_from(&[1.0, 2.0, 3.0]);
        let z = model.params_from(&[0.0, 0.0, 0.0]);
        let hz = hvp(&model, &w, &dummy_batch(), &z).unwrap();
        assert_eq!(hz.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn hvp_handles_off_diagonal_terms() {
        // A = [[2,1],[1,3]]: H v for v=(1,1) is (3,4)
        let model = QuadraticModel::new(2, vec![2.0, 1.0, 1.0, 3.0]);
        let w = model.params_from(&[0.1, 0.2]);
        let v = model.params_from(&[1.0, 1.0]);
        let hv = hvp(&model, &w, &dummy_batch(), &v).unwrap();
        assert!((hv.values()[0] - 3.0).abs() < 1e-14);
        assert!((hv.values()[1] - 4.0).abs() < 1e-14);
    }
}
