//! Dense Hessian assembly by applying the operator to basis vectors.
//!
//! This is the oracle side of the SLQ cross-checks: on models small enough
//! to afford n operator applications, the full matrix can be assembled and
//! eigendecomposed independently of anything Lanczos does.

use crate::error::Result;
use crate::exec;
use crate::spectral::operator::LinearOperator;

/// Row-major n×n matrix, column j = op·e_j. Columns are computed
/// concurrently under the `parallel` feature.
pub fn dense_matrix(op: &dyn LinearOperator) -> Result<Vec<f64>> {
    let n = op.dim();
    let columns: Vec<Result<Vec<f64>>> = exec::ordered_map_indices(n, |j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        op.apply(&e)
    });
    collect_columns(n, columns)
}

/// Sequential reference path for [`dense_matrix`].
pub fn dense_matrix_serial(op: &dyn LinearOperator) -> Result<Vec<f64>> {
    let n = op.dim();
    let columns: Vec<Result<Vec<f64>>> = exec::ordered_map_indices_seq(n, |j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        op.apply(&e)
    });
    collect_columns(n, columns)
}

fn collect_columns(n: usize, columns: Vec<Result<Vec<f64>>>) -> Result<Vec<f64>> {
    let mut matrix = vec![0.0; n * n];
    for (j, col) in columns.into_iter().enumerate() {
        let col = col?;
        for (i, v) in col.into_iter().enumerate() {
            matrix[i * n + j] = v;
        }
    }
    Ok(matrix)
}

/// Largest relative asymmetry max|H_ij - H_ji| / max|H|.
pub fn symmetry_error(matrix: &[f64], n: usize) -> f64 {
    let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((matrix[i * n + j] - matrix[j * n + i]).abs());
        }
    }
    worst / scale
}
