//! Lanczos tridiagonalization with full reorthogonalization.
//!
//! The models here are small, so every basis vector is kept and each new
//! direction is re-orthogonalized against all of them (two Gram-Schmidt
//! passes). Correctness over speed.

use crate::error::{Error, Result};
use crate::spectral::operator::LinearOperator;

/// β below this is treated as breakdown: the Krylov subspace is invariant
/// and the iteration stops early.
pub const BETA_BREAKDOWN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl TridiagonalMatrix {
    /// Steps actually taken.
    pub fn steps(&self) -> usize {
        self.alphas.len()
    }
}

#[derive(Debug, Clone)]
pub struct LanczosOutput {
    pub tridiagonal: TridiagonalMatrix,
    /// Orthonormal Krylov basis, one vector per step taken.
    pub basis: Vec<Vec<f64>>,
    pub requested_steps: usize,
    /// True when a β underflowed [`BETA_BREAKDOWN_TOL`] before reaching
    /// `requested_steps`.
    pub early_stop: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn lanczos(op: &dyn LinearOperator, probe: &[f64], m: usize) -> Result<LanczosOutput> {
    if m == 0 {
        return Err(Error::config("steps", "need at least one Lanczos step"));
    }
    let n = op.dim();
    if probe.len() != n {
        return Err(Error::ShapeMismatch {
            segment: "<probe>".to_string(),
            expected: n,
            actual: probe.len(),
        });
    }
    let norm = dot(probe, probe).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroProbe);
    }
    let mut v: Vec<f64> = probe.iter().map(|x| x / norm).collect();

    let mut alphas = Vec::with_capacity(m);
    let mut betas = Vec::with_capacity(m.saturating_sub(1));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    basis.push(v.clone());
    let mut beta_prev = 0.0;
    let mut v_prev = vec![0.0; n];
    let mut early_stop = false;

    for j in 0..m {
        let mut w = op.apply(&v)?;
        if j > 0 {
            for (wi, pi) in w.iter_mut().zip(&v_prev) {
                *wi -= beta_prev * pi;
            }
        }
        let alpha = dot(&w, &v);
        if !alpha.is_finite() {
            return Err(Error::non_finite("lanczos alpha"));
        }
        alphas.push(alpha);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= alpha * vi;
        }
        // Full reorthogonalization; the second pass mops up what the first
        // leaves behind at machine precision.
        for _ in 0..2 {
            for u in &basis {
                let proj = dot(&w, u);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= proj * ui;
                }
            }
        }
        let beta = dot(&w, &w).sqrt();
        if j + 1 == m {
            break;
        }
        if beta < BETA_BREAKDOWN_TOL {
            early_stop = true;
            break;
        }
        betas.push(beta);
        v_prev.copy_from_slice(&v);
        beta_prev = beta;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / beta;
        }
        basis.push(v.clone());
    }

    Ok(LanczosOutput {
        tridiagonal: TridiagonalMatrix { alphas, betas },
        basis,
        requested_steps: m,
        early_stop,
    })
}
