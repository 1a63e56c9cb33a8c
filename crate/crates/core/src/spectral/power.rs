//! Power iteration for the extreme (by magnitude) eigenvalue, plus the
//! shifted second pass that recovers the opposite end of the spectrum.

use crate::error::Result;
use crate::spectral::operator::{LinearOperator, ShiftedOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerResult {
    /// Rayleigh-quotient estimate (signed).
    pub eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual ‖Av − λv‖ / |λ| at exit.
    pub residual: f64,
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Dominant-by-magnitude eigenvalue of `op`.
///
/// Non-convergence within `max_iters` is not an error: the best estimate is
/// returned with `converged = false`.
pub fn power_extreme(op: &dyn LinearOperator, config: &PowerConfig) -> Result<PowerResult> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut v: Vec<f64> = (0..n)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    normalize(&mut v);

    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for iter in 1..=config.max_iters {
        let w = op.apply(&v)?;
        lambda = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let res_norm = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| {
                let r = wi - lambda * vi;
                r * r
            })
            .sum::<f64>()
            .sqrt();
        let w_norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if w_norm == 0.0 {
            // v is annihilated: exact eigenvector for eigenvalue 0.
            return Ok(PowerResult {
                eigenvalue: 0.0,
                iterations: iter,
                converged: true,
                residual: 0.0,
            });
        }
        residual = if lambda.abs() > 0.0 {
            res_norm / lambda.abs()
        } else {
            f64::INFINITY
        };
        if residual <= config.tol {
            return Ok(PowerResult {
                eigenvalue: lambda,
                iterations: iter,
                converged: true,
                residual,
            });
        }
        v = w;
        normalize(&mut v);
    }
    Ok(PowerResult {
        eigenvalue: lambda,
        iterations: config.max_iters,
        converged: false,
        residual,
    })
}

/// Both spectral extremes: the dominant eigenvalue directly, the opposite
/// one through a pass on `A - λ_dom·I`. Returned as (min, max).
pub fn extreme_pair(
    op: &dyn LinearOperator,
    config: &PowerConfig,
) -> Result<(PowerResult, PowerResult)> {
    let dominant = power_extreme(op, config)?;
    let shifted = ShiftedOperator::new(op, dominant.eigenvalue);
    let shifted_cfg = PowerConfig {
        seed: config.seed.wrapping_add(1),
        ..*config
    };
    let opposite_raw = power_extreme(&shifted, &shifted_cfg)?;
    let opposite = PowerResult {
        eigenvalue: opposite_raw.eigenvalue + dominant.eigenvalue,
        ..opposite_raw
    };
    if dominant.eigenvalue <= opposite.eigenvalue {
        Ok((dominant, opposite))
    } else {
        Ok((opposite, dominant))
    }
}
