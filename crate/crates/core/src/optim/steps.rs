//! First-order update rules.

use crate::autodiff::ParameterVector;
use crate::error::{Error, Result};
use crate::optim::OptimizerState;

/// w ← w − lr·g
pub fn sgd_step(params: &mut ParameterVector, grads: &ParameterVector, lr: f64) -> Result<()> {
    ensure_finite(grads)?;
    params.axpy(-lr, grads);
    Ok(())
}

/// v ← β·v + g ; w ← w − lr·v
pub fn sgd_momentum_step(
    params: &mut ParameterVector,
    state: &mut OptimizerState,
    grads: &ParameterVector,
    lr: f64,
    momentum: f64,
) -> Result<()> {
    ensure_finite(grads)?;
    let velocity = state
        .first_moment
        .get_or_insert_with(|| grads.zeros_like());
    velocity.scale(momentum);
    velocity.axpy(1.0, grads);
    params.axpy(-lr, velocity);
    state.step += 1;
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct AdamWParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

/// Bias-corrected Adam moments with decoupled weight decay.
pub fn adamw_step(
    params: &mut ParameterVector,
    state: &mut OptimizerState,
    grads: &ParameterVector,
    p: &AdamWParams,
) -> Result<()> {
    ensure_finite(grads)?;
    state.step += 1;
    let t = state.step as i32;
    let m = state.first_moment.get_or_insert_with(|| grads.zeros_like());
    let v = state.second_moment.get_or_insert_with(|| grads.zeros_like());

    let bc1 = 1.0 - p.beta1.powi(t);
    let bc2 = 1.0 - p.beta2.powi(t);
    let values = params.values_mut();
    for i in 0..values.len() {
        let g = grads.values()[i];
        let mi = &mut m.values_mut()[i];
        *mi = p.beta1 * *mi + (1.0 - p.beta1) * g;
        let vi = &mut v.values_mut()[i];
        *vi = p.beta2 * *vi + (1.0 - p.beta2) * g * g;
        let m_hat = *mi / bc1;
        let v_hat = *vi / bc2;
        values[i] -= p.lr * (m_hat / (v_hat.sqrt() + p.eps) + p.weight_decay * values[i]);
    }
    Ok(())
}

/// Scale all gradients by c/‖g‖₂ when the global norm exceeds c.
pub fn clip_global_norm(grads: &mut ParameterVector, c: f64) {
    debug_assert!(c > 0.0);
    let norm = grads.norm();
    if norm > c {
        grads.scale(c / norm);
    }
}

fn ensure_finite(grads: &ParameterVector) -> Result<()> {
    if grads.all_finite() {
        Ok(())
    } else {
        Err(Error::non_finite("gradients"))
    }
}
