//! AdaHessian: gradient preconditioning by a Hutchinson estimate of the
//! Hessian diagonal, with block-wise spatial averaging.
//!
//! The spatial averaging is the interesting part for HESD work: averaging
//! |D| over blocks as wide as a whole layer decouples the optimizer's view
//! of curvature from the true per-parameter curvature, which is exactly the
//! external gradient manipulation that produces mainly negative spectra.

use crate::autodiff::ParameterVector;
use crate::error::{Error, Result};
use crate::optim::OptimizerState;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct AdaHessianParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub probes_per_step: usize,
    pub block_size: usize,
    pub hessian_power: f64,
}

/// Hutchinson estimate of diag(H): the average of z ⊙ Hz over Rademacher
/// probes z.
pub fn hutchinson_diagonal(
    hvp_op: &dyn Fn(&ParameterVector) -> Result<ParameterVector>,
    template: &ParameterVector,
    probes: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ParameterVector> {
    debug_assert!(probes >= 1);
    let mut acc = template.zeros_like();
    for _ in 0..probes {
        let z_vals: Vec<f64> = (0..template.len())
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let z = template.with_values(z_vals)?;
        let hz = hvp_op(&z)?;
        for ((a, zi), hzi) in acc.values_mut().iter_mut().zip(z.values()).zip(hz.values()) {
            *a += zi * hzi;
        }
    }
    acc.scale(1.0 / probes as f64);
    if !acc.all_finite() {
        return Err(Error::non_finite("hutchinson diagonal"));
    }
    Ok(acc)
}

/// Replace each contiguous block (per segment) of `d` by the mean of |d|
/// over the block. A trailing remainder block is averaged over its own
/// length.
pub fn spatial_average_abs(d: &mut ParameterVector, block_size: usize) {
    debug_assert!(block_size >= 1);
    let segments = d.segments().to_vec();
    let values = d.values_mut();
    for seg in &segments {
        let slice = &mut values[seg.range()];
        for block in slice.chunks_mut(block_size) {
            let mean = block.iter().map(|x| x.abs()).sum::<f64>() / block.len() as f64;
            block.fill(mean);
        }
    }
}

/// One AdaHessian update. Momentum runs on gradients; the second moment
/// runs on the spatially averaged |D|; the denominator is (√v̂)^k + ε.
pub fn adahessian_step(
    params: &mut ParameterVector,
    state: &mut OptimizerState,
    grads: &ParameterVector,
    hvp_op: &dyn Fn(&ParameterVector) -> Result<ParameterVector>,
    p: &AdaHessianParams,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    if !grads.all_finite() {
        return Err(Error::non_finite("gradients"));
    }
    let mut d = hutchinson_diagonal(hvp_op, params, p.probes_per_step, rng)?;
    spatial_average_abs(&mut d, p.block_size);

    state.step += 1;
    let t = state.step as i32;
    let m = state.first_moment.get_or_insert_with(|| grads.zeros_like());
    let v = state.second_moment.get_or_insert_with(|| grads.zeros_like());

    let bc1 = 1.0 - p.beta1.powi(t);
    let bc2 = 1.0 - p.beta2.powi(t);
    let values = params.values_mut();
    for i in 0..values.len() {
        let g = grads.values()[i];
        let di = d.values()[i];
        let mi = &mut m.values_mut()[i];
        *mi = p.beta1 * *mi + (1.0 - p.beta1) * g;
        let vi = &mut v.values_mut()[i];
        *vi = p.beta2 * *vi + (1.0 - p.beta2) * di * di;
        let m_hat = *mi / bc1;
        let v_hat = *vi / bc2;
        let denom = v_hat.sqrt().powf(p.hessian_power) + p.eps;
        values[i] -= p.lr * m_hat / denom;
    }
    state.hessian_diag = Some(d);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::quadratic::{dummy_batch, QuadraticModel};
    use rand::SeedableRng;

    fn pv(values: &[f64]) -> ParameterVector {
        ParameterVector::from_parts(vec![(
            "w".to_string(),
            vec![values.len()],
            values.to_vec(),
        )])
        .unwrap()
    }

    #[test]
    fn block_mean_of_abs_values() {
        // block size 2 on D = (1, 4): both entries become 2.5
        let mut d = pv(&[1.0, 4.0]);
        spatial_average_abs(&mut d, 2);
        assert_eq!(d.values(), &[2.5, 2.5]);
        // |.| matters: (-1, 4) also averages to 2.5
        let mut d = pv(&[-1.0, 4.0]);
        spatial_average_abs(&mut d, 2);
        assert_eq!(d.values(), &[2.5, 2.5]);
    }

    #[test]
    fn remainder_block_averages_over_its_own_length() {
        let mut d = pv(&[2.0, 4.0, 9.0]);
        spatial_average_abs(&mut d, 2);
        assert_eq!(d.values(), &[3.0, 3.0, 9.0]);
    }

    #[test]
    fn block_size_one_takes_absolute_values_only() {
        let mut d = pv(&[-2.0, 3.0]);
        spatial_average_abs(&mut d, 1);
        assert_eq!(d.values(), &[2.0, 3.0]);
    }

    #[test]
    fn blocks_do_not_cross_segment_boundaries() {
        let mut d = ParameterVector::from_parts(vec![
            ("a".to_string(), vec![3], vec![1.0, 2.0, 3.0]),
            ("b".to_string(), vec![1], vec![10.0]),
        ])
        .unwrap();
        spatial_average_abs(&mut d, 4);
        assert_eq!(d.values(), &[2.0, 2.0, 2.0, 10.0]);
    }

    #[test]
    fn hutchinson_diagonal_is_exact_for_diagonal_hessian() {
        // For diagonal H every probe gives z ⊙ Hz = diag(H) exactly, so the
        // 1000-probe average is exact too.
        let model = QuadraticModel::diagonal(&[1.0, 4.0]);
        let w = model.params_from(&[0.2, -0.3]);
        let batch = dummy_batch();
        let op = |v: &ParameterVector| crate::autodiff::hvp(&model, &w, &batch, v);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = hutchinson_diagonal(&op, &w, 1000, &mut rng).unwrap();
        assert!((d.values()[0] - 1.0).abs() < 0.05);
        assert!((d.values()[1] - 4.0).abs() < 0.05 * 4.0);
    }

    #[test]
    fn hutchinson_diagonal_converges_for_off_diagonal_hessian() {
        // Off-diagonal terms only add zero-mean noise to the estimator.
        let model = QuadraticModel::new(2, vec![2.0, 0.7, 0.7, 3.0]);
        let w = model.params_from(&[0.0, 0.0]);
        let batch = dummy_batch();
        let op = |v: &ParameterVector| crate::autodiff::hvp(&model, &w, &batch, v);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = hutchinson_diagonal(&op, &w, 1000, &mut rng).unwrap();
        assert!((d.values()[0] - 2.0).abs() < 0.1, "{:?}", d.values());
        assert!((d.values()[1] - 3.0).abs() < 0.1, "{:?}", d.values());
    }

    #[test]
    fn step_moves_params_and_records_diag() {
        let model = QuadraticModel::diagonal(&[1.0, 4.0]);
        let mut w = model.params_from(&[1.0, 1.0]);
        let batch = dummy_batch();
        let g = crate::autodiff::gradient(&model, &w, &batch).unwrap();
        let w_for_op = w.clone();
        let op = move |v: &ParameterVector| crate::autodiff::hvp(&model, &w_for_op, &batch, v);
        let p = AdaHessianParams {
            lr: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            probes_per_step: 1,
            block_size: 1,
            hessian_power: 1.0,
        };
        let mut state = OptimizerState::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let before = w.clone();
        adahessian_step(&mut w, &mut state, &g, &op, &p, &mut rng).unwrap();
        assert_ne!(w, before);
        let d = state.hessian_diag.unwrap();
        // Diagonal quadratic: D is exact after one probe.
        assert!((d.values()[0] - 1.0).abs() < 1e-10);
        assert!((d.values()[1] - 4.0).abs() < 1e-10);
    }
}
