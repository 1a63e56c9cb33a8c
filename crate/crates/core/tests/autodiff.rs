//! Derivative correctness against finite-difference oracles, plus the
//! algebraic properties exact HVPs must satisfy.

mod common;

use common::*;
use hesd_core::autodiff::{
    gradient, hvp, loss_forward, Batch, Model, ParameterVector, Tensor,
};
use hesd_core::models::{build_model, Activation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_direction(template: &ParameterVector, rng: &mut ChaCha8Rng) -> ParameterVector {
    let vals: Vec<f64> = (0..template.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    template.with_values(vals).unwrap()
}

#[test]
fn uniform_logits_give_ln_c_loss() {
    // All-zero weights force logits (0, 0): mean cross-entropy is ln 2.
    let (model, params) = build(&mlp_spec(3, vec![5], 2, Activation::Tanh), 0);
    let zeros = params.with_values(vec![0.0; params.len()]).unwrap();
    let batch = blob_batch(3, 2, 16, 9);
    let loss = loss_forward(&model, &zeros, &batch).unwrap();
    assert!((loss - std::f64::consts::LN_2).abs() < 1e-15, "loss {loss}");
}

#[test]
fn saturated_softmax_drives_loss_to_zero() {
    // A single sample with an overwhelming true-class logit: push the head
    // bias of the labeled class far up.
    let (model, mut params) = build(&mlp_spec(2, vec![3], 2, Activation::Tanh), 1);
    let batch = Batch::new(Tensor::new(vec![1, 2], vec![0.3, -0.4]).unwrap(), vec![1], 2).unwrap();
    {
        let seg = params.segment("head.bias").unwrap().clone();
        params.values_mut()[seg.offset + 1] = 60.0;
    }
    let loss = loss_forward(&model, &params, &batch).unwrap();
    assert!(loss >= 0.0);
    assert!(loss < 1e-20, "loss {loss}");
}

#[test]
fn seed0_mlp_loss_regression_value() {
    // Frozen from the first verified run of this exact configuration.
    let (model, params) = build(&mlp_spec(4, vec![8], 3, Activation::Tanh), 0);
    let batch = blob_batch(4, 3, 8, 0);
    let loss = loss_forward(&model, &params, &batch).unwrap();
    let frozen = 1.23351483092831637;
    assert!(
        (loss - frozen).abs() < 1e-12,
        "loss {loss:.16} drifted from frozen {frozen:.16}"
    );
}

#[test]
fn gradient_matches_central_differences_on_model_zoo() {
    for (name, spec) in toy_model_zoo() {
        let (model, params) = build(&spec, 3);
        assert!(model.param_count() <= 2000);
        let batch = blob_batch(spec.input_dim, spec.classes, 16, 5);
        let g = gradient(&model, &params, &batch).unwrap();
        let fd = fd_gradient(&model, &params, &batch, 1e-5);
        assert_close_slices(g.values(), &fd, 1e-6, 1e-4, &format!("grad[{name}]"));
    }
}

#[test]
fn hvp_matches_central_differences_on_model_zoo() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, spec) in toy_model_zoo() {
        let (model, params) = build(&spec, 3);
        let batch = blob_batch(spec.input_dim, spec.classes, 16, 5);
        for _ in 0..2 {
            let v = random_direction(&params, &mut rng);
            let hv = hvp(&model, &params, &batch, &v).unwrap();
            let fd = fd_hvp(&model, &params, &batch, &v, 1e-4);
            assert_close_slices(hv.values(), &fd, 1e-4, 1e-3, &format!("hvp[{name}]"));
        }
    }
}

#[test]
fn hvp_is_linear() {
    let (model, params) = build(&mlp_spec(4, vec![10], 3, Activation::Tanh), 7);
    let batch = blob_batch(4, 3, 12, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let u = random_direction(&params, &mut rng);
        let v = random_direction(&params, &mut rng);
        let alpha: f64 = rng.gen_range(-2.0..2.0);
        let beta: f64 = rng.gen_range(-2.0..2.0);
        let mut combo = params.zeros_like();
        combo.axpy(alpha, &u);
        combo.axpy(beta, &v);
        let h_combo = hvp(&model, &params, &batch, &combo).unwrap();
        let hu = hvp(&model, &params, &batch, &u).unwrap();
        let hv = hvp(&model, &params, &batch, &v).unwrap();
        let mut expect = params.zeros_like();
        expect.axpy(alpha, &hu);
        expect.axpy(beta, &hv);
        let scale = expect.norm().max(1e-12);
        let mut diff = h_combo.clone();
        diff.axpy(-1.0, &expect);
        assert!(
            diff.norm() / scale <= 1e-8,
            "linearity violated: {}",
            diff.norm() / scale
        );
    }
}

#[test]
fn hvp_is_symmetric() {
    for (name, spec) in toy_model_zoo() {
        let (model, params) = build(&spec, 5);
        let batch = blob_batch(spec.input_dim, spec.classes, 12, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..3 {
            let u = random_direction(&params, &mut rng);
            let v = random_direction(&params, &mut rng);
            let hv = hvp(&model, &params, &batch, &v).unwrap();
            let hu = hvp(&model, &params, &batch, &u).unwrap();
            let uhv = u.dot(&hv);
            let vhu = v.dot(&hu);
            assert!(
                rel_err(uhv, vhu) <= 1e-8,
                "{name}: <u,Hv>={uhv} vs <v,Hu>={vhu}"
            );
        }
    }
}

#[test]
fn derivatives_are_deterministic() {
    let (model, params) = build(&mlp_spec(4, vec![6], 2, Activation::Relu), 13);
    let batch = blob_batch(4, 2, 10, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v = random_direction(&params, &mut rng);
    let a = (
        loss_forward(&model, &params, &batch).unwrap(),
        gradient(&model, &params, &batch).unwrap(),
        hvp(&model, &params, &batch, &v).unwrap(),
    );
    let b = (
        loss_forward(&model, &params, &batch).unwrap(),
        gradient(&model, &params, &batch).unwrap(),
        hvp(&model, &params, &batch, &v).unwrap(),
    );
    assert_eq!(a.0.to_bits(), b.0.to_bits());
    assert_eq!(a.1.values(), b.1.values());
    assert_eq!(a.2.values(), b.2.values());
}

#[test]
fn layout_mismatch_is_a_structured_error() {
    let (model, params) = build(&mlp_spec(4, vec![6], 2, Activation::Tanh), 1);
    let batch = blob_batch(4, 2, 4, 1);
    let bad = ParameterVector::from_parts(vec![(
        "wrong".to_string(),
        vec![params.len()],
        vec![0.0; params.len()],
    )])
    .unwrap();
    let err = loss_forward(&model, &bad, &batch).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("dense0.weight"), "error should name the segment: {msg}");
}
