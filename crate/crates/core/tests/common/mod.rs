//! Shared oracles for the integration suites: finite differences for
//! first/second derivatives, and a dense eigendecomposition (nalgebra)
//! entirely independent of the crate's Lanczos/QL code paths.

#![allow(dead_code)]

use hesd_core::autodiff::{gradient, loss_forward, Batch, Model, ParameterVector};
use hesd_core::models::{
    make_dataset, Activation, DatasetConfig, DatasetKind, FeedforwardModel, ModelKind, ModelSpec,
};
use hesd_core::spectral::LinearOperator;
use nalgebra::DMatrix;

/// Central-difference gradient of the loss.
pub fn fd_gradient(
    model: &dyn Model,
    params: &ParameterVector,
    batch: &Batch,
    h: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let mut plus = params.clone();
        plus.values_mut()[i] += h;
        let mut minus = params.clone();
        minus.values_mut()[i] -= h;
        let lp = loss_forward(model, &plus, batch).unwrap();
        let lm = loss_forward(model, &minus, batch).unwrap();
        out.push((lp - lm) / (2.0 * h));
    }
    out
}

/// Central-difference Hessian-vector product: (∇L(w+εv) − ∇L(w−εv)) / 2ε.
pub fn fd_hvp(
    model: &dyn Model,
    params: &ParameterVector,
    batch: &Batch,
    v: &ParameterVector,
    eps: f64,
) -> Vec<f64> {
    let mut plus = params.clone();
    plus.axpy(eps, v);
    let mut minus = params.clone();
    minus.axpy(-eps, v);
    let gp = gradient(model, &plus, batch).unwrap();
    let gm = gradient(model, &minus, batch).unwrap();
    gp.values()
        .iter()
        .zip(gm.values())
        .map(|(p, m)| (p - m) / (2.0 * eps))
        .collect()
}

/// Eigenvalues (ascending) of a row-major symmetric matrix, via nalgebra.
pub fn dense_eigenvalues(matrix: &[f64], n: usize) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n, n, matrix);
    let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Eigenvalues of `op` through dense assembly + nalgebra.
pub fn operator_eigenvalues(op: &dyn LinearOperator) -> Vec<f64> {
    let h = hesd_core::spectral::dense::dense_matrix(op).unwrap();
    dense_eigenvalues(&h, op.dim())
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Per-coordinate relative error with an absolute floor for near-zero
/// entries.
pub fn assert_close_slices(actual: &[f64], expected: &[f64], rel: f64, floor: f64, what: &str) {
    assert_eq!(actual.len(), expected.len());
    for (i, (a, e)) in actual.iter().zip(expected).enumerate() {
        let tol = rel * a.abs().max(e.abs()).max(floor);
        assert!(
            (a - e).abs() <= tol,
            "{what}[{i}]: {a} vs {e} (|Δ|={}, tol={tol})",
            (a - e).abs()
        );
    }
}

pub fn mlp_spec(input: usize, hidden: Vec<usize>, classes: usize, act: Activation) -> ModelSpec {
    ModelSpec {
        kind: ModelKind::Mlp { hidden },
        input_dim: input,
        classes,
        activation: act,
        batchnorm: false,
        param_cap: 50_000,
    }
}

/// Three small architectures exercising every layer kind.
pub fn toy_model_zoo() -> Vec<(String, ModelSpec)> {
    vec![
        (
            "tanh-mlp".to_string(),
            mlp_spec(4, vec![12, 8], 3, Activation::Tanh),
        ),
        ("relu-mlp-bn".to_string(), {
            let mut spec = mlp_spec(4, vec![10], 3, Activation::Relu);
            spec.batchnorm = true;
            spec
        }),
        (
            "convnet".to_string(),
            ModelSpec {
                kind: ModelKind::Convnet {
                    channels: vec![4, 6],
                },
                input_dim: 12,
                classes: 3,
                activation: Activation::Tanh,
                batchnorm: false,
                param_cap: 50_000,
            },
        ),
    ]
}

pub fn blob_batch(input_dim: usize, classes: usize, samples: usize, seed: u64) -> Batch {
    let dataset = make_dataset(&DatasetConfig {
        kind: DatasetKind::GaussianBlobs {
            center_scale: 3.0,
            noise: 0.8,
        },
        samples,
        input_dim,
        classes,
        seed,
        shift: 0.0,
    })
    .unwrap();
    dataset.train
}

pub fn build(spec: &ModelSpec, seed: u64) -> (FeedforwardModel, ParameterVector) {
    hesd_core::models::build_model(spec, seed).unwrap()
}
