//! Loss, gradient, and Hessian-vector product over a flat parameter space.
//!
//! The HVP differentiates the inner product of the recorded gradient graph
//! with a constant direction `v`, i.e. the backward pass is taken through a
//! second time. This yields `H·v` exactly (up to rounding), with a single
//! reverse-mode tape and no Hessian materialization.

use crate::autodiff::tape::{Tape, VarId};
use crate::autodiff::{Batch, ParameterVector};
use crate::error::{Error, Result};

/// A differentiable scalar loss over the flat parameter space.
///
/// `loss` receives one leaf node per flat parameter, in segment order.
/// Implementations must be pure: no interior mutability, no RNG.
pub trait Model: Send + Sync {
    /// Segment table describing the flat layout this model expects.
    fn segment_table(&self) -> Vec<(String, Vec<usize>)>;

    /// Build the scalar loss for `batch` on `tape`.
    fn loss(&self, tape: &mut Tape, params: &[VarId], batch: &Batch) -> Result<VarId>;

    fn param_count(&self) -> usize {
        self.segment_table()
            .iter()
            .map(|(_, shape)| shape.iter().product::<usize>())
            .sum()
    }
}

/// Models that emit per-class logits (everything except test fixtures).
pub trait Classifier: Model {
    /// Logits for a single input row.
    fn logits(&self, tape: &mut Tape, params: &[VarId], input: &[f64]) -> Result<Vec<VarId>>;

    fn classes(&self) -> usize;
}

fn check_layout(model: &dyn Model, params: &ParameterVector) -> Result<()> {
    let table = model.segment_table();
    let mut offset = 0usize;
    for (name, shape) in &table {
        let size: usize = shape.iter().product();
        match params.segments().iter().find(|s| &s.name == name) {
            None => {
                return Err(Error::ShapeMismatch {
                    segment: name.clone(),
                    expected: size,
                    actual: 0,
                })
            }
            Some(seg) => {
                if seg.shape != *shape || seg.offset != offset {
                    return Err(Error::ShapeMismatch {
                        segment: name.clone(),
                        expected: size,
                        actual: seg.len(),
                    });
                }
            }
        }
        offset += size;
    }
    if offset != params.len() {
        return Err(Error::ShapeMismatch {
            segment: "<flat>".to_string(),
            expected: offset,
            actual: params.len(),
        });
    }
    Ok(())
}

fn leaves(tape: &mut Tape, params: &ParameterVector) -> Vec<VarId> {
    params.values().iter().map(|&v| tape.leaf(v)).collect()
}

/// Mean cross-entropy of the batch under `model`.
pub fn loss_forward(model: &dyn Model, params: &ParameterVector, batch: &Batch) -> Result<f64> {
    check_layout(model, params)?;
    let mut tape = Tape::new();
    let ids = leaves(&mut tape, params);
    let loss = model.loss(&mut tape, &ids, batch)?;
    let value = tape.value(loss);
    if !value.is_finite() {
        return Err(Error::non_finite("loss_forward"));
    }
    Ok(value)
}

/// Gradient of the batch loss, same segment layout as `params`.
pub fn gradient(
    model: &dyn Model,
    params: &ParameterVector,
    batch: &Batch,
) -> Result<ParameterVector> {
    check_layout(model, params)?;
    let mut tape = Tape::new();
    let ids = leaves(&mut tape, params);
    let loss = model.loss(&mut tape, &ids, batch)?;
    if !tape.value(loss).is_finite() {
        return Err(Error::non_finite("gradient: loss"));
    }
    let grads = tape.backward_values(loss, &ids);
    let out = params.with_values(grads)?;
    if !out.all_finite() {
        return Err(Error::non_finite("gradient"));
    }
    Ok(out)
}

/// Exact Hessian-vector product `H·v` of the batch loss at `params`.
pub fn hvp(
    model: &dyn Model,
    params: &ParameterVector,
    batch: &Batch,
    v: &ParameterVector,
) -> Result<ParameterVector> {
    check_layout(model, params)?;
    if !params.same_layout(v) {
        return Err(Error::ShapeMismatch {
            segment: "<direction>".to_string(),
            expected: params.len(),
            actual: v.len(),
        });
    }
    let mut tape = Tape::new();
    let ids = leaves(&mut tape, params);
    let loss = model.loss(&mut tape, &ids, batch)?;
    if !tape.value(loss).is_finite() {
        return Err(Error::non_finite("hvp: loss"));
    }
    let grad_nodes = tape.backward_graph(loss, &ids);
    // s = <grad, v> with v held constant, then one numeric backward pass.
    let mut s = tape.constant(0.0);
    for (&g, &vi) in grad_nodes.iter().zip(v.values()) {
        if vi == 0.0 {
            continue;
        }
        let c = tape.constant(vi);
        s = tape.mul_add(g, c, s);
    }
    let hv = tape.backward_values(s, &ids);
    let out = params.with_values(hv)?;
    if !out.all_finite() {
        return Err(Error::non_finite("hvp"));
    }
    Ok(out)
}

/// Loss plus numeric gradient in one pass (used by the training loop).
pub fn loss_and_gradient(
    model: &dyn Model,
    params: &ParameterVector,
    batch: &Batch,
) -> Result<(f64, ParameterVector)> {
    check_layout(model, params)?;
    let mut tape = Tape::new();
    let ids = leaves(&mut tape, params);
    let loss = model.loss(&mut tape, &ids, batch)?;
    let value = tape.value(loss);
    if !value.is_finite() {
        return Err(Error::non_finite("loss"));
    }
    let grads = tape.backward_values(loss, &ids);
    let g = params.with_values(grads)?;
    if !g.all_finite() {
        return Err(Error::non_finite("gradient"));
    }
    Ok((value, g))
}

/// Mean cross-entropy over per-sample logits, with a numerically stable
/// log-sum-exp. The max logit is detached (inserted as a constant), which
/// changes neither the value nor any derivative: the expression is constant
/// in the shift.
pub fn mean_cross_entropy(
    tape: &mut Tape,
    logits_per_sample: &[Vec<VarId>],
    labels: &[usize],
) -> VarId {
    debug_assert_eq!(logits_per_sample.len(), labels.len());
    let mut total = tape.constant(0.0);
    for (logits, &label) in logits_per_sample.iter().zip(labels) {
        let m = logits
            .iter()
            .map(|&id| tape.value(id))
            .fold(f64::NEG_INFINITY, f64::max);
        let m_node = tape.constant(m);
        let mut sum = tape.constant(0.0);
        for &z in logits {
            let shifted = tape.sub(z, m_node);
            let e = tape.exp(shifted);
            sum = tape.add(sum, e);
        }
        let lse_rest = tape.ln(sum);
        let lse = tape.add(m_node, lse_rest);
        let nll = tape.sub(lse, logits[label]);
        total = tape.add(total, nll);
    }
    let inv_n = tape.constant(1.0 / labels.len() as f64);
    tape.mul(total, inv_n)
}

/// Fraction of batch samples whose argmax logit equals the label.
/// Ties resolve to the lowest class index.
pub fn accuracy(model: &dyn Classifier, params: &ParameterVector, batch: &Batch) -> Result<f64> {
    check_layout(model, params)?;
    let mut correct = 0usize;
    // Fresh tape per chunk bounds peak memory; predictions are respected
    // in sample order either way.
    const CHUNK: usize = 256;
    let mut start = 0;
    while start < batch.len() {
        let end = (start + CHUNK).min(batch.len());
        let mut tape = Tape::new();
        let ids = leaves(&mut tape, params);
        for i in start..end {
            let logits = model.logits(&mut tape, &ids, batch.inputs.row(i))?;
            let mut best = 0usize;
            let mut best_v = f64::NEG_INFINITY;
            for (c, &id) in logits.iter().enumerate() {
                let v = tape.value(id);
                if v > best_v {
                    best_v = v;
                    best = c;
                }
            }
            if best == batch.labels[i] {
                correct += 1;
            }
        }
        start = end;
    }
    Ok(correct as f64 / batch.len() as f64)
}
