//! Reverse-mode differentiation with exact Hessian-vector products.

mod data;
mod ops;
mod params;
pub mod tape;

pub use data::{Batch, Tensor};
pub use ops::{
    accuracy, gradient, hvp, loss_and_gradient, loss_forward, mean_cross_entropy, Classifier,
    Model,
};
pub use params::{flatten, ParameterVector, SegmentSpec};
pub use tape::{Tape, VarId};
