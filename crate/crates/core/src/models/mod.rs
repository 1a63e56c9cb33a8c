//! Toy architectures and synthetic datasets sized so that HESD phenomena
//! are observable and dense-oracle-checkable on a desk.

mod datasets;
mod feedforward;
pub mod quadratic;
mod spec;

pub use crate::autodiff::{Batch, Tensor};
pub use datasets::{make_dataset, DatasetConfig, DatasetKind, SplitTag, SyntheticDataset};
pub use feedforward::{build_model, FeedforwardModel};
pub use quadratic::QuadraticModel;
pub use spec::{Activation, ModelKind, ModelSpec, DEFAULT_PARAM_CAP};
