//! Estimation of Hessian eigenvalue spectral densities (HESD) for small
//! neural networks, plus the criteria that classify a spectrum as mainly
//! positive / mainly negative / quasi-singular and turn pairs of spectra
//! into a generalization verdict.
//!
//! The pipeline, end to end:
//!
//! 1. [`autodiff`] — a tape-based reverse-mode engine whose backward pass
//!    can itself be differentiated, giving exact Hessian-vector products
//!    without ever forming the Hessian.
//! 2. [`models`] — toy architectures (MLP, minimal 1-d convnet, wide dense
//!    block) and synthetic datasets small enough that the full spectrum can
//!    be cross-checked against a dense eigendecomposition.
//! 3. [`spectral`] — power iteration for extreme eigenvalues and stochastic
//!    Lanczos quadrature (full reorthogonalization) for the density itself.
//! 4. [`criteria`] — the C_t type criterion, r_e and K_H05 generalization
//!    criteria, HESD classification, and the unified assessment algorithm.
//! 5. [`optim`] — SGD/AdamW/AdaHessian training harness that produces the
//!    checkpoint series the criteria are evaluated on, including the
//!    gradient-manipulating regimes (spatial averaging, global-norm
//!    clipping) that distort the observed spectrum.
//! 6. [`io`] — run configs, binary checkpoints, and report artifacts.
//!
//! Probe-level and column-level loops are data-parallel. With the default
//! `parallel` feature they run on rayon; without it the same code runs
//! sequentially. Both paths reduce in a fixed order, so results are
//! bit-identical either way.

pub mod analysis;
pub mod autodiff;
pub mod criteria;
pub mod error;
pub mod exec;
pub mod io;
pub mod models;
pub mod optim;
pub mod spectral;

pub use error::{Error, Result};

/// Schema version stamped into every JSON artifact this crate emits.
/// Loaders reject files whose major version is newer than this.
pub const SCHEMA_VERSION: u32 = 1;
