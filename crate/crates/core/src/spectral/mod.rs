//! HESD estimation: extreme eigenvalues by power iteration, Ritz
//! nodes/weights by stochastic Lanczos quadrature, kernel-smoothed density.

pub mod dense;
mod density;
mod lanczos;
mod operator;
mod power;
mod ritz;
pub mod tridiag;

pub use density::{probe_vector, slq_density, slq_density_serial, SlqConfig, SpectralDensity};
pub use lanczos::{lanczos, LanczosOutput, TridiagonalMatrix, BETA_BREAKDOWN_TOL};
pub use operator::{
    DenseSymOperator, DiagonalOperator, HessianOperator, LinearOperator, ShiftedOperator,
};
pub use power::{extreme_pair, power_extreme, PowerConfig, PowerResult};
pub use ritz::{ritz_from_tridiagonal, RitzNode, RitzSet};
