//! Finite-dimensional realization of the periodic, zero-mean, divergence-free
//! function spaces and the operators acting on them.
//!
//! Velocity fields are truncated vector Fourier series on the torus
//! `(0,a)^2`.  Only one representative of each conjugate pair `+-k` is
//! stored; the reality condition `c_{-k} = conj(c_k)` is enforced by
//! construction.  Quadratic and cubic products are evaluated on physical
//! grids large enough to be alias-free, so the operator identities tested
//! elsewhere hold to rounding error rather than to discretization error.

mod field;
mod grid;
mod modes;
mod ops;
mod sigma;

pub use field::{NormKind, VelocityField};
pub use grid::GridPlan;
pub use modes::{ModeSet, WaveVector};
pub use ops::{nonlinear_b, pi_product, trilinear_b, trilinear_b_convolution};
pub use sigma::{SigmaSchedule, SigmaVector};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("fields live on different mode sets")]
    ModeSetMismatch,
    #[error("wavevector ({0}, {1}) is not in the mode set")]
    UnknownMode(i32, i32),
}
