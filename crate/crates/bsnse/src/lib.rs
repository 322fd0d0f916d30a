//! Spectral Galerkin solver and verification harness for the two-dimensional
//! backward stochastic Navier-Stokes equations (BSNSE) on a periodic torus.
//!
//! The crate is organized around five subsystems:
//!
//! * [`spectral`] — finite Fourier mode sets, divergence-free velocity fields,
//!   the Stokes operator, Leray projection, the convection term and all norms.
//! * [`forcing`] — concrete forcing models with machine-checkable assumption
//!   bundles, the super-parabolicity margin, and the driver truncation
//!   machinery (smooth radial cutoff, ball retraction, dominating schedule).
//! * [`engine`] — the backward-Euler / least-squares Monte Carlo solver for the
//!   projected backward system, with Picard treatment of the implicit driver
//!   and martingale-integrand extraction.
//! * [`estimates`] — numerical audits of the energy inequalities: coercivity,
//!   trilinear difference bounds, Gronwall envelopes, a priori bounds, the
//!   discrete Ito balance and the uniqueness contraction.
//! * [`forward`] — a deterministic pseudospectral forward Navier-Stokes solver
//!   used as an independent oracle through time reversal.
//!
//! Path-ensemble loops are data-parallel via `rayon` when the default
//! `parallel` feature is enabled; all reductions run in a fixed chunk order so
//! results are bit-identical regardless of worker count.

pub mod engine;
pub mod estimates;
pub mod forcing;
pub mod forward;
pub mod io;
pub mod par;
pub mod spectral;

pub use engine::{
    BrownianEnsemble, BsdeSolution, SolverConfig, TerminalCondition, TimeGrid,
};
pub use forcing::{ForcingModel, TruncationSpec};
pub use spectral::{ModeSet, SigmaSchedule, SigmaVector, VelocityField, WaveVector};
