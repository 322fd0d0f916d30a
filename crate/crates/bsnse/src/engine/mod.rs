//! Backward time stepping: the driving noise ensemble, regression-based
//! conditional expectations, the implicit Euler / Picard step, and the
//! closed-form single-mode oracle used to cross-check the whole chain.

mod brownian;
mod oracle;
mod regression;
mod solution;
mod solver;

pub use brownian::{BrownianEnsemble, TimeGrid};
pub use oracle::{gauss_hermite, LinearModeOracle, Psi};
pub use regression::{regress_condexp, RegressionFit, StateBasis};
pub use solution::{dof_count, dof_value, field_from_dofs, BsdeSolution, Diagnostics, NodeFit};
pub use solver::{solve_bsnse, SolverConfig, SolverError, TerminalCondition};
