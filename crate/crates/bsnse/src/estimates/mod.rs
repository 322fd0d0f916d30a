//! Numerical audits of the energy inequalities the analysis rests on:
//! comparison (Gronwall) envelopes, driver coercivity, the convection
//! difference bound, a priori bounds, the discrete backward energy identity
//! and the uniqueness contraction. Every audit assembles its constants
//! explicitly and reports violations instead of trusting "there exists C".

mod apriori;
mod coercivity;
mod gronwall;
mod identities;
mod report;
mod uniqueness;

pub use apriori::{apriori_report, ito_energy_residual};
pub use coercivity::{b_difference_report, b_difference_residual, coercivity_residual};
pub use gronwall::{gronwall_envelope, stochastic_gronwall_check};
pub use identities::{identity_report, inequality_report};
pub use report::EstimateReport;
pub use uniqueness::{uniqueness_gap, uniqueness_k};
