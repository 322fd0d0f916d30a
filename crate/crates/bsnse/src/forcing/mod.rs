//! Concrete forcing models with machine-checkable assumption bundles, the
//! super-parabolicity margin, and the driver truncation machinery.

mod driver;
mod model;
mod truncation;

pub use driver::{assemble_truncated_driver, Driver, PhiDriver, TruncatedDriver};
pub use model::{AssumptionBundle, ForcingKind, ForcingModel, TimeFn};
pub use truncation::{retract_phi_n, truncate_r_m, TruncationSpec};

use crate::spectral::SigmaVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForcingError {
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error("dominating schedule h_M fails the sampled esssup check at t = {t}: h_M = {h}, sampled ||Phi(t,w,0)|| = {observed}")]
    InvalidDomination { t: f64, h: f64, observed: f64 },
}

/// Super-parabolicity margin `lambda = inf_t (nu - lambda_bar^2 |sigma(t)|^2 / 2)`.
///
/// The configuration is admissible iff the returned margin is positive
/// (the maximum of `(sigma . xi)^2` over unit vectors `xi` is `|sigma|^2`).
/// A nonpositive margin is returned rather than an error; callers reject it.
pub fn superparabolicity_margin(
    nu: f64,
    lambda_bar: f64,
    sigma: &SigmaVector,
    horizon: f64,
) -> f64 {
    nu - lambda_bar * lambda_bar * sigma.sup_norm_sq(horizon) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SigmaVector;

    #[test]
    fn margin_closed_form_cases() {
        let s = SigmaVector::constant([0.5, 0.0]);
        let m = superparabolicity_margin(1.0, 2f64.sqrt(), &s, 1.0);
        assert!((m - 0.75).abs() < 1e-14);

        let zero = SigmaVector::zero();
        assert!((superparabolicity_margin(0.3, 2.0, &zero, 1.0) - 0.3).abs() < 1e-15);

        let s = SigmaVector::constant([1.0, 0.0]);
        let m = superparabolicity_margin(0.1, 2f64.sqrt(), &s, 1.0);
        assert!((m + 0.9).abs() < 1e-14);
    }

    #[test]
    fn margin_matches_grid_search_over_unit_vectors() {
        // inf over t of min over unit xi of (2 nu |xi|^2 - lb^2 (sigma.xi)^2)/2
        let nu = 0.8;
        let lb = 1.4;
        let s = SigmaVector::constant([0.3, -0.4]);
        let mut worst = f64::INFINITY;
        for i in 0..10_000 {
            let th = 2.0 * std::f64::consts::PI * i as f64 / 10_000.0;
            let xi = [th.cos(), th.sin()];
            let dot = 0.3 * xi[0] - 0.4 * xi[1];
            worst = worst.min(nu - lb * lb * dot * dot / 2.0);
        }
        let m = superparabolicity_margin(nu, lb, &s, 1.0);
        assert!((m - worst).abs() < 1e-6);
    }
}
