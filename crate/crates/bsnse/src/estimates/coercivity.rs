use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::forcing::{Driver, ForcingModel, PhiDriver};
use crate::spectral::{nonlinear_b, ModeSet, SigmaVector, VelocityField};

use super::report::EstimateReport;

/// Sampled audit of the driver coercivity inequality
///
/// `2 <Phi(t, phi, vphi), phi> - ||vphi||^2
///   <= -lambda ||phi||_V^2 - (lb^2 - 1)/(4 lb^2) ||vphi||^2
///      + 2 g(t) + C ||phi||^2`,
///
/// with `lambda` the super-parabolicity margin and `C` assembled explicitly
/// from the model's growth bundle (see
/// [`crate::forcing::AssumptionBundle::coercivity_constants`]).
#[allow(clippy::too_many_arguments)]
pub fn coercivity_residual(
    model: &ForcingModel,
    nu: f64,
    sigma: &SigmaVector,
    lambda: f64,
    lambda_bar: f64,
    modes: &Arc<ModeSet>,
    horizon: f64,
    samples: usize,
    seed: u64,
) -> EstimateReport {
    assert!(lambda > 0.0 && lambda_bar > 1.0);
    let driver = PhiDriver::new(nu, sigma.clone(), model.clone());
    let bundle = model.bundle();
    let cc = bundle.coercivity_constants(lambda, lambda_bar);
    let lb2 = lambda_bar * lambda_bar;
    let z_weight = (lb2 - 1.0) / (4.0 * lb2);

    let mut report = EstimateReport::new("coercivity");
    report.seed = Some(seed);
    report
        .constant("lambda", lambda)
        .constant("lambda_bar", lambda_bar)
        .constant("eps", cc.eps)
        .constant("c", cc.c)
        .constant("beta", bundle.beta)
        .constant("nu", nu);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let t = rng.gen_range(0.0..horizon);
        let amp_phi = rng.gen_range(0.0..3.0);
        let amp_vphi = rng.gen_range(0.0..3.0);
        let phi = VelocityField::random_div_free(modes, &mut rng, amp_phi);
        let vphi = VelocityField::random_div_free(modes, &mut rng, amp_vphi);
        let phi_val = driver.eval(t, &phi, &vphi);
        let vn = vphi.norm_h();
        let lhs = 2.0 * phi_val.inner_h(&phi).expect("same mode set") - vn * vn;
        let g = bundle.g.eval(t);
        let pv = phi.norm_v();
        let ph = phi.norm_h();
        let rhs = -lambda * pv * pv - z_weight * vn * vn + 2.0 * g + cc.c * ph * ph;
        let tol = 1e-9 * (1.0 + lhs.abs() + rhs.abs());
        report.push(lhs, rhs, tol);
    }
    report
}

/// Sampled audit of the convection difference bound
///
/// `|<B(u) - B(v), u - v>| <= (lambda / 4) ||u - v||_V^2
///                            + (2 / lambda) ||v||_V^2 ||u - v||^2`.
pub fn b_difference_residual(
    u: &VelocityField,
    v: &VelocityField,
    lambda: f64,
) -> (f64, f64) {
    let w = u.sub(v).expect("same mode set");
    let diff = nonlinear_b(u).sub(&nonlinear_b(v)).expect("same mode set");
    let lhs = diff.inner_h(&w).expect("same mode set").abs();
    let wv = w.norm_v();
    let wh = w.norm_h();
    let vv = v.norm_v();
    let rhs = lambda / 4.0 * wv * wv + 2.0 / lambda * vv * vv * wh * wh;
    (lhs, rhs)
}

pub fn b_difference_report(
    modes: &Arc<ModeSet>,
    lambda: f64,
    samples: usize,
    seed: u64,
) -> EstimateReport {
    let mut report = EstimateReport::new("b_difference");
    report.seed = Some(seed);
    report.constant("lambda", lambda);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let amp_u = rng.gen_range(0.0..2.0);
        let amp_v = rng.gen_range(0.0..2.0);
        let u = VelocityField::random_div_free(modes, &mut rng, amp_u);
        let v = VelocityField::random_div_free(modes, &mut rng, amp_v);
        let (lhs, rhs) = b_difference_residual(&u, &v, lambda);
        report.push(lhs, rhs, 1e-10 * (1.0 + lhs.abs() + rhs.abs()));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_arguments_are_trivially_coercive() {
        let modes = ModeSet::square(2.0 * PI, 2);
        let model = ForcingModel::saturated(None, 0.5, 0.3, 1.0, 2.0 * PI);
        let driver = PhiDriver::new(1.0, SigmaVector::zero(), model.clone());
        let phi = VelocityField::zero(&modes);
        let lhs = 2.0 * driver.eval(0.1, &phi, &phi).inner_h(&phi).unwrap();
        assert_eq!(lhs, 0.0);
    }

    #[test]
    fn saturated_model_random_samples_never_violate() {
        let modes = ModeSet::square(2.0 * PI, 2);
        let model = ForcingModel::saturated(None, 0.5, 0.3, 1.0, 2.0 * PI);
        let sigma = SigmaVector::constant([0.4, -0.2]);
        let nu = 1.0;
        let lb = 1.5;
        let lambda =
            crate::forcing::superparabolicity_margin(nu, lb, &sigma, 1.0);
        assert!(lambda > 0.0);
        let report =
            coercivity_residual(&model, nu, &sigma, lambda, lb, &modes, 1.0, 300, 77);
        assert!(report.passes(), "{} violations", report.violations);
    }

    #[test]
    fn reserved_margin_shrinks_as_sigma_grows() {
        // growing |sigma| eats into the dissipation reserve lambda, and with
        // lambda smaller the inequality keeps less of ||phi||_V^2 on its
        // right side, so the sampled slack widens; identical samples via a
        // shared seed
        let modes = ModeSet::square(2.0 * PI, 2);
        let model = ForcingModel::zero();
        let nu = 1.0;
        let lb = 1.5;
        let mut lambdas = Vec::new();
        let mut mins = Vec::new();
        for s in [0.1, 0.5, 0.9] {
            let sigma = SigmaVector::constant([s, 0.0]);
            let lambda = crate::forcing::superparabolicity_margin(nu, lb, &sigma, 1.0);
            assert!(lambda > 0.0);
            let r = coercivity_residual(&model, nu, &sigma, lambda, lb, &modes, 1.0, 200, 5);
            assert!(r.passes());
            lambdas.push(lambda);
            mins.push(r.margin_min);
        }
        assert!(lambdas[0] > lambdas[1] && lambdas[1] > lambdas[2], "{lambdas:?}");
        assert!(mins[0] <= mins[1] && mins[1] <= mins[2], "{mins:?}");
        assert!(mins.iter().all(|&v| v >= 0.0), "{mins:?}");
    }

    #[test]
    fn b_difference_trivial_cases() {
        let modes = ModeSet::square(2.0 * PI, 3);
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let u = VelocityField::random_div_free(&modes, &mut rng, 1.5);

        let (lhs, rhs) = b_difference_residual(&u, &u, 0.7);
        assert!(lhs.abs() < 1e-12 && rhs.abs() < 1e-20);

        // v = 0: LHS = |<B(u), u>| = 0 by the cancellation identity
        let zero = VelocityField::zero(&modes);
        let (lhs, _) = b_difference_residual(&u, &zero, 0.7);
        assert!(lhs < 1e-10, "lhs {lhs}");
    }

    #[test]
    fn b_difference_random_pairs_never_violate() {
        let modes = ModeSet::square(2.0 * PI, 3);
        let report = b_difference_report(&modes, 0.5, 300, 13);
        assert!(report.passes(), "{} violations", report.violations);
    }
}
