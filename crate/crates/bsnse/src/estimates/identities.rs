use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::spectral::{trilinear_b, ModeSet, NormKind, VelocityField};

use super::report::EstimateReport;

const REL_TOL: f64 = 1e-10;

/// Sampled audit of the exact algebraic identities of the convection form on
/// random divergence-free fields:
///
/// * `b(u, v, v) = 0` (antisymmetry in the last slot against itself);
/// * `b(u, v, w) = -b(u, w, v)`;
/// * `b(v, v, A v) = 0` (the 2D enstrophy cancellation, evaluated with the
///   alias-free product so no truncation enters).
///
/// All three are checked to `1e-10` relative to the product of gradient
/// norms. Three samples are pushed per field triple.
pub fn identity_report(modes: &Arc<ModeSet>, samples: usize, seed: u64) -> EstimateReport {
    let mut report = EstimateReport::new("identities");
    report.seed = Some(seed);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let amp_u = rng.gen_range(0.1..2.0);
        let amp_v = rng.gen_range(0.1..2.0);
        let amp_w = rng.gen_range(0.1..2.0);
        let u = VelocityField::random_div_free(modes, &mut rng, amp_u);
        let v = VelocityField::random_div_free(modes, &mut rng, amp_v);
        let w = VelocityField::random_div_free(modes, &mut rng, amp_w);

        let scale_vv = u.norm_v() * v.norm_v() * v.norm_v();
        let bvv = trilinear_b(&u, &v, &v).expect("same mode set");
        report.push(bvv.abs(), 0.0, REL_TOL * scale_vv);

        let scale_vw = u.norm_v() * v.norm_v() * w.norm_v();
        let bvw = trilinear_b(&u, &v, &w).expect("same mode set");
        let bwv = trilinear_b(&u, &w, &v).expect("same mode set");
        report.push((bvw + bwv).abs(), 0.0, REL_TOL * scale_vw);

        let av = v.stokes_apply();
        let scale_av = v.norm_v() * v.norm_v() * av.norm_v();
        let bav = trilinear_b(&v, &v, &av).expect("same mode set");
        report.push(bav.abs(), 0.0, REL_TOL * scale_av);
    }
    report
}

/// Sampled audit of the interpolation and trilinear inequalities with their
/// explicit torus constants:
///
/// * Ladyzhenskaya: `||u||_{L^4}^2 <= 2^{1/4} ||u|| ||u||_V`;
/// * `|b(u, v, w)| <= 2^{1/2} ||u||^{1/2} ||u||_V^{1/2} ||v||_V
///    ||w||^{1/2} ||w||_V^{1/2}`.
///
/// Two samples are pushed per field triple; any violation beyond rounding is
/// a counterexample to the stated constant.
pub fn inequality_report(modes: &Arc<ModeSet>, samples: usize, seed: u64) -> EstimateReport {
    let mut report = EstimateReport::new("inequalities");
    report.seed = Some(seed);
    report.constant("ladyzhenskaya", 2f64.powf(0.25));
    report.constant("trilinear", 2f64.sqrt());
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let amp_u = rng.gen_range(0.1..2.0);
        let amp_v = rng.gen_range(0.1..2.0);
        let amp_w = rng.gen_range(0.1..2.0);
        let u = VelocityField::random_div_free(modes, &mut rng, amp_u);
        let v = VelocityField::random_div_free(modes, &mut rng, amp_v);
        let w = VelocityField::random_div_free(modes, &mut rng, amp_w);

        let l4 = u.norm(NormKind::L4);
        let lhs = l4 * l4;
        let rhs = 2f64.powf(0.25) * u.norm_h() * u.norm_v();
        report.push(lhs, rhs, 1e-12 * (1.0 + rhs));

        let lhs = trilinear_b(&u, &v, &w).expect("same mode set").abs();
        let rhs = 2f64.sqrt()
            * u.norm_h().sqrt()
            * u.norm_v().sqrt()
            * v.norm_v()
            * w.norm_h().sqrt()
            * w.norm_v().sqrt();
        report.push(lhs, rhs, 1e-12 * (1.0 + rhs));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn identities_hold_on_random_fields() {
        let modes = ModeSet::square(2.0 * PI, 3);
        let report = identity_report(&modes, 100, 21);
        assert_eq!(report.samples, 300);
        assert!(report.passes(), "{} violations", report.violations);
    }

    #[test]
    fn inequalities_hold_on_random_fields() {
        let modes = ModeSet::square(2.0 * PI, 3);
        let report = inequality_report(&modes, 100, 22);
        assert_eq!(report.samples, 200);
        assert!(report.passes(), "{} violations", report.violations);
    }

    #[test]
    fn ladyzhenskaya_ratio_of_a_single_cosine_mode() {
        // u = (0, cos x): mean of cos^4 is 3/8 and of cos^2 is 1/2, so the
        // ratio ||u||_{L4}^2 / (||u|| ||u||_V) is sqrt(3/2) / (2 pi), well
        // inside the 2^{1/4} bound; amplitude cancels
        let modes = ModeSet::square(2.0 * PI, 1);
        let u = VelocityField::from_pairs(
            &modes,
            &[(
                (1, 0),
                [num_complex::Complex64::default(), num_complex::Complex64::new(0.5, 0.0)],
            )],
        )
        .unwrap();
        let l4 = u.norm(NormKind::L4);
        let ratio = l4 * l4 / (u.norm_h() * u.norm_v());
        let expect = 1.5f64.sqrt() / (2.0 * PI);
        assert!((ratio - expect).abs() < 1e-12, "ratio {ratio} vs {expect}");
    }
}
