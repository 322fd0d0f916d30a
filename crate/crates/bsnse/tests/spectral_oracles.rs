//! Cross-checks of the spectral layer against independently computed
//! references: hand-derived coefficients, closed-form norms, and the direct
//! convolution evaluation of the trilinear form.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use bsnse::spectral::{
    nonlinear_b, pi_product, trilinear_b, trilinear_b_convolution, ModeSet, NormKind,
    SigmaVector, VelocityField, WaveVector,
};

fn random_field(modes: &Arc<ModeSet>, seed: u64, amp: f64) -> VelocityField {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    VelocityField::random_div_free(modes, &mut rng, amp)
}

#[test]
fn leray_drops_the_longitudinal_component() {
    // at k = (1, 0) the projector is diag(0, 1): [1, 1] -> [0, 1]
    let modes = ModeSet::square(2.0 * PI, 2);
    let one = Complex64::new(1.0, 0.0);
    let mut u = VelocityField::zero(&modes);
    u.set_coeff(WaveVector::new(1, 0), [one, one]).unwrap();
    let p = u.leray_project();
    let c = p.coeff(WaveVector::new(1, 0)).unwrap();
    assert!((c[0] - Complex64::default()).norm() < 1e-15);
    assert!((c[1] - one).norm() < 1e-15);
}

#[test]
fn single_pair_norms_match_parseval_by_hand() {
    // u = 2 cos x e_y: ||u||^2 = 2 |G| |c|^2 = 2 (2 pi)^2, and the V and
    // D(A) norms pick up lambda = 1 once and twice
    let modes = ModeSet::square(2.0 * PI, 1);
    let mut u = VelocityField::zero(&modes);
    u.set_coeff(WaveVector::new(1, 0), [Complex64::default(), Complex64::new(1.0, 0.0)])
        .unwrap();
    let expect = (2.0f64).sqrt() * 2.0 * PI;
    assert!((u.norm_h() - expect).abs() < 1e-12);
    assert!((u.norm_v() - expect).abs() < 1e-12);
    assert!((u.norm(NormKind::DA) - expect).abs() < 1e-12);
}

#[test]
fn transport_symbol_multiplies_by_i_sigma_dot_k() {
    // sigma = (1, 0), k = (3, 0), period 2 pi: J c = 3 i c
    let modes = ModeSet::square(2.0 * PI, 3);
    let sigma = SigmaVector::constant([1.0, 0.0]);
    let c = Complex64::new(0.7, -0.2);
    let mut u = VelocityField::zero(&modes);
    u.set_coeff(WaveVector::new(3, 0), [Complex64::default(), c]).unwrap();
    let j = u.apply_j(&sigma, 0.0);
    let got = j.coeff(WaveVector::new(3, 0)).unwrap();
    let expect = Complex64::new(0.0, 3.0) * c;
    assert!((got[1] - expect).norm() < 1e-14, "{got:?}");
}

#[test]
fn fft_trilinear_matches_direct_convolution() {
    let modes = ModeSet::square(2.0 * PI, 4);
    for seed in 0..50u64 {
        let u = random_field(&modes, 3 * seed + 1, 1.0);
        let v = random_field(&modes, 3 * seed + 2, 1.3);
        let w = random_field(&modes, 3 * seed + 3, 0.8);
        let fft = trilinear_b(&u, &v, &w).unwrap();
        let conv = trilinear_b_convolution(&u, &v, &w).unwrap();
        let scale = u.norm_v() * v.norm_v() * w.norm_v();
        assert!((fft - conv).abs() < 1e-12 * scale, "{fft} vs {conv}");
    }
}

#[test]
fn projected_product_is_dual_to_the_trilinear_form() {
    // w divergence-free inside the box: the projections in Pi are invisible
    // to the pairing, so <Pi(u, v), w> = b(u, v, w) exactly
    let modes = ModeSet::square(2.0 * PI, 3);
    for seed in 0..20u64 {
        let u = random_field(&modes, 7 * seed + 1, 1.1);
        let v = random_field(&modes, 7 * seed + 2, 0.9);
        let w = random_field(&modes, 7 * seed + 3, 1.4);
        let lhs = pi_product(&u, &v, &modes).unwrap().inner_h(&w).unwrap();
        let rhs = trilinear_b(&u, &v, &w).unwrap();
        let scale = u.norm_v() * v.norm_v() * w.norm_v();
        assert!((lhs - rhs).abs() < 1e-12 * scale, "{lhs} vs {rhs}");
    }
}

#[test]
fn quadratic_scaling_of_the_nonlinearity() {
    let modes = ModeSet::square(2.0 * PI, 3);
    let u = random_field(&modes, 5, 1.0);
    let b1 = nonlinear_b(&u);
    let b4 = nonlinear_b(&u.scale(2.0));
    let diff = b4.sub(&b1.scale(4.0)).unwrap().norm_h();
    assert!(diff < 1e-12 * b4.norm_h().max(1.0), "defect {diff}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leray_is_idempotent(seed in 0u64..1_000_000, amp in 0.1f64..3.0) {
        let modes = ModeSet::square(2.0 * PI, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut u = VelocityField::random_div_free(&modes, &mut rng, amp);
        // perturb off the divergence-free manifold
        u.set_coeff(WaveVector::new(1, 1), [Complex64::new(amp, 0.1), Complex64::new(0.2, -amp)]).unwrap();
        let once = u.leray_project();
        let twice = once.leray_project();
        let drift = twice.sub(&once).unwrap().norm_h();
        prop_assert!(drift < 1e-13 * (1.0 + once.norm_h()), "drift {drift}");
        prop_assert!(once.is_divergence_free(1e-12));
    }

    #[test]
    fn ladyzhenskaya_constant_holds(seed in 0u64..1_000_000, amp in 0.1f64..3.0) {
        let modes = ModeSet::square(2.0 * PI, 4);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let u = VelocityField::random_div_free(&modes, &mut rng, amp);
        let l4 = u.norm(NormKind::L4);
        let bound = 2f64.powf(0.25) * u.norm_h() * u.norm_v();
        prop_assert!(l4 * l4 <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn trilinear_bound_holds(seed in 0u64..1_000_000) {
        let modes = ModeSet::square(2.0 * PI, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let u = VelocityField::random_div_free(&modes, &mut rng, 1.0);
        let v = VelocityField::random_div_free(&modes, &mut rng, 1.0);
        let w = VelocityField::random_div_free(&modes, &mut rng, 1.0);
        let lhs = trilinear_b(&u, &v, &w).unwrap().abs();
        let rhs = 2f64.sqrt()
            * (u.norm_h() * u.norm_v()).sqrt()
            * v.norm_v()
            * (w.norm_h() * w.norm_v()).sqrt();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn antisymmetry_in_the_last_two_slots(seed in 0u64..1_000_000) {
        let modes = ModeSet::square(2.0 * PI, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let u = VelocityField::random_div_free(&modes, &mut rng, 1.0);
        let v = VelocityField::random_div_free(&modes, &mut rng, 1.0);
        let w = VelocityField::random_div_free(&modes, &mut rng, 1.0);
        let sum = trilinear_b(&u, &v, &w).unwrap() + trilinear_b(&u, &w, &v).unwrap();
        let scale = u.norm_v() * v.norm_v() * w.norm_v();
        prop_assert!(sum.abs() < 1e-11 * scale, "defect {sum}");
    }
}
