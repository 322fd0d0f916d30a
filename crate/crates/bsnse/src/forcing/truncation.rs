use serde::{Deserialize, Serialize};

use crate::spectral::VelocityField;

/// Smooth radial cutoff: 1 on `[0, M]`, 0 on `[M+1, inf)`, and the C^2
/// quintic smoothstep complement `1 - (6 tau^5 - 15 tau^4 + 10 tau^3)` in
/// between, `tau = x - M`. Lipschitz constant 15/8.
pub fn truncate_r_m(m: f64, x_norm: f64) -> f64 {
    assert!(m > 0.0, "truncation radius M must be positive");
    if x_norm <= m {
        1.0
    } else if x_norm >= m + 1.0 {
        0.0
    } else {
        let tau = x_norm - m;
        1.0 - tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))
    }
}

/// Radial retraction onto the H-ball of radius `n`:
/// `phi_n(z) = z * n / (||z|| v n)`. Identity inside the ball, rescales to
/// norm exactly `n` outside; 1-Lipschitz.
pub fn retract_phi_n(n: f64, z: &VelocityField) -> VelocityField {
    assert!(n > 0.0);
    let norm = z.norm_h();
    if norm <= n {
        z.clone()
    } else {
        z.scale(n / norm)
    }
}

/// Parameters of the truncated driver: state radius `M`, integrand radius
/// `n`, and the safety factor entering the convection part of the
/// dominating schedule `h_M`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// State cutoff radius (H-norm).
    pub m: f64,
    /// Z retraction radius (H-norm).
    pub n: u32,
    /// Coefficient of the convection bound used inside `h_M`; validated by
    /// the sampled esssup check at assembly time.
    pub c_b: f64,
}

impl TruncationSpec {
    pub fn new(m: f64, n: u32) -> Self {
        Self { m, n, c_b: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn cutoff_case_table() {
        assert_eq!(truncate_r_m(2.0, 1.0), 1.0);
        assert_eq!(truncate_r_m(2.0, 2.0), 1.0);
        assert_eq!(truncate_r_m(2.0, 3.0), 0.0);
        assert_eq!(truncate_r_m(2.0, 5.0), 0.0);
        // s(0.5) = 0.5 for the quintic smoothstep
        assert!((truncate_r_m(2.0, 2.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cutoff_is_c2_at_the_seams() {
        // one-sided second differences agree across both junctions
        let m = 1.5;
        let h = 1e-4;
        for x0 in [m, m + 1.0] {
            let d2 = |x: f64| {
                (truncate_r_m(m, x + h) - 2.0 * truncate_r_m(m, x) + truncate_r_m(m, x - h))
                    / (h * h)
            };
            assert!(d2(x0).abs() < 1e-2, "second derivative jump at {x0}");
        }
    }

    #[test]
    fn cutoff_lipschitz_constant_at_most_15_over_8() {
        let m = 3.0;
        let h = 1e-6;
        let mut worst = 0.0f64;
        for i in 0..=2000 {
            let x = m - 0.5 + 2.0 * i as f64 / 1000.0;
            let slope = (truncate_r_m(m, x + h) - truncate_r_m(m, x)) / h;
            worst = worst.max(slope.abs());
        }
        assert!(worst <= 15.0 / 8.0 + 1e-3, "max slope {worst}");
    }

    #[test]
    fn retraction_cases() {
        let ms = ModeSet::square(2.0 * std::f64::consts::PI, 2);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let z = VelocityField::random_div_free(&ms, &mut rng, 1.0);

        // inside the ball: unchanged
        let r = retract_phi_n(2.0, &z);
        assert!((r.norm_h() - 1.0).abs() < 1e-12);

        // outside: rescaled to norm exactly n, direction preserved
        let big = z.scale(6.0);
        let r = retract_phi_n(3.0, &big);
        assert!((r.norm_h() - 3.0).abs() < 1e-12);
        assert!((r.sub(&big.scale(0.5)).unwrap().norm_h()) < 1e-12);

        let zero = VelocityField::zero(&ms);
        assert!(retract_phi_n(1.0, &zero).is_zero());
    }

    #[test]
    fn retraction_is_1_lipschitz_on_random_pairs() {
        let ms = ModeSet::square(2.0 * std::f64::consts::PI, 2);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = VelocityField::random_div_free(&ms, &mut rng, 3.0);
            let b = VelocityField::random_div_free(&ms, &mut rng, 0.5);
            let lhs = retract_phi_n(1.0, &a)
                .sub(&retract_phi_n(1.0, &b))
                .unwrap()
                .norm_h();
            let rhs = a.sub(&b).unwrap().norm_h();
            assert!(lhs <= rhs + 1e-12);
        }
    }
}
