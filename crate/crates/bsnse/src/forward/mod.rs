//! Deterministic pseudospectral forward solver, used as an independent
//! oracle for the backward solve through time reversal.
//!
//! For deterministic data (no transport noise, no integrand feedback) the
//! backward system reduces to the ODE `du/dt = nu A u - B(u) - f(t)` run
//! from the terminal value. Substituting `v(s) = -u(T - s)` and using that
//! `B` is quadratic (`B(-v) = B(v)`) gives the ordinary forward
//! Navier-Stokes system
//!
//! `dv/ds = -nu A v - B(v) - f(T - s), v(0) = -u(T)`,
//!
//! so a forward run from `-xi` with the time-reflected forcing reproduces
//! the backward trajectory as `u(t) = -v(T - t)`. The forward integrator is
//! classical RK4 on the Galerkin coefficients.

use std::sync::Arc;

use thiserror::Error;

use crate::spectral::{nonlinear_b, SpectralError, VelocityField};

#[derive(Debug, Error)]
pub enum ForwardError {
    #[error("forward solve blew up at t = {t}: ||v||_V = {norm_v:.3e}")]
    BlowUp { t: f64, norm_v: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Trajectory of the forward solve at the step endpoints.
#[derive(Debug)]
pub struct ForwardRun {
    pub horizon: f64,
    pub steps: usize,
    pub states: Vec<VelocityField>,
}

impl ForwardRun {
    pub fn time(&self, i: usize) -> f64 {
        self.horizon * i as f64 / self.steps as f64
    }
}

/// Integrate `dv/ds = -nu A v - B(v) + g(s)` from `v0` by RK4.
///
/// Aborts when the gradient norm exceeds a million times its initial value,
/// which on a fixed Galerkin space only happens when the step size is far
/// too coarse for the data.
pub fn solve_forward(
    nu: f64,
    v0: &VelocityField,
    forcing: Option<&(dyn Fn(f64) -> VelocityField + Sync)>,
    horizon: f64,
    steps: usize,
) -> Result<ForwardRun, ForwardError> {
    assert!(horizon > 0.0 && steps >= 1);
    let modes = Arc::clone(v0.mode_set());
    let dt = horizon / steps as f64;
    let guard = 1e6 * (1.0 + v0.norm_v());
    let rhs = |s: f64, v: &VelocityField| -> Result<VelocityField, SpectralError> {
        let mut out = nonlinear_b(v).scale(-1.0);
        out.axpy_in_place(-nu, &v.stokes_apply())?;
        if let Some(g) = forcing {
            let gf = g(s);
            let gf = if gf.mode_set().same_as(&modes) {
                gf
            } else {
                gf.embed(&modes)
            };
            out.axpy_in_place(1.0, &gf)?;
        }
        Ok(out)
    };

    let mut states = Vec::with_capacity(steps + 1);
    let mut v = v0.clone();
    states.push(v.clone());
    for i in 0..steps {
        let s = i as f64 * dt;
        let k1 = rhs(s, &v)?;
        let mut y = v.clone();
        y.axpy_in_place(0.5 * dt, &k1)?;
        let k2 = rhs(s + 0.5 * dt, &y)?;
        let mut y = v.clone();
        y.axpy_in_place(0.5 * dt, &k2)?;
        let k3 = rhs(s + 0.5 * dt, &y)?;
        let mut y = v.clone();
        y.axpy_in_place(dt, &k3)?;
        let k4 = rhs(s + dt, &y)?;
        v.axpy_in_place(dt / 6.0, &k1)?;
        v.axpy_in_place(dt / 3.0, &k2)?;
        v.axpy_in_place(dt / 3.0, &k3)?;
        v.axpy_in_place(dt / 6.0, &k4)?;
        let nv = v.norm_v();
        if !nv.is_finite() || nv > guard {
            return Err(ForwardError::BlowUp {
                t: s + dt,
                norm_v: nv,
            });
        }
        states.push(v.clone());
    }
    Ok(ForwardRun {
        horizon,
        steps,
        states,
    })
}

/// Worst relative mismatch between a backward trajectory `u` sampled at the
/// grid nodes and the reversed forward run: compares `u(t_i)` with
/// `-v(T - t_i)` in the H norm, relative to the larger of the two norms.
/// Nodes where both sides vanish contribute zero.
pub fn reversal_residual(
    backward: &[VelocityField],
    run: &ForwardRun,
) -> Result<f64, SpectralError> {
    assert_eq!(
        backward.len(),
        run.steps + 1,
        "trajectories must share the time grid"
    );
    let mut worst = 0.0f64;
    for (i, u) in backward.iter().enumerate() {
        let v = &run.states[run.steps - i];
        let diff = u.add(v)?.norm_h();
        let scale = u.norm_h().max(v.norm_h());
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        } else {
            worst = worst.max(diff);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeSet;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn shear(modes: &Arc<ModeSet>, amp: f64) -> VelocityField {
        VelocityField::from_pairs(
            modes,
            &[((1, 0), [Complex64::default(), Complex64::new(amp, 0.0)])],
        )
        .unwrap()
    }

    fn taylor_green(modes: &Arc<ModeSet>) -> VelocityField {
        // (sin x cos y, -cos x sin y): its self-advection is a pure
        // gradient, so the projected nonlinearity vanishes and the exact
        // solution is the profile times exp(-2 nu t).
        let q = Complex64::new(0.0, 0.25);
        VelocityField::from_pairs(modes, &[((1, 1), [-q, q]), ((1, -1), [-q, -q])]).unwrap()
    }

    #[test]
    fn heat_decay_at_rk4_accuracy() {
        let modes = ModeSet::square(2.0 * PI, 2);
        let v0 = shear(&modes, 1.0);
        let run = solve_forward(1.0, &v0, None, 1.0, 100).unwrap();
        let got = run.states[100].coeff(crate::spectral::WaveVector::new(1, 0)).unwrap();
        let expect = (-1.0f64).exp();
        assert!((got[1].re - expect).abs() < 1e-9, "{} vs {expect}", got[1].re);
    }

    #[test]
    fn taylor_green_decays_exactly_through_the_nonlinearity() {
        let modes = ModeSet::square(2.0 * PI, 3);
        let nu = 0.4;
        let v0 = taylor_green(&modes);
        assert!(v0.is_divergence_free(1e-14));
        let run = solve_forward(nu, &v0, None, 1.0, 200).unwrap();
        let expect = v0.scale((-2.0 * nu * 1.0f64).exp());
        let err = run.states[200].sub(&expect).unwrap().norm_h() / expect.norm_h();
        assert!(err < 1e-9, "relative error {err}");
    }

    #[test]
    fn unforced_energy_balance() {
        // d/dt ||v||^2 / 2 = -nu ||v||_V^2; integrate both sides over the
        // run (trapezoid) and compare.
        let modes = ModeSet::square(2.0 * PI, 2);
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        let v0 = VelocityField::random_div_free(&modes, &mut rng, 1.0);
        let nu = 0.6;
        let steps = 400;
        let run = solve_forward(nu, &v0, None, 0.5, steps).unwrap();
        let dt = 0.5 / steps as f64;
        let e0 = 0.5 * v0.norm_h().powi(2);
        let e1 = 0.5 * run.states[steps].norm_h().powi(2);
        let mut dissipated = 0.0;
        for (i, s) in run.states.iter().enumerate() {
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            dissipated += w * dt * nu * s.norm_v().powi(2);
        }
        // tolerance dominated by the trapezoid error of the time quadrature
        assert!(
            (e0 - e1 - dissipated).abs() < 5e-6 * e0,
            "balance defect {}",
            e0 - e1 - dissipated
        );
    }

    #[test]
    fn reversal_recovers_the_backward_heat_trajectory() {
        // Backward single-mode solution u(t) = e^{-nu lambda (T - t)} xi;
        // the forward run from -xi must reproduce it under reflection.
        let modes = ModeSet::square(2.0 * PI, 1);
        let nu = 0.8;
        let horizon = 1.0;
        let steps = 64;
        let xi = shear(&modes, 0.9);
        let backward: Vec<VelocityField> = (0..=steps)
            .map(|i| {
                let t = horizon * i as f64 / steps as f64;
                xi.scale((-nu * (horizon - t)).exp())
            })
            .collect();
        let run = solve_forward(nu, &xi.scale(-1.0), None, horizon, steps).unwrap();
        let resid = reversal_residual(&backward, &run).unwrap();
        assert!(resid < 1e-8, "residual {resid}");
    }

    #[test]
    fn blow_up_guard_trips_on_unstable_steps() {
        // dt * nu * lambda_max far beyond the RK4 stability interval.
        let modes = ModeSet::square(2.0 * PI, 4);
        let v0 = VelocityField::from_pairs(
            &modes,
            &[((4, 4), [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)])],
        )
        .unwrap();
        let err = solve_forward(100.0, &v0, None, 10.0, 4).unwrap_err();
        assert!(matches!(err, ForwardError::BlowUp { .. }));
    }
}
