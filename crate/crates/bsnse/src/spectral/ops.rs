use std::sync::Arc;

use num_complex::Complex64;

use super::field::VelocityField;
use super::grid::GridPlan;
use super::modes::ModeSet;
use super::SpectralError;

/// Trilinear convection pairing
/// `b(u, v, w) = sum_ij int_G u_i (d_i v_j) w_j dx`,
/// evaluated by exact grid quadrature (the cubic integrand is fully resolved
/// on the mode set's product grid).
pub fn trilinear_b(
    u: &VelocityField,
    v: &VelocityField,
    w: &VelocityField,
) -> Result<f64, SpectralError> {
    let ms = u.mode_set();
    if !ms.same_as(v.mode_set()) || !ms.same_as(w.mode_set()) {
        return Err(SpectralError::ModeSetMismatch);
    }
    let plan = ms.product_grid();
    let u1 = u.grid_values(plan, 0, None);
    let u2 = u.grid_values(plan, 1, None);
    let mut total = 0.0;
    for j in 0..2 {
        let dvj_dx = v.grid_values(plan, j, Some(0));
        let dvj_dy = v.grid_values(plan, j, Some(1));
        let wj = w.grid_values(plan, j, None);
        for i in 0..u1.len() {
            total += (u1[i].re * dvj_dx[i].re + u2[i].re * dvj_dy[i].re) * wj[i].re;
        }
    }
    let weight = (ms.period() / plan.n() as f64).powi(2);
    Ok(total * weight)
}

/// Independent route for `b(u, v, w)`: direct summation over Fourier triples
/// `k + l + m = 0`. O(modes^2); intended for cross-checks at small mode
/// counts.
pub fn trilinear_b_convolution(
    u: &VelocityField,
    v: &VelocityField,
    w: &VelocityField,
) -> Result<f64, SpectralError> {
    let ms = u.mode_set();
    if !ms.same_as(v.mode_set()) || !ms.same_as(w.mode_set()) {
        return Err(SpectralError::ModeSetMismatch);
    }
    let kappa = ms.wavenumber_scale();
    let mut total = Complex64::default();
    for &k in ms.modes() {
        let cu = u.coeff(k)?;
        for &l in ms.modes() {
            let m = super::modes::WaveVector::new(-(k.kx + l.kx), -(k.ky + l.ky));
            if !ms.contains(m) {
                continue;
            }
            let dv = v.coeff(l)?;
            let ew = w.coeff(m)?;
            // (u . grad) contributes i*kappa*(c_k . l) to mode k+l of each
            // component of v.
            let conv = Complex64::new(0.0, kappa)
                * (cu[0] * l.kx as f64 + cu[1] * l.ky as f64);
            total += conv * (dv[0] * ew[0] + dv[1] * ew[1]);
        }
    }
    Ok(total.re * ms.cell_measure())
}

/// Leray-projected convection term `Pi(u, v) = P((u . grad) v)` truncated to
/// `target`. The working grid is chosen large enough that no aliased image
/// of the true (bandwidth `K_u + K_v`) product can fold into the target box.
pub fn pi_product(
    u: &VelocityField,
    v: &VelocityField,
    target: &Arc<ModeSet>,
) -> Result<VelocityField, SpectralError> {
    let ms = u.mode_set();
    if !ms.same_as(v.mode_set()) {
        return Err(SpectralError::ModeSetMismatch);
    }
    let needed = (ms.k_max() + v.mode_set().k_max() + target.k_max() + 1) as usize;
    let cached = ms.product_grid();
    if cached.n() >= needed && ms.same_as(target) {
        pi_product_on(u, v, target, cached)
    } else {
        let plan = GridPlan::new(needed);
        pi_product_on(u, v, target, &plan)
    }
}

fn pi_product_on(
    u: &VelocityField,
    v: &VelocityField,
    target: &Arc<ModeSet>,
    plan: &GridPlan,
) -> Result<VelocityField, SpectralError> {
    let u1 = u.grid_values(plan, 0, None);
    let u2 = u.grid_values(plan, 1, None);
    let mut spec = [Vec::new(), Vec::new()];
    for j in 0..2 {
        let dvj_dx = v.grid_values(plan, j, Some(0));
        let dvj_dy = v.grid_values(plan, j, Some(1));
        let mut prod: Vec<Complex64> = (0..u1.len())
            .map(|i| {
                Complex64::new(u1[i].re * dvj_dx[i].re + u2[i].re * dvj_dy[i].re, 0.0)
            })
            .collect();
        plan.to_spectral(&mut prod);
        spec[j] = prod;
    }
    let mut out = VelocityField::zero(target);
    out.set_from_spectral(plan, [&spec[0], &spec[1]]);
    out.leray_project_in_place();
    Ok(out)
}

/// Galerkin convection term `B(u) = Pi(u, u)` truncated back to `u`'s own
/// mode set. Satisfies `<B(u), u> = 0` for divergence-free `u`.
pub fn nonlinear_b(u: &VelocityField) -> VelocityField {
    let ms = Arc::clone(u.mode_set());
    pi_product(u, u, &ms).expect("same mode set by construction")
}
