use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::grid::GridPlan;
use super::modes::{ModeSet, WaveVector};
use super::sigma::SigmaVector;
use super::SpectralError;

/// Norm selector for [`VelocityField::norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `(|G| sum |c_k|^2)^(1/2)` — the L^2 energy norm.
    H,
    /// `(|G| sum lambda_k |c_k|^2)^(1/2)` — the gradient norm.
    V,
    /// `(|G| sum lambda_k^2 |c_k|^2)^(1/2)` — the Stokes graph seminorm.
    DA,
    /// Fourth root of the exact grid quadrature of `|u(x)|^4`.
    L4,
}

/// Truncated divergence-free vector Fourier series on the torus: the state
/// `u` and the martingale integrand `Z`.
///
/// Only the canonical representative of each conjugate pair is stored;
/// `c_{-k} = conj(c_k)` is implied, so the field is real by construction and
/// has zero mean (the origin mode is excluded from every [`ModeSet`]).
#[derive(Debug, Clone)]
pub struct VelocityField {
    modes: Arc<ModeSet>,
    /// One complex 2-vector per representative, in mode-set order.
    coeffs: Vec<[Complex64; 2]>,
}

impl VelocityField {
    pub fn zero(modes: &Arc<ModeSet>) -> Self {
        Self {
            modes: Arc::clone(modes),
            coeffs: vec![[Complex64::default(); 2]; modes.len_pairs()],
        }
    }

    /// Build a field from `(k, c_k)` pairs. Each pair fixes both `k` and its
    /// conjugate mode; listing a non-canonical `k` stores the conjugate at
    /// `-k`. Unknown wavevectors are an error.
    pub fn from_pairs(
        modes: &Arc<ModeSet>,
        pairs: &[((i32, i32), [Complex64; 2])],
    ) -> Result<Self, SpectralError> {
        let mut field = Self::zero(modes);
        for &((kx, ky), c) in pairs {
            field.set_coeff(WaveVector::new(kx, ky), c)?;
        }
        Ok(field)
    }

    pub fn mode_set(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn coeffs(&self) -> &[[Complex64; 2]] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [[Complex64; 2]] {
        &mut self.coeffs
    }

    /// Coefficient at any mode of the set, conjugating as needed.
    pub fn coeff(&self, k: WaveVector) -> Result<[Complex64; 2], SpectralError> {
        let r = self
            .modes
            .lookup(k)
            .ok_or(SpectralError::UnknownMode(k.kx, k.ky))?;
        let c = self.coeffs[r.repr];
        Ok(if r.conj { [c[0].conj(), c[1].conj()] } else { c })
    }

    /// Set the coefficient at `k` (and, implicitly, `conj` at `-k`).
    pub fn set_coeff(&mut self, k: WaveVector, c: [Complex64; 2]) -> Result<(), SpectralError> {
        let r = self
            .modes
            .lookup(k)
            .ok_or(SpectralError::UnknownMode(k.kx, k.ky))?;
        self.coeffs[r.repr] = if r.conj { [c[0].conj(), c[1].conj()] } else { c };
        Ok(())
    }

    /// Apply the Leray projection `c_k <- (I - k k^T / |k|^2) c_k`.
    ///
    /// Idempotent and self-adjoint in the H inner product; annihilates pure
    /// gradients and fixes divergence-free fields.
    pub fn leray_project(&self) -> Self {
        let mut out = self.clone();
        out.leray_project_in_place();
        out
    }

    pub fn leray_project_in_place(&mut self) {
        for (k, c) in self.modes.representatives().iter().zip(&mut self.coeffs) {
            let kx = k.kx as f64;
            let ky = k.ky as f64;
            let k2 = kx * kx + ky * ky;
            let dot = (c[0] * kx + c[1] * ky) / k2;
            c[0] -= dot * kx;
            c[1] -= dot * ky;
        }
    }

    /// Largest relative divergence `|k . c_k| / |c_k|` over modes.
    pub fn divergence_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, c) in self.modes.representatives().iter().zip(&self.coeffs) {
            let mag = (c[0].norm_sqr() + c[1].norm_sqr()).sqrt();
            if mag == 0.0 {
                continue;
            }
            let div = (c[0] * k.kx as f64 + c[1] * k.ky as f64).norm();
            worst = worst.max(div / (mag * (k.norm_sq() as f64).sqrt()));
        }
        worst
    }

    pub fn is_divergence_free(&self, tol: f64) -> bool {
        self.divergence_defect() <= tol
    }

    /// Stokes operator: coefficient-wise multiplication by
    /// `lambda_k = (2*pi/a)^2 |k|^2`.
    pub fn stokes_apply(&self) -> Self {
        let mut out = self.clone();
        for (c, &l) in out.coeffs.iter_mut().zip(self.modes.repr_eigenvalues()) {
            c[0] *= l;
            c[1] *= l;
        }
        out
    }

    /// `J Z = P((sigma . grad) Z)`: multiplication by `i (2*pi/a) (sigma . k)`
    /// followed by the Leray projection (a no-op for divergence-free `Z`
    /// since `sigma` is spatially constant).
    pub fn apply_j(&self, sigma: &SigmaVector, t: f64) -> Self {
        let s = sigma.eval(t);
        let kappa = self.modes.wavenumber_scale();
        let mut out = self.clone();
        for (k, c) in self.modes.representatives().iter().zip(&mut out.coeffs) {
            let factor = Complex64::new(0.0, kappa * (s[0] * k.kx as f64 + s[1] * k.ky as f64));
            c[0] *= factor;
            c[1] *= factor;
        }
        out.leray_project_in_place();
        out
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::H => self.weighted_norm(|_| 1.0),
            NormKind::V => self.weighted_norm(|l| l),
            NormKind::DA => self.weighted_norm(|l| l * l),
            NormKind::L4 => self.l4_norm(),
        }
    }

    fn weighted_norm(&self, weight: impl Fn(f64) -> f64) -> f64 {
        // Both members of each pair contribute, hence the factor 2.
        let g = self.modes.cell_measure();
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(self.modes.repr_eigenvalues())
            .map(|(c, &l)| weight(l) * (c[0].norm_sqr() + c[1].norm_sqr()))
            .sum();
        (2.0 * g * sum).sqrt()
    }

    pub fn norm_h(&self) -> f64 {
        self.norm(NormKind::H)
    }

    pub fn norm_v(&self) -> f64 {
        self.norm(NormKind::V)
    }

    fn l4_norm(&self) -> f64 {
        let plan = self.modes.quartic_grid();
        let ux = self.grid_values(plan, 0, None);
        let uy = self.grid_values(plan, 1, None);
        let n = plan.n();
        let weight = (self.modes.period() / n as f64).powi(2);
        let sum: f64 = ux
            .iter()
            .zip(&uy)
            .map(|(a, b)| {
                let s = a.re * a.re + b.re * b.re;
                s * s
            })
            .sum();
        (weight * sum).powf(0.25)
    }

    /// H inner product `<u, v> = |G| sum c^u_k . conj(c^v_k)` (real for real
    /// fields).
    pub fn inner_h(&self, other: &Self) -> Result<f64, SpectralError> {
        self.weighted_inner(other, |_| 1.0)
    }

    /// V inner product (gradient pairing).
    pub fn inner_v(&self, other: &Self) -> Result<f64, SpectralError> {
        self.weighted_inner(other, |l| l)
    }

    fn weighted_inner(
        &self,
        other: &Self,
        weight: impl Fn(f64) -> f64,
    ) -> Result<f64, SpectralError> {
        if !self.modes.same_as(&other.modes) {
            return Err(SpectralError::ModeSetMismatch);
        }
        let g = self.modes.cell_measure();
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(self.modes.repr_eigenvalues())
            .map(|((a, b), &l)| {
                weight(l) * ((a[0] * b[0].conj()).re + (a[1] * b[1].conj()).re)
            })
            .sum();
        Ok(2.0 * g * sum)
    }

    /// Evaluate one component (or one of its derivatives) on the plan's
    /// physical grid. `derivative = Some(axis)` multiplies by
    /// `i (2*pi/a) k_axis` first.
    pub fn grid_values(
        &self,
        plan: &GridPlan,
        component: usize,
        derivative: Option<usize>,
    ) -> Vec<Complex64> {
        let n = plan.n();
        let kappa = self.modes.wavenumber_scale();
        let mut data = vec![Complex64::default(); n * n];
        for (k, c) in self.modes.representatives().iter().zip(&self.coeffs) {
            let mut val = c[component];
            let mut val_conj = c[component].conj();
            if let Some(axis) = derivative {
                let ka = if axis == 0 { k.kx } else { k.ky } as f64;
                let f = Complex64::new(0.0, kappa * ka);
                val *= f;
                val_conj *= -f;
            }
            data[plan.wrap(k.kx) * n + plan.wrap(k.ky)] = val;
            data[plan.wrap(-k.kx) * n + plan.wrap(-k.ky)] = val_conj;
        }
        plan.to_grid(&mut data);
        data
    }

    /// Extract coefficients from a spectral array produced by
    /// [`GridPlan::to_spectral`], truncating to this field's mode set.
    pub(crate) fn set_from_spectral(&mut self, plan: &GridPlan, spec: [&[Complex64]; 2]) {
        let n = plan.n();
        for (k, c) in self.modes.representatives().iter().zip(&mut self.coeffs) {
            let idx = plan.wrap(k.kx) * n + plan.wrap(k.ky);
            c[0] = spec[0][idx];
            c[1] = spec[1][idx];
        }
    }

    /// Copy this field into another mode set: matching modes are copied,
    /// everything else is zero.
    pub fn embed(&self, target: &Arc<ModeSet>) -> Self {
        let mut out = Self::zero(target);
        for (k, c) in target.representatives().iter().zip(&mut out.coeffs) {
            if let Ok(v) = self.coeff(*k) {
                *c = v;
            }
        }
        out
    }

    /// Random divergence-free field with Gaussian coefficients damped by
    /// `1 / (1 + |k|^2)` and H-norm scaled to `amplitude`.
    pub fn random_div_free<R: Rng>(modes: &Arc<ModeSet>, rng: &mut R, amplitude: f64) -> Self {
        let mut field = Self::zero(modes);
        for (k, c) in modes.representatives().iter().zip(&mut field.coeffs) {
            let damp = 1.0 / (1.0 + k.norm_sq() as f64);
            for comp in c.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *comp = Complex64::new(re, im) * damp;
            }
        }
        field.leray_project_in_place();
        let norm = field.norm_h();
        if norm > 0.0 {
            field.scale_in_place(amplitude / norm);
        }
        field
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(factor);
        out
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            c[0] *= factor;
            c[1] *= factor;
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SpectralError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SpectralError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self += factor * other`.
    pub fn axpy_in_place(&mut self, factor: f64, other: &Self) -> Result<(), SpectralError> {
        if !self.modes.same_as(&other.modes) {
            return Err(SpectralError::ModeSetMismatch);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            a[0] += factor * b[0];
            a[1] += factor * b[1];
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, SpectralError> {
        if !self.modes.same_as(&other.modes) {
            return Err(SpectralError::ModeSetMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| [f(a[0], b[0]), f(a[1], b[1])])
            .collect();
        Ok(Self {
            modes: Arc::clone(&self.modes),
            coeffs,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c[0] == Complex64::default() && c[1] == Complex64::default())
    }

    /// Flat view of the coefficients as `2 * len_pairs` complex numbers,
    /// used by the solver's compact per-path storage.
    pub fn flat(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(2 * self.coeffs.len());
        for c in &self.coeffs {
            out.push(c[0]);
            out.push(c[1]);
        }
        out
    }

    pub fn from_flat(modes: &Arc<ModeSet>, flat: &[Complex64]) -> Self {
        debug_assert_eq!(flat.len(), 2 * modes.len_pairs());
        let coeffs = flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        Self {
            modes: Arc::clone(modes),
            coeffs,
        }
    }
}
