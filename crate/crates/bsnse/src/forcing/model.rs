use std::f64::consts::PI;
use std::sync::Arc;

use crate::spectral::{SpectralError, VelocityField};

use super::truncation::retract_phi_n;

/// Scalar function of time, either a constant or a general handle.
#[derive(Clone)]
pub enum TimeFn {
    Constant(f64),
    Handle(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl TimeFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFn::Constant(c) => *c,
            TimeFn::Handle(f) => f(t),
        }
    }
}

impl std::fmt::Debug for TimeFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimeFn::Constant(c) => write!(f, "TimeFn::Constant({c})"),
            TimeFn::Handle(_) => write!(f, "TimeFn::Handle(..)"),
        }
    }
}

/// The parameter bundle of the forcing growth assumptions:
///
/// * `g` — nonnegative, bounded, integrable in time;
/// * `beta` — the gradient-coupling constant;
/// * `rho`, `rho1` — locally bounded growth functions of `||v||_V` and
///   `||v||_H` (constants for the shipped models);
/// * `varrho` — positive decreasing function on `(0, 1]`.
#[derive(Clone)]
pub struct AssumptionBundle {
    pub g: TimeFn,
    pub beta: f64,
    pub rho: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub rho1: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub varrho: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for AssumptionBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AssumptionBundle")
            .field("g", &self.g)
            .field("beta", &self.beta)
            .finish()
    }
}

/// The explicit constants of the coercivity inequality
/// `2 <Phi(t,phi,vphi), phi> - ||vphi||^2
///    <= -lambda ||phi||_V^2 - (lb^2-1)/(4 lb^2) ||vphi||^2 + 2 g(t) + C ||phi||^2`.
#[derive(Debug, Clone, Copy)]
pub struct CoercivityConstants {
    /// The Young-inequality split parameter fed to `varrho`.
    pub eps: f64,
    /// The explicit constant `C = 2 varrho(eps) + 2 beta^2 / lambda`.
    pub c: f64,
}

impl AssumptionBundle {
    /// Assemble the coercivity constant from the documented Young chain:
    ///
    /// * `2 beta ||phi||_V ||phi|| <= (lambda/2) ||phi||_V^2 + (2 beta^2/lambda) ||phi||^2`;
    /// * `2 |sigma| ||vphi|| ||phi||_V <= lb^2 |sigma|^2 ||phi||_V^2 + ||vphi||^2 / lb^2`
    ///   and `lb^2 |sigma|^2 <= 2 (nu - lambda)` by super-parabolicity;
    /// * `eps = (3/8) (lb^2 - 1) / lb^2` makes the `||vphi||^2` budget close
    ///   exactly: `-1 + 2 eps + 1/lb^2 = -(lb^2-1)/(4 lb^2)`.
    pub fn coercivity_constants(&self, lambda: f64, lambda_bar: f64) -> CoercivityConstants {
        let lb2 = lambda_bar * lambda_bar;
        let eps = (0.375 * (lb2 - 1.0) / lb2).clamp(1e-12, 1.0);
        let c = 2.0 * (self.varrho)(eps) + 2.0 * self.beta * self.beta / lambda;
        CoercivityConstants { eps, c }
    }

    fn constants(g: f64, beta: f64, rho: f64, rho1: f64, varrho0: f64) -> Self {
        Self {
            g: TimeFn::Constant(g),
            beta,
            rho: Arc::new(move |_| rho),
            rho1: Arc::new(move |_| rho1),
            varrho: Arc::new(move |_| varrho0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForcingKind {
    Zero,
    /// `f(t, u, Z) = a0 + a1 * u + a2 * Z`.
    Linear { a1: f64, a2: f64 },
    /// `f(t, u, Z) = a0 - c1 * u + c2 * phi_n0(Z)` with the radial
    /// retraction `phi_n0`.
    Saturated { c1: f64, c2: f64, n0: f64 },
}

/// A concrete forcing `f(t, u, Z)` together with the parameter bundle under
/// which its growth assumptions are machine-checkable.
#[derive(Debug, Clone)]
pub struct ForcingModel {
    kind: ForcingKind,
    /// Constant-in-time offset `a0`, Leray-projected at construction.
    base: Option<VelocityField>,
    bundle: AssumptionBundle,
}

impl ForcingModel {
    pub fn zero() -> Self {
        Self {
            kind: ForcingKind::Zero,
            base: None,
            bundle: AssumptionBundle::constants(0.0, 0.0, 1e-6, 1e-6, 1e-12),
        }
    }

    /// Linear forcing. `period` fixes the Poincare constant
    /// `lambda_1 >= (2*pi/a)^2` used in the `rho1` bound.
    pub fn linear(base: Option<VelocityField>, a1: f64, a2: f64, period: f64) -> Self {
        let base = base.map(|b| b.leray_project());
        let base_norm = base.as_ref().map_or(0.0, |b| b.norm_h());
        let lambda1 = (2.0 * PI / period).powi(2);
        let g = 0.5 * base_norm * base_norm;
        let rho = a1.abs().max(a2.abs()).max(1e-6);
        let rho1 = 6f64.max(3.0 * a1 * a1 / lambda1).max(3.0 * a2 * a2);
        let a1c = a1.abs();
        let a2c = a2;
        let bundle = AssumptionBundle {
            g: TimeFn::Constant(g),
            beta: 1.0,
            rho: Arc::new(move |_| rho),
            rho1: Arc::new(move |_| rho1),
            varrho: Arc::new(move |eps| 0.5 + a1c + a2c * a2c / (4.0 * eps)),
        };
        Self {
            kind: ForcingKind::Linear { a1, a2 },
            base,
            bundle,
        }
    }

    /// Saturated forcing: dissipative linear term plus a ball-retracted `Z`
    /// feedback, globally bounded in `Z`.
    pub fn saturated(
        base: Option<VelocityField>,
        c1: f64,
        c2: f64,
        n0: f64,
        period: f64,
    ) -> Self {
        assert!(c1 >= 0.0 && c2 >= 0.0 && n0 > 0.0);
        let base = base.map(|b| b.leray_project());
        let base_norm = base.as_ref().map_or(0.0, |b| b.norm_h());
        let lambda1 = (2.0 * PI / period).powi(2);
        let g = 0.5 * (base_norm + c2 * n0) * (base_norm + c2 * n0);
        let rho = c2.max(1e-6);
        let rho1 = 6f64.max(3.0 * c1 * c1 / lambda1);
        let bundle = AssumptionBundle {
            g: TimeFn::Constant(g),
            beta: 1.0,
            rho: Arc::new(move |_| rho),
            rho1: Arc::new(move |_| rho1),
            varrho: Arc::new(|_| 1.0),
        };
        Self {
            kind: ForcingKind::Saturated { c1, c2, n0 },
            base,
            bundle,
        }
    }

    pub fn kind(&self) -> ForcingKind {
        self.kind
    }

    pub fn base(&self) -> Option<&VelocityField> {
        self.base.as_ref()
    }

    pub fn bundle(&self) -> &AssumptionBundle {
        &self.bundle
    }

    /// Whether `f` depends on the path only through deterministic data
    /// (no `Z` feedback matters for deterministic solves either way).
    pub fn is_deterministic_in_z(&self) -> bool {
        match self.kind {
            ForcingKind::Zero => true,
            ForcingKind::Linear { a2, .. } => a2 == 0.0,
            ForcingKind::Saturated { c2, .. } => c2 == 0.0,
        }
    }

    /// Evaluate `f(t, u, Z)`. The result is H-valued: every term is a linear
    /// combination of divergence-free fields (the base is projected at
    /// construction).
    pub fn eval(
        &self,
        _t: f64,
        u: &VelocityField,
        z: &VelocityField,
    ) -> Result<VelocityField, SpectralError> {
        if !u.mode_set().same_as(z.mode_set()) {
            return Err(SpectralError::ModeSetMismatch);
        }
        let mut out = match &self.base {
            Some(b) if b.mode_set().same_as(u.mode_set()) => b.clone(),
            Some(b) => b.embed(u.mode_set()),
            None => VelocityField::zero(u.mode_set()),
        };
        match self.kind {
            ForcingKind::Zero => return Ok(VelocityField::zero(u.mode_set())),
            ForcingKind::Linear { a1, a2 } => {
                out.axpy_in_place(a1, u)?;
                if a2 != 0.0 {
                    out.axpy_in_place(a2, z)?;
                }
            }
            ForcingKind::Saturated { c1, c2, n0 } => {
                out.axpy_in_place(-c1, u)?;
                if c2 != 0.0 {
                    out.axpy_in_place(c2, &retract_phi_n(n0, z))?;
                }
            }
        }
        Ok(out)
    }

    /// Global Lipschitz constant of `f` in its `Z` argument.
    pub fn z_lipschitz(&self) -> f64 {
        match self.kind {
            ForcingKind::Zero => 0.0,
            ForcingKind::Linear { a2, .. } => a2.abs(),
            ForcingKind::Saturated { c2, .. } => c2,
        }
    }
}
