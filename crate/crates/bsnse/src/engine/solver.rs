use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forcing::{
    assemble_truncated_driver, superparabolicity_margin, Driver, ForcingError, ForcingModel,
    PhiDriver, TruncationSpec,
};
use crate::par;
use crate::spectral::{ModeSet, SigmaVector, SpectralError, VelocityField};

use super::brownian::{BrownianEnsemble, TimeGrid};
use super::regression::StateBasis;
use super::solution::{dof_count, dof_value, field_from_dofs, BsdeSolution, Diagnostics, NodeFit};

/// Discretization and regression parameters of one backward solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Viscosity.
    pub nu: f64,
    /// Transport-coupling constant, must exceed 1.
    pub lambda_bar: f64,
    /// Half-width of the square mode box.
    pub k_max: i32,
    /// Torus period `a`.
    pub period: f64,
    /// Terminal time `T`.
    pub horizon: f64,
    /// Number of time steps `L`.
    pub steps: usize,
    /// Number of Monte Carlo paths `M`.
    pub paths: usize,
    /// Polynomial degree of the regression basis in the Brownian state.
    pub basis_degree: usize,
    /// Picard iteration cap for the implicit step.
    pub picard_iters: usize,
    /// Early-exit tolerance on the Picard update norm.
    pub picard_tol: f64,
    /// Seed of the driving noise.
    pub seed: u64,
    /// Keep full per-path coefficient fields (memory-heavy at production
    /// ensemble sizes; norms and node fits are always kept).
    pub store_fields: bool,
    /// Optional driver truncation; `None` runs the untruncated driver.
    pub truncation: Option<TruncationSpec>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            lambda_bar: 2.0,
            k_max: 2,
            period: 2.0 * PI,
            horizon: 1.0,
            steps: 16,
            paths: 256,
            basis_degree: 4,
            picard_iters: 3,
            picard_tol: 1e-10,
            seed: 1,
            store_fields: false,
            truncation: None,
        }
    }
}

/// Terminal value `xi`, either deterministic or a function of `W_T`.
#[derive(Clone)]
pub enum TerminalCondition {
    Deterministic(VelocityField),
    OfBrownian(Arc<dyn Fn(f64) -> VelocityField + Send + Sync>),
}

impl TerminalCondition {
    pub fn sample(&self, w_t: f64) -> VelocityField {
        match self {
            TerminalCondition::Deterministic(f) => f.clone(),
            TerminalCondition::OfBrownian(f) => f(w_t),
        }
    }
}

impl std::fmt::Debug for TerminalCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TerminalCondition::Deterministic(_) => write!(f, "TerminalCondition::Deterministic"),
            TerminalCondition::OfBrownian(_) => write!(f, "TerminalCondition::OfBrownian"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// One backward solve: conditional expectations and the martingale integrand
/// by least-squares regression on the Brownian state, then an implicit Euler
/// step solved by Picard iteration with the Stokes part inverted exactly.
///
/// The integrand is extracted from the martingale increment
/// `Z_i = (1/dt) * E_i[(u_{i+1} - E_i[u_{i+1}]) dW]`, not from
/// `E_i[u_{i+1} dW]` directly; subtracting the fitted conditional mean first
/// removes the `O(1/sqrt(M dt))` noise floor and makes `Z` vanish exactly
/// when the data are deterministic.
pub fn solve_bsnse(
    config: &SolverConfig,
    sigma: &SigmaVector,
    model: &ForcingModel,
    terminal: &TerminalCondition,
) -> Result<BsdeSolution, SolverError> {
    validate(config)?;
    let margin = superparabolicity_margin(config.nu, config.lambda_bar, sigma, config.horizon);
    if margin <= 0.0 {
        return Err(SolverError::Assumption(format!(
            "super-parabolicity fails: nu - lb^2 sup|sigma|^2 / 2 = {margin:.6e} <= 0"
        )));
    }

    let modes = ModeSet::square(config.period, config.k_max);
    let driver: Box<dyn Driver> = match config.truncation {
        Some(spec) => Box::new(assemble_truncated_driver(
            spec,
            model,
            config.nu,
            sigma,
            &modes,
            config.horizon,
        )?),
        None => Box::new(PhiDriver::new(config.nu, sigma.clone(), model.clone())),
    };

    let grid = TimeGrid::new(config.horizon, config.steps);
    let noise = BrownianEnsemble::generate(config.seed, config.paths, grid);
    let l = grid.steps;
    let m = config.paths;
    let dt = grid.dt();
    let n_dofs = dof_count(&modes);

    let mut u_norm_h = vec![0.0; (l + 1) * m];
    let mut u_norm_v = vec![0.0; (l + 1) * m];
    let mut z_norm_h = vec![0.0; l * m];
    let mut fits: Vec<Option<NodeFit>> = vec![None; l + 1];
    let mut u_fields = config.store_fields.then(Vec::new);
    let mut z_fields = config.store_fields.then(|| vec![None; l * m]);
    let mut diag = Diagnostics::default();

    // Terminal slice.
    let mut current: Vec<VelocityField> = (0..m)
        .map(|path| {
            let mut xi = terminal.sample(noise.w(path, l));
            if !xi.mode_set().same_as(&modes) {
                xi = xi.embed(&modes);
            }
            xi.leray_project_in_place();
            xi
        })
        .collect();
    record_norms(&current, l, m, &mut u_norm_h, &mut u_norm_v);
    {
        let states = noise.states_at(l);
        let basis = StateBasis::build(&states, config.basis_degree);
        let (u_coeffs, _, u_msr) = fit_all_dofs(&basis, &current, n_dofs);
        note_basis(&mut diag, &basis, l);
        let (u_var_h, u_var_v) = residual_norms(&modes, &u_msr);
        fits[l] = Some(NodeFit {
            center: basis.center(),
            scale: basis.scale(),
            degree: basis.degree(),
            u_coeffs,
            z_coeffs: None,
            u_var_h,
            u_var_v,
            z_var_h: 0.0,
        });
    }
    if let Some(store) = &mut u_fields {
        store.extend(current.iter().cloned());
    }

    for node in (0..l).rev() {
        let t = grid.node(node);
        let states = noise.states_at(node);
        let basis = StateBasis::build(&states, config.basis_degree);
        if node > 0 {
            note_basis(&mut diag, &basis, node);
        } else {
            diag.max_cond = diag.max_cond.max(basis.cond);
        }

        // Conditional expectation of the next slice, dof by dof.
        let (_, e_fitted, _) = fit_all_dofs(&basis, &current, n_dofs);
        let e_fields: Vec<VelocityField> = (0..m)
            .map(|path| field_from_dofs(&modes, |j| e_fitted[j][path]))
            .collect();

        // Martingale increment regression for Z.
        let dofs: Vec<usize> = (0..n_dofs).collect();
        let z_parts = par::map_chunks(&dofs, |_, chunk| {
            chunk
                .iter()
                .map(|&j| {
                    let responses: Vec<f64> = (0..m)
                        .map(|path| {
                            (dof_value(&current[path], j) - e_fitted[j][path])
                                * noise.dw(path, node)
                        })
                        .collect();
                    let (mut coeffs, mut fitted) = basis.fit(&responses);
                    for c in &mut coeffs {
                        *c /= dt;
                    }
                    for f in &mut fitted {
                        *f /= dt;
                    }
                    let msr = responses
                        .iter()
                        .zip(&fitted)
                        .map(|(r, f)| {
                            let d = r / dt - f;
                            d * d
                        })
                        .sum::<f64>()
                        / responses.len() as f64;
                    (coeffs, fitted, msr)
                })
                .collect::<Vec<_>>()
        });
        let mut z_coeffs = Vec::with_capacity(n_dofs);
        let mut z_fitted = Vec::with_capacity(n_dofs);
        let mut z_msr = Vec::with_capacity(n_dofs);
        for part in z_parts {
            for (c, f, m) in part {
                z_coeffs.push(c);
                z_fitted.push(f);
                z_msr.push(m);
            }
        }
        let z_slice: Vec<VelocityField> = (0..m)
            .map(|path| field_from_dofs(&modes, |j| z_fitted[j][path]))
            .collect();
        for (path, z) in z_slice.iter().enumerate() {
            z_norm_h[node * m + path] = z.norm_h();
        }
        if let Some(store) = &mut z_fields {
            for (path, z) in z_slice.iter().enumerate() {
                store[node * m + path] = Some(z.clone());
            }
        }

        // Implicit Euler step, Picard with exact diagonal Stokes solve:
        // y^{j+1}_k = (e_k + dt * rest(y^j)_k) / (1 + dt * s * lambda_k).
        let work: Vec<(VelocityField, VelocityField)> = e_fields
            .into_iter()
            .zip(z_slice)
            .collect();
        let stepped = par::map_chunks(&work, |_, chunk| {
            chunk
                .iter()
                .map(|(e, z)| picard_step(driver.as_ref(), &modes, t, dt, e, z, config))
                .collect::<Vec<_>>()
        });
        current = Vec::with_capacity(m);
        for part in stepped {
            for (y, iters, resid) in part {
                diag.picard_max_iters = diag.picard_max_iters.max(iters);
                diag.picard_max_residual = diag.picard_max_residual.max(resid);
                current.push(y);
            }
        }
        record_norms(&current, node, m, &mut u_norm_h, &mut u_norm_v);
        let (u_coeffs, _, u_msr) = fit_all_dofs(&basis, &current, n_dofs);
        let (u_var_h, u_var_v) = residual_norms(&modes, &u_msr);
        let (z_var_h, _) = residual_norms(&modes, &z_msr);
        fits[node] = Some(NodeFit {
            center: basis.center(),
            scale: basis.scale(),
            degree: basis.degree(),
            u_coeffs,
            z_coeffs: Some(z_coeffs),
            u_var_h,
            u_var_v,
            z_var_h,
        });
        if let Some(store) = &mut u_fields {
            // Prepend this node's slice; reorder once at the end.
            store.extend(current.iter().cloned());
        }
    }

    let u0 = current[0].clone();
    diag.degraded_nodes.sort_unstable();

    let u_fields = u_fields.map(|store| {
        // Stored as [node L, node L-1, ..., node 0]; flip to node-major.
        let mut out = Vec::with_capacity((l + 1) * m);
        for node in 0..=l {
            let block = l - node;
            out.extend(store[block * m..(block + 1) * m].iter().cloned());
        }
        out
    });
    let z_fields = z_fields.map(|store| {
        store
            .into_iter()
            .map(|z| z.expect("every interior node stored"))
            .collect()
    });

    Ok(BsdeSolution {
        grid,
        modes,
        paths: m,
        u_norm_h,
        u_norm_v,
        z_norm_h,
        fits: fits.into_iter().map(|f| f.expect("every node fitted")).collect(),
        u0,
        u_fields,
        z_fields,
        diagnostics: diag,
    })
}

fn validate(config: &SolverConfig) -> Result<(), SolverError> {
    if config.lambda_bar <= 1.0 {
        return Err(SolverError::Assumption(format!(
            "transport-coupling constant must exceed 1, got {}",
            config.lambda_bar
        )));
    }
    if config.nu <= 0.0 {
        return Err(SolverError::Config("viscosity must be positive".into()));
    }
    if config.paths < config.basis_degree + 2 {
        return Err(SolverError::Config(format!(
            "need at least basis_degree + 2 = {} paths, got {}",
            config.basis_degree + 2,
            config.paths
        )));
    }
    if config.picard_iters == 0 {
        return Err(SolverError::Config("picard_iters must be at least 1".into()));
    }
    Ok(())
}

fn record_norms(
    slice: &[VelocityField],
    node: usize,
    m: usize,
    u_norm_h: &mut [f64],
    u_norm_v: &mut [f64],
) {
    for (path, u) in slice.iter().enumerate() {
        u_norm_h[node * m + path] = u.norm_h();
        u_norm_v[node * m + path] = u.norm_v();
    }
}

fn note_basis(diag: &mut Diagnostics, basis: &StateBasis, node: usize) {
    diag.max_cond = diag.max_cond.max(basis.cond);
    if basis.degraded {
        diag.degraded_nodes.push(node);
    }
}

/// Fit every real dof of `slice` on the shared basis; returns the coefficient
/// vectors and the fitted values, both indexed by dof.
fn fit_all_dofs(
    basis: &StateBasis,
    slice: &[VelocityField],
    n_dofs: usize,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let dofs: Vec<usize> = (0..n_dofs).collect();
    let parts = par::map_chunks(&dofs, |_, chunk| {
        chunk
            .iter()
            .map(|&j| {
                let values: Vec<f64> = slice.iter().map(|f| dof_value(f, j)).collect();
                let (coeffs, fitted) = basis.fit(&values);
                let msr = values
                    .iter()
                    .zip(&fitted)
                    .map(|(v, f)| (v - f) * (v - f))
                    .sum::<f64>()
                    / values.len() as f64;
                (coeffs, fitted, msr)
            })
            .collect::<Vec<_>>()
    });
    let mut coeffs = Vec::with_capacity(n_dofs);
    let mut fitted = Vec::with_capacity(n_dofs);
    let mut msr = Vec::with_capacity(n_dofs);
    for part in parts {
        for (c, f, m) in part {
            coeffs.push(c);
            fitted.push(f);
            msr.push(m);
        }
    }
    (coeffs, fitted, msr)
}

/// Fold per-dof mean squared residuals into field-norm units:
/// `||field||^2 = 2 |G| sum_dofs value^2`, V-weighted when requested.
fn residual_norms(modes: &ModeSet, msr: &[f64]) -> (f64, f64) {
    let g = modes.cell_measure();
    let lambdas = modes.repr_eigenvalues();
    let mut h = 0.0;
    let mut v = 0.0;
    for (j, &m) in msr.iter().enumerate() {
        h += m;
        v += lambdas[j / 4] * m;
    }
    (2.0 * g * h, 2.0 * g * v)
}

fn picard_step(
    driver: &dyn Driver,
    modes: &Arc<ModeSet>,
    t: f64,
    dt: f64,
    e: &VelocityField,
    z: &VelocityField,
    config: &SolverConfig,
) -> (VelocityField, usize, f64) {
    let lambdas = modes.repr_eigenvalues();
    let mut y = e.clone();
    let mut resid = f64::INFINITY;
    let mut used = 0;
    for iter in 0..config.picard_iters {
        let (s, rest) = driver.split_eval(t, &y, z);
        let mut next = VelocityField::zero(modes);
        for ((out, (ec, rc)), &lam) in next
            .coeffs_mut()
            .iter_mut()
            .zip(e.coeffs().iter().zip(rest.coeffs()))
            .zip(lambdas)
        {
            let denom = 1.0 + dt * s * lam;
            out[0] = (ec[0] + dt * rc[0]) / denom;
            out[1] = (ec[1] + dt * rc[1]) / denom;
        }
        resid = next.sub(&y).expect("same mode set").norm_h();
        y = next;
        used = iter + 1;
        if resid <= config.picard_tol * (1.0 + y.norm_h()) {
            break;
        }
    }
    (y, used, resid)
}
