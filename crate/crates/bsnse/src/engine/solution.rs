use std::sync::Arc;

use num_complex::Complex64;

use crate::spectral::{ModeSet, VelocityField};

use super::brownian::TimeGrid;
use super::regression::eval_poly;

/// Number of real degrees of freedom of a field on `modes`: real and
/// imaginary part of both components of every stored representative.
pub fn dof_count(modes: &ModeSet) -> usize {
    4 * modes.len_pairs()
}

/// Read real dof `j` of a field; layout `j = 4 * pair + 2 * component + part`.
pub fn dof_value(field: &VelocityField, j: usize) -> f64 {
    let c = field.coeffs()[j / 4][(j % 4) / 2];
    if j % 2 == 0 {
        c.re
    } else {
        c.im
    }
}

/// Assemble a field from one value per real dof, inverse of [`dof_value`].
pub fn field_from_dofs(modes: &Arc<ModeSet>, values: impl Fn(usize) -> f64) -> VelocityField {
    let mut field = VelocityField::zero(modes);
    for (r, c) in field.coeffs_mut().iter_mut().enumerate() {
        for (comp, slot) in c.iter_mut().enumerate() {
            let j = 4 * r + 2 * comp;
            *slot = Complex64::new(values(j), values(j + 1));
        }
    }
    field
}

/// Fitted representation of one time node: each real dof of `u` (and of `Z`
/// away from the terminal node) as a polynomial in the normalized Brownian
/// state. This is what remains of a node when the per-path fields are not
/// stored, and it is what cross-seed comparisons evaluate.
#[derive(Debug, Clone)]
pub struct NodeFit {
    pub center: f64,
    pub scale: f64,
    pub degree: usize,
    /// One coefficient vector per real dof of `u`.
    pub u_coeffs: Vec<Vec<f64>>,
    /// Same layout for `Z`; `None` at the terminal node.
    pub z_coeffs: Option<Vec<Vec<f64>>>,
    /// Mean squared regression residual of the `u` fit in the H norm,
    /// `mean_m ||u_m - fit(W_m)||^2`; feeds Monte Carlo error budgets.
    pub u_var_h: f64,
    /// Same in the V norm.
    pub u_var_v: f64,
    /// Same for the `Z` fit (0 at the terminal node).
    pub z_var_h: f64,
}

impl NodeFit {
    fn assemble(&self, modes: &Arc<ModeSet>, coeffs: &[Vec<f64>], w: f64) -> VelocityField {
        let x = (w - self.center) / self.scale;
        field_from_dofs(modes, |j| eval_poly(&coeffs[j], x))
    }

    /// Evaluate the fitted `u` functional at Brownian state `w`.
    pub fn eval_u(&self, modes: &Arc<ModeSet>, w: f64) -> VelocityField {
        self.assemble(modes, &self.u_coeffs, w)
    }

    pub fn eval_z(&self, modes: &Arc<ModeSet>, w: f64) -> Option<VelocityField> {
        self.z_coeffs
            .as_ref()
            .map(|z| self.assemble(modes, z, w))
    }
}

/// Per-node solver health counters.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Worst Gram condition number over all regression nodes.
    pub max_cond: f64,
    /// Nodes where the basis degree had to be reduced (node 0 always
    /// degenerates to the mean and is not listed).
    pub degraded_nodes: Vec<usize>,
    /// Largest Picard iteration count actually used at any (node, path).
    pub picard_max_iters: usize,
    /// Largest final Picard update norm.
    pub picard_max_residual: f64,
}

/// Discrete adapted solution pair `(u, Z)` of one backward solve.
///
/// Per-path norms and per-node polynomial fits are always kept; the full
/// per-path coefficient fields only when `store_fields` was requested, since
/// at production ensemble sizes they dominate memory.
#[derive(Debug)]
pub struct BsdeSolution {
    pub grid: TimeGrid,
    pub modes: Arc<ModeSet>,
    pub paths: usize,
    /// `||u_i||_H` per (node, path), node-major: index `i * paths + m`.
    pub u_norm_h: Vec<f64>,
    /// `||u_i||_V`, same layout.
    pub u_norm_v: Vec<f64>,
    /// `||Z_i||_H` for `i = 0 .. L-1`, same layout.
    pub z_norm_h: Vec<f64>,
    /// One fit per node, `L + 1` entries.
    pub fits: Vec<NodeFit>,
    /// The deterministic initial value (all paths coincide at `t = 0`).
    pub u0: VelocityField,
    /// Per-path `u` fields, node-major, when stored.
    pub u_fields: Option<Vec<VelocityField>>,
    /// Per-path `Z` fields for `i = 0 .. L-1`, when stored.
    pub z_fields: Option<Vec<VelocityField>>,
    pub diagnostics: Diagnostics,
}

impl BsdeSolution {
    pub fn u_norm_h_at(&self, node: usize, path: usize) -> f64 {
        self.u_norm_h[node * self.paths + path]
    }

    pub fn u_norm_v_at(&self, node: usize, path: usize) -> f64 {
        self.u_norm_v[node * self.paths + path]
    }

    pub fn z_norm_h_at(&self, node: usize, path: usize) -> f64 {
        self.z_norm_h[node * self.paths + path]
    }

    pub fn u_field_at(&self, node: usize, path: usize) -> Option<&VelocityField> {
        self.u_fields
            .as_ref()
            .map(|f| &f[node * self.paths + path])
    }

    pub fn z_field_at(&self, node: usize, path: usize) -> Option<&VelocityField> {
        self.z_fields
            .as_ref()
            .map(|f| &f[node * self.paths + path])
    }

    /// Mean of `||u_i||_H^2` over paths.
    pub fn mean_u_h_sq(&self, node: usize) -> f64 {
        let row = &self.u_norm_h[node * self.paths..(node + 1) * self.paths];
        row.iter().map(|x| x * x).sum::<f64>() / self.paths as f64
    }

    pub fn mean_u_v_sq(&self, node: usize) -> f64 {
        let row = &self.u_norm_v[node * self.paths..(node + 1) * self.paths];
        row.iter().map(|x| x * x).sum::<f64>() / self.paths as f64
    }

    pub fn mean_z_h_sq(&self, node: usize) -> f64 {
        let row = &self.z_norm_h[node * self.paths..(node + 1) * self.paths];
        row.iter().map(|x| x * x).sum::<f64>() / self.paths as f64
    }

    /// Largest `||Z_i||_H` over all nodes and paths.
    pub fn z_sup_norm(&self) -> f64 {
        self.z_norm_h.iter().cloned().fold(0.0, f64::max)
    }

    /// Discrete solution-space norm
    /// `(E sup_i ||u_i||^2 + E int ||u||_V^2 dt + E int ||Z||^2 dt)^{1/2}`,
    /// with the trapezoid rule for the `V` integral and the left-endpoint
    /// rule for `Z` (which lives on step intervals).
    pub fn mnorm(&self) -> f64 {
        let l = self.grid.steps;
        let m = self.paths;
        let dt = self.grid.dt();
        let mut sup_term = 0.0;
        for path in 0..m {
            let mut sup = 0.0f64;
            for node in 0..=l {
                let v = self.u_norm_h_at(node, path);
                sup = sup.max(v * v);
            }
            sup_term += sup;
        }
        sup_term /= m as f64;
        let mut v_term = 0.0;
        for node in 0..=l {
            let w = if node == 0 || node == l { 0.5 } else { 1.0 };
            v_term += w * dt * self.mean_u_v_sq(node);
        }
        let mut z_term = 0.0;
        for node in 0..l {
            z_term += dt * self.mean_z_h_sq(node);
        }
        (sup_term + v_term + z_term).sqrt()
    }

    /// Solution-space distance to another solve on the same grid, mode set
    /// and path count. Requires stored fields on both sides; the paths are
    /// compared one-to-one, so the two solves must share the driving noise
    /// for the distance to estimate the pathwise gap.
    pub fn mnorm_distance(&self, other: &BsdeSolution) -> Result<f64, String> {
        if self.grid != other.grid {
            return Err("time grids differ".into());
        }
        if self.paths != other.paths {
            return Err("path counts differ".into());
        }
        if !self.modes.same_as(&other.modes) {
            return Err("mode sets differ".into());
        }
        let (ua, za) = match (&self.u_fields, &self.z_fields) {
            (Some(u), Some(z)) => (u, z),
            _ => return Err("fields not stored on left side".into()),
        };
        let (ub, zb) = match (&other.u_fields, &other.z_fields) {
            (Some(u), Some(z)) => (u, z),
            _ => return Err("fields not stored on right side".into()),
        };
        let l = self.grid.steps;
        let m = self.paths;
        let dt = self.grid.dt();
        let mut sup_term = 0.0;
        let mut v_term = 0.0;
        let mut z_term = 0.0;
        for path in 0..m {
            let mut sup = 0.0f64;
            for node in 0..=l {
                let d = ua[node * m + path]
                    .sub(&ub[node * m + path])
                    .map_err(|e| e.to_string())?;
                let h = d.norm_h();
                sup = sup.max(h * h);
                let v = d.norm_v();
                let w = if node == 0 || node == l { 0.5 } else { 1.0 };
                v_term += w * dt * v * v;
            }
            sup_term += sup;
            for node in 0..l {
                let d = za[node * m + path]
                    .sub(&zb[node * m + path])
                    .map_err(|e| e.to_string())?;
                let h = d.norm_h();
                z_term += dt * h * h;
            }
        }
        let mf = m as f64;
        Ok(((sup_term + v_term + z_term) / mf).sqrt())
    }
}
