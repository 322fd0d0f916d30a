use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::grid::GridPlan;

/// Nondimensional Fourier mode index; the physical wavenumber is
/// `(2*pi/a) * k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveVector {
    pub kx: i32,
    pub ky: i32,
}

impl WaveVector {
    pub fn new(kx: i32, ky: i32) -> Self {
        Self { kx, ky }
    }

    pub fn neg(self) -> Self {
        Self::new(-self.kx, -self.ky)
    }

    pub fn norm_sq(self) -> i64 {
        self.kx as i64 * self.kx as i64 + self.ky as i64 * self.ky as i64
    }

    pub fn is_zero(self) -> bool {
        self.kx == 0 && self.ky == 0
    }

    /// Canonical member of the conjugate pair `{k, -k}`: positive `kx`, or
    /// `kx == 0` and positive `ky`.
    pub fn is_canonical(self) -> bool {
        self.kx > 0 || (self.kx == 0 && self.ky > 0)
    }
}

/// Reference from a wavevector to its stored representative.
#[derive(Debug, Clone, Copy)]
pub struct ModeRef {
    /// Index into the representative list.
    pub repr: usize,
    /// Whether the looked-up mode is the conjugate of the stored one.
    pub conj: bool,
}

/// Ordered finite wavevector set defining the Galerkin space, with the
/// Stokes eigenvalues `lambda_k = (2*pi/a)^2 |k|^2`.
///
/// Modes are ordered by nondecreasing `|k|^2`, ties broken lexicographically
/// by `(kx, ky)`, which fixes the spectral projection deterministically even
/// though 2D Stokes eigenvalues are degenerate.
#[derive(Debug)]
pub struct ModeSet {
    period: f64,
    modes: Vec<WaveVector>,
    eigenvalues: Vec<f64>,
    representatives: Vec<WaveVector>,
    repr_eigenvalues: Vec<f64>,
    index: HashMap<WaveVector, ModeRef>,
    k_max: i32,
    /// Grid large enough for alias-free quadratic products and exact cubic
    /// quadratures (`n >= 3*k_max + 1`).
    product_grid: GridPlan,
    /// Grid large enough for exact quartic quadratures (`n >= 4*k_max + 1`).
    quartic_grid: GridPlan,
}

impl ModeSet {
    /// Square mode box `{k : max(|kx|, |ky|) <= k_max, k != 0}` on the torus
    /// of period `a`.
    pub fn square(period: f64, k_max: i32) -> Arc<Self> {
        assert!(period > 0.0, "torus period must be positive");
        assert!(k_max >= 1, "mode box must contain at least |k|_inf = 1");
        let mut modes = Vec::new();
        for kx in -k_max..=k_max {
            for ky in -k_max..=k_max {
                let k = WaveVector::new(kx, ky);
                if !k.is_zero() {
                    modes.push(k);
                }
            }
        }
        Self::from_modes(period, modes, k_max)
    }

    /// Mode set made of the first `n_pairs` conjugate pairs of the square box
    /// in eigenvalue order. This is the strict eigenvalue-ordered spectral
    /// projection, up to the pairing of `+-k`.
    pub fn eigenvalue_prefix(period: f64, k_max: i32, n_pairs: usize) -> Arc<Self> {
        let full = Self::square(period, k_max);
        assert!(n_pairs >= 1 && n_pairs <= full.representatives.len());
        let mut modes = Vec::new();
        for &k in full.representatives.iter().take(n_pairs) {
            modes.push(k);
            modes.push(k.neg());
        }
        let km = modes
            .iter()
            .map(|k| k.kx.abs().max(k.ky.abs()))
            .max()
            .unwrap();
        Self::from_modes(period, modes, km)
    }

    fn from_modes(period: f64, mut modes: Vec<WaveVector>, k_max: i32) -> Arc<Self> {
        modes.sort_by_key(|k| (k.norm_sq(), k.kx, k.ky));
        let factor = (2.0 * PI / period).powi(2);
        let eigenvalues: Vec<f64> = modes.iter().map(|k| factor * k.norm_sq() as f64).collect();

        let mut representatives = Vec::new();
        let mut repr_eigenvalues = Vec::new();
        let mut index = HashMap::new();
        for (k, &lambda) in modes.iter().zip(&eigenvalues) {
            if k.is_canonical() {
                let repr = representatives.len();
                representatives.push(*k);
                repr_eigenvalues.push(lambda);
                index.insert(*k, ModeRef { repr, conj: false });
                index.insert(k.neg(), ModeRef { repr, conj: true });
            }
        }
        debug_assert_eq!(2 * representatives.len(), modes.len());

        let n_product = (3 * k_max + 1) as usize;
        let n_quartic = (4 * k_max + 1) as usize;
        Arc::new(Self {
            period,
            modes,
            eigenvalues,
            representatives,
            repr_eigenvalues,
            index,
            k_max,
            product_grid: GridPlan::new(n_product),
            quartic_grid: GridPlan::new(n_quartic),
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Lebesgue measure of the period cell, the Parseval weight `|G| = a^2`.
    pub fn cell_measure(&self) -> f64 {
        self.period * self.period
    }

    /// Physical wavenumber scale `2*pi/a`.
    pub fn wavenumber_scale(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    /// All modes, both members of each conjugate pair, in eigenvalue order.
    pub fn modes(&self) -> &[WaveVector] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The stored canonical representatives, in eigenvalue order.
    pub fn representatives(&self) -> &[WaveVector] {
        &self.representatives
    }

    pub fn repr_eigenvalues(&self) -> &[f64] {
        &self.repr_eigenvalues
    }

    pub fn len_pairs(&self) -> usize {
        self.representatives.len()
    }

    pub fn lookup(&self, k: WaveVector) -> Option<ModeRef> {
        self.index.get(&k).copied()
    }

    pub fn contains(&self, k: WaveVector) -> bool {
        self.index.contains_key(&k)
    }

    /// Largest Stokes eigenvalue in the set.
    pub fn lambda_max(&self) -> f64 {
        *self
            .repr_eigenvalues
            .last()
            .expect("mode set is never empty")
    }

    /// Smallest Stokes eigenvalue (the Poincare constant of the set).
    pub fn lambda_min(&self) -> f64 {
        self.repr_eigenvalues[0]
    }

    /// Largest `|k|` (Euclidean) in the set.
    pub fn k_norm_max(&self) -> f64 {
        (self.lambda_max().sqrt()) / self.wavenumber_scale()
    }

    pub fn product_grid(&self) -> &GridPlan {
        &self.product_grid
    }

    pub fn quartic_grid(&self) -> &GridPlan {
        &self.quartic_grid
    }

    /// Two mode sets are interchangeable when the period and the mode list
    /// agree.
    pub fn same_as(&self, other: &ModeSet) -> bool {
        self.period == other.period && self.modes == other.modes
    }
}
