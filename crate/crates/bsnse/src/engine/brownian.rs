use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Uniform grid on `[0, T]` with `L` steps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct TimeGrid {
    pub horizon: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Self {
        assert!(horizon > 0.0 && steps >= 1);
        Self { horizon, steps }
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.horizon * i as f64 / self.steps as f64
    }
}

/// `M` sample paths of the scalar driving Brownian motion on a uniform
/// grid. Regeneration from `(seed, M, L)` is bit-identical: increments are
/// drawn path-by-path, step-by-step from a counter-based stream cipher RNG.
#[derive(Debug, Clone)]
pub struct BrownianEnsemble {
    seed: u64,
    grid: TimeGrid,
    paths: usize,
    /// Path-major increments, `dw[m * L + i]`, each `N(0, T/L)`.
    increments: Vec<f64>,
    /// Path-major running values, `w[m * (L+1) + i]`, `W_0 = 0`.
    values: Vec<f64>,
}

impl BrownianEnsemble {
    pub fn generate(seed: u64, paths: usize, grid: TimeGrid) -> Self {
        assert!(paths >= 2, "need at least two paths");
        let l = grid.steps;
        let sd = grid.dt().sqrt();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut increments = Vec::with_capacity(paths * l);
        let mut values = Vec::with_capacity(paths * (l + 1));
        for _ in 0..paths {
            let mut w = 0.0;
            values.push(w);
            for _ in 0..l {
                let z: f64 = StandardNormal.sample(&mut rng);
                let dw = sd * z;
                increments.push(dw);
                w += dw;
                values.push(w);
            }
        }
        Self {
            seed,
            grid,
            paths,
            increments,
            values,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    /// Increment `W_{t_{i+1}} - W_{t_i}` on path `m`.
    pub fn dw(&self, m: usize, i: usize) -> f64 {
        self.increments[m * self.grid.steps + i]
    }

    /// Value `W_{t_i}` on path `m`.
    pub fn w(&self, m: usize, i: usize) -> f64 {
        self.values[m * (self.grid.steps + 1) + i]
    }

    /// All `W_{t_i}` across paths, in path order.
    pub fn states_at(&self, i: usize) -> Vec<f64> {
        (0..self.paths).map(|m| self.w(m, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regeneration_is_bit_identical() {
        let grid = TimeGrid::new(1.0, 8);
        let a = BrownianEnsemble::generate(42, 100, grid);
        let b = BrownianEnsemble::generate(42, 100, grid);
        assert_eq!(a.increments, b.increments);
        let c = BrownianEnsemble::generate(43, 100, grid);
        assert!(a.increments.iter().zip(&c.increments).any(|(x, y)| x != y));
    }

    #[test]
    fn paths_start_at_zero_and_accumulate() {
        let grid = TimeGrid::new(2.0, 4);
        let e = BrownianEnsemble::generate(7, 10, grid);
        for m in 0..10 {
            assert_eq!(e.w(m, 0), 0.0);
            let mut acc = 0.0;
            for i in 0..4 {
                acc += e.dw(m, i);
                assert!((e.w(m, i + 1) - acc).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn increment_moments_at_large_m() {
        // M = 1e5, L = 1: sample variance within 3% of T (chi-square bound),
        // sample mean within 5 / sqrt(M L) standard errors of zero.
        let grid = TimeGrid::new(1.0, 1);
        let m = 100_000;
        let e = BrownianEnsemble::generate(5, m, grid);
        let mean: f64 = e.increments.iter().sum::<f64>() / m as f64;
        let var: f64 = e.increments.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (m - 1) as f64;
        assert!((var - 1.0).abs() < 0.03, "sample variance {var}");
        let se = (1.0 / m as f64).sqrt();
        assert!(mean.abs() < 5.0 * se, "sample mean {mean}");
    }
}
