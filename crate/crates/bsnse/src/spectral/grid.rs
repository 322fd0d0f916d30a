use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// FFT plans for an `n x n` physical grid.
///
/// Evaluation of a trigonometric polynomial at the uniform grid points
/// `x_m = a*m/n` is exactly the unnormalized inverse DFT of its coefficient
/// array; the forward DFT divided by `n^2` recovers the coefficients as long
/// as the spectral content fits in `[-(n-1)/2, (n-1)/2]` per axis.
pub struct GridPlan {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridPlan").field("n", &self.n).finish()
    }
}

impl GridPlan {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.n * self.n
    }

    /// Index of wavevector component `k` in the wrapped spectral array.
    pub fn wrap(&self, k: i32) -> usize {
        k.rem_euclid(self.n as i32) as usize
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for row in data.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
        transpose_square(data, n);
        for row in data.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
        transpose_square(data, n);
    }

    /// Spectral coefficients -> grid values (unnormalized inverse DFT).
    pub fn to_grid(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv.clone());
    }

    /// Grid values -> spectral coefficients (forward DFT / n^2).
    pub fn to_spectral(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd.clone());
        let scale = 1.0 / (self.points() as f64);
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let plan = GridPlan::new(7);
        let mut data: Vec<Complex64> = (0..49)
            .map(|i| Complex64::new(i as f64 * 0.3 - 1.0, (i % 5) as f64))
            .collect();
        let orig = data.clone();
        plan.to_grid(&mut data);
        plan.to_spectral(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode_evaluates_to_plane_wave() {
        let n = 5;
        let plan = GridPlan::new(n);
        let mut data = vec![Complex64::default(); n * n];
        // mode k = (1, 2)
        data[plan.wrap(1) * n + plan.wrap(2)] = Complex64::new(1.0, 0.0);
        plan.to_grid(&mut data);
        for m1 in 0..n {
            for m2 in 0..n {
                let phase = 2.0 * std::f64::consts::PI * (m1 as f64 + 2.0 * m2 as f64) / n as f64;
                let want = Complex64::new(phase.cos(), phase.sin());
                assert!((data[m1 * n + m2] - want).norm() < 1e-12);
            }
        }
    }
}
