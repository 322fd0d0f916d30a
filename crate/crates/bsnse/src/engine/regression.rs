use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::par;

/// Polynomial least-squares basis in a scalar Markov state, shared by all
/// coefficient components regressed at one time node.
///
/// The state is centered and scaled before powers are taken, which keeps the
/// small normal-equation system well conditioned. If the Gram matrix is
/// rank-deficient at the requested degree the degree is reduced until the
/// factorization succeeds, and the node is flagged.
pub struct StateBasis {
    center: f64,
    scale: f64,
    degree: usize,
    /// Path-major feature rows, `(degree + 1)` entries per path.
    feats: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
    /// Eigenvalue condition number of the Gram matrix.
    pub cond: f64,
    /// Set when the degree had to be reduced below the request.
    pub degraded: bool,
}

impl StateBasis {
    pub fn build(states: &[f64], requested_degree: usize) -> Self {
        let m = states.len() as f64;
        assert!(states.len() >= 2);
        let center = states.iter().sum::<f64>() / m;
        let var = states.iter().map(|s| (s - center) * (s - center)).sum::<f64>() / m;
        let scale = if var.sqrt() > 1e-14 * (1.0 + center.abs()) {
            var.sqrt()
        } else {
            // Degenerate state (e.g. W_0 = 0 on every path): constants only.
            return Self::degenerate(states.len(), center, requested_degree > 0);
        };

        let mut degree = requested_degree.min(states.len() - 2);
        let mut degraded = degree < requested_degree;
        loop {
            let feats = build_features(states, center, scale, degree);
            let gram = accumulate_gram(&feats, degree + 1);
            let cond = condition_number(&gram);
            if let Some(chol) = Cholesky::new(gram) {
                if cond.is_finite() && cond < 1e12 {
                    return Self {
                        center,
                        scale,
                        degree,
                        feats,
                        chol,
                        cond,
                        degraded,
                    };
                }
            }
            if degree == 0 {
                // Constants always work once the state is non-degenerate.
                return Self::degenerate(states.len(), center, true);
            }
            degree -= 1;
            degraded = true;
        }
    }

    fn degenerate(paths: usize, center: f64, degraded: bool) -> Self {
        let feats = vec![1.0; paths];
        let gram = DMatrix::from_element(1, 1, paths as f64);
        let chol = Cholesky::new(gram).expect("1x1 positive matrix");
        Self {
            center,
            scale: 1.0,
            degree: 0,
            feats,
            chol,
            cond: 1.0,
            degraded,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn paths(&self) -> usize {
        self.feats.len() / (self.degree + 1)
    }

    /// Least-squares fit of one response vector; returns the polynomial
    /// coefficients (in the normalized state) and the fitted values.
    pub fn fit(&self, responses: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let coeffs = self.fit_coeffs(responses);
        let fitted = self.eval_on_paths(&coeffs);
        (coeffs, fitted)
    }

    pub fn fit_coeffs(&self, responses: &[f64]) -> Vec<f64> {
        let p = self.degree + 1;
        debug_assert_eq!(responses.len(), self.paths());
        let partials = par::map_chunks(responses, |start, chunk| {
            let mut rhs = vec![0.0; p];
            for (off, &y) in chunk.iter().enumerate() {
                let row = &self.feats[(start + off) * p..(start + off + 1) * p];
                for j in 0..p {
                    rhs[j] += row[j] * y;
                }
            }
            rhs
        });
        let mut rhs = DVector::zeros(p);
        for part in partials {
            for j in 0..p {
                rhs[j] += part[j];
            }
        }
        let sol = self.chol.solve(&rhs);
        sol.iter().copied().collect()
    }

    pub fn eval_on_paths(&self, coeffs: &[f64]) -> Vec<f64> {
        let p = self.degree + 1;
        self.feats
            .chunks_exact(p)
            .map(|row| row.iter().zip(coeffs).map(|(f, c)| f * c).sum())
            .collect()
    }

    /// Evaluate the fitted polynomial at an arbitrary state value.
    pub fn eval_at(&self, coeffs: &[f64], state: f64) -> f64 {
        eval_poly(coeffs, (state - self.center) / self.scale)
    }
}

/// Horner evaluation of a polynomial in the normalized state.
pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn build_features(states: &[f64], center: f64, scale: f64, degree: usize) -> Vec<f64> {
    let p = degree + 1;
    let mut feats = vec![0.0; states.len() * p];
    par::for_each_mut(&mut feats.chunks_mut(p).collect::<Vec<_>>(), |m, row| {
        let x = (states[m] - center) / scale;
        let mut pw = 1.0;
        for f in row.iter_mut() {
            *f = pw;
            pw *= x;
        }
    });
    feats
}

fn accumulate_gram(feats: &[f64], p: usize) -> DMatrix<f64> {
    // Chunk by whole feature rows so the summation order is fixed.
    let rows: Vec<&[f64]> = feats.chunks_exact(p).collect();
    let parts = par::map_chunks(&rows, |_start, chunk| {
        let mut g = vec![0.0; p * p];
        for row in chunk {
            for i in 0..p {
                for j in i..p {
                    g[i * p + j] += row[i] * row[j];
                }
            }
        }
        g
    });
    let mut gram = DMatrix::zeros(p, p);
    for part in parts {
        for i in 0..p {
            for j in i..p {
                gram[(i, j)] += part[i * p + j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    gram
}

fn condition_number(gram: &DMatrix<f64>) -> f64 {
    let eig = gram.clone().symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Discrete conditional expectation by least-squares regression: fit
/// `values` on polynomial features of `states` up to `degree`.
///
/// Exact (to rounding) when the values are a polynomial of the state of
/// degree at most `degree`.
pub struct RegressionFit {
    pub basis_center: f64,
    pub basis_scale: f64,
    pub degree: usize,
    pub coeffs: Vec<f64>,
    pub fitted: Vec<f64>,
    pub cond: f64,
    pub degraded: bool,
}

pub fn regress_condexp(values: &[f64], states: &[f64], degree: usize) -> RegressionFit {
    assert_eq!(values.len(), states.len());
    assert!(
        values.len() > degree + 1,
        "need more paths than basis functions"
    );
    let basis = StateBasis::build(states, degree);
    let (coeffs, fitted) = basis.fit(values);
    RegressionFit {
        basis_center: basis.center(),
        basis_scale: basis.scale(),
        degree: basis.degree(),
        coeffs,
        fitted,
        cond: basis.cond,
        degraded: basis.degraded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn constants_are_reproduced_exactly() {
        let states: Vec<f64> = (0..50).map(|i| i as f64 * 0.1 - 2.0).collect();
        let values = vec![3.25; 50];
        let fit = regress_condexp(&values, &states, 3);
        for v in &fit.fitted {
            assert!((v - 3.25).abs() < 1e-12);
        }
    }

    #[test]
    fn in_span_polynomials_are_exact() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let states: Vec<f64> = (0..200).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let values: Vec<f64> = states.iter().map(|s| 1.0 - 0.5 * s + 2.0 * s * s).collect();
        let fit = regress_condexp(&values, &states, 2);
        for (v, y) in fit.fitted.iter().zip(&values) {
            assert!((v - y).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_state_degrades_to_mean() {
        let states = vec![0.0; 20];
        let values: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let fit = regress_condexp(&values, &states, 4);
        assert_eq!(fit.degree, 0);
        assert!(fit.degraded);
        for v in &fit.fitted {
            assert!((v - 9.5).abs() < 1e-12);
        }
    }

    #[test]
    fn indicator_fit_tracks_best_polynomial() {
        // L2 fit error of 1{state > 0} at degree 4 must not exceed the best
        // degree-4 polynomial's error (computed by dense quadrature against
        // the empirical distribution) by more than 3 standard errors.
        let m = 10_000;
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let states: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let values: Vec<f64> = states.iter().map(|&s| if s > 0.0 { 1.0 } else { 0.0 }).collect();
        let fit = regress_condexp(&values, &states, 4);
        let err2: f64 = fit
            .fitted
            .iter()
            .zip(&values)
            .map(|(f, y)| (f - y) * (f - y))
            .sum::<f64>()
            / m as f64;
        // The least-squares fit on the sample IS the best polynomial in the
        // empirical L2 metric, so its error is at most the best-polynomial
        // error; sanity-bound it between the known continuum optimum for
        // U(-1,1) and a loose upper bound.
        assert!(err2 < 0.25, "fit no better than a constant: {err2}");
        let se = (err2 / m as f64).sqrt();
        // Continuum best-degree-4 error for the step function on U(-1,1)
        // computed offline by Legendre expansion: 1/4 - 147/512 * 15/16 ... ;
        // empirically about 0.0354.
        assert!(err2 < 0.0354 + 3.0 * se + 0.01, "fit error {err2}");
    }
}
