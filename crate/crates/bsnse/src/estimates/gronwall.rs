use crate::engine::{regress_condexp, BrownianEnsemble, TimeGrid};

use super::report::EstimateReport;

/// Deterministic comparison envelope: the bound implied for any grid
/// function `g` with `g(t) <= g_T + int_t^T (alpha g(s) + h(s)) ds`, namely
///
/// `env(t) = e^{alpha (T - t)} g_T + int_t^T e^{alpha (s - t)} h(s) ds`,
///
/// with the tail integral evaluated by the trapezoid rule on the grid.
pub fn gronwall_envelope(
    g_terminal: f64,
    alpha: f64,
    h: &dyn Fn(f64) -> f64,
    grid: &TimeGrid,
) -> Vec<f64> {
    let l = grid.steps;
    let dt = grid.dt();
    let horizon = grid.horizon;
    (0..=l)
        .map(|i| {
            let t = grid.node(i);
            let mut tail = 0.0;
            for j in i..l {
                let s0 = grid.node(j);
                let s1 = grid.node(j + 1);
                tail += 0.5
                    * dt
                    * ((alpha * (s0 - t)).exp() * h(s0) + (alpha * (s1 - t)).exp() * h(s1));
            }
            (alpha * (horizon - t)).exp() * g_terminal + tail
        })
        .collect()
}

/// Ensemble-level check of the conditional comparison inequality
/// `Y_t <= e^{alpha (T - t)} E_t[Y_T] + E_t[sum_s e^{alpha (s - t)} X_s dt]`.
///
/// `y` and `x` are node-major per-path grid processes (`(L+1) * M` values).
/// The conditional expectation is realized by polynomial regression on the
/// Brownian state, so the check is audited at the ensemble-mean level per
/// node: a node violates when `mean(Y_i - fitted RHS)` exceeds four standard
/// errors of that mean.
pub fn stochastic_gronwall_check(
    y: &[f64],
    x: &[f64],
    alpha: f64,
    noise: &BrownianEnsemble,
    degree: usize,
) -> EstimateReport {
    let grid = noise.grid();
    let l = grid.steps;
    let m = noise.paths();
    let dt = grid.dt();
    assert_eq!(y.len(), (l + 1) * m);
    assert_eq!(x.len(), (l + 1) * m);

    let mut report = EstimateReport::new("stochastic_gronwall");
    report.constant("alpha", alpha);
    report.seed = Some(noise.seed());
    for i in 0..=l {
        let t = grid.node(i);
        let responses: Vec<f64> = (0..m)
            .map(|path| {
                let mut acc = (alpha * (grid.horizon - t)).exp() * y[l * m + path];
                for j in i..l {
                    let s = grid.node(j);
                    acc += dt * (alpha * (s - t)).exp() * x[j * m + path];
                }
                acc
            })
            .collect();
        let states = noise.states_at(i);
        let fit = regress_condexp(&responses, &states, degree);
        let diffs: Vec<f64> = (0..m).map(|path| y[i * m + path] - fit.fitted[path]).collect();
        let mean = diffs.iter().sum::<f64>() / m as f64;
        // The fitted values share the regression coefficients, so y - fitted
        // is correlated across paths and its spread understates the error of
        // the mean. y - response is iid across paths and has the same mean
        // (the basis contains the constant), so the standard error comes
        // from there.
        let raw: Vec<f64> = (0..m).map(|path| y[i * m + path] - responses[path]).collect();
        let raw_mean = raw.iter().sum::<f64>() / m as f64;
        let var =
            raw.iter().map(|d| (d - raw_mean) * (d - raw_mean)).sum::<f64>() / (m - 1) as f64;
        let se = (var / m as f64).sqrt();
        let scale = responses.iter().map(|r| r.abs()).fold(0.0, f64::max);
        report.push(mean, 0.0, 4.0 * se + 1e-12 * (1.0 + scale));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_closed_forms() {
        let grid = TimeGrid::new(1.0, 100);

        let flat = gronwall_envelope(2.5, 0.0, &|_| 0.0, &grid);
        assert!(flat.iter().all(|v| (v - 2.5).abs() < 1e-14));

        let exp = gronwall_envelope(1.0, 1.0, &|_| 0.0, &grid);
        assert!((exp[0] - std::f64::consts::E).abs() < 1e-12);

        // g_T = 0, alpha = 0, h = 1: exact linear tail, trapezoid is exact
        let lin = gronwall_envelope(0.0, 0.0, &|_| 1.0, &grid);
        for (i, v) in lin.iter().enumerate() {
            let t = grid.node(i);
            assert!((v - (1.0 - t)).abs() < 1e-13);
        }
    }

    #[test]
    fn envelope_monotonicity() {
        let grid = TimeGrid::new(1.0, 32);
        let base = gronwall_envelope(1.0, 0.5, &|s| s, &grid);
        let bigger_gt = gronwall_envelope(1.5, 0.5, &|s| s, &grid);
        let bigger_alpha = gronwall_envelope(1.0, 0.8, &|s| s, &grid);
        let bigger_h = gronwall_envelope(1.0, 0.5, &|s| s + 0.1, &grid);
        for i in 0..base.len() {
            assert!(bigger_gt[i] >= base[i]);
            assert!(bigger_alpha[i] >= base[i]);
            assert!(bigger_h[i] >= base[i]);
        }
    }

    #[test]
    fn constant_process_saturates_the_inequality() {
        let grid = TimeGrid::new(1.0, 8);
        let noise = BrownianEnsemble::generate(5, 500, grid);
        let y = vec![3.0; 9 * 500];
        let x = vec![0.0; 9 * 500];
        let report = stochastic_gronwall_check(&y, &x, 0.0, &noise, 2);
        assert!(report.passes(), "violations {}", report.violations);
        // equality: margins essentially zero
        assert!(report.margin_min.abs() < 1e-9);
    }

    #[test]
    fn quadratic_martingale_passes() {
        // W_t^2 - t is a martingale, so Y_i = W_i^2 - t_i satisfies the
        // comparison with alpha = 0, X = 0 up to regression error.
        let grid = TimeGrid::new(1.0, 8);
        let m = 4000;
        let noise = BrownianEnsemble::generate(9, m, grid);
        let mut y = vec![0.0; 9 * m];
        for i in 0..=8 {
            let t = grid.node(i);
            for path in 0..m {
                y[i * m + path] = noise.w(path, i).powi(2) - t;
            }
        }
        let x = vec![0.0; 9 * m];
        let report = stochastic_gronwall_check(&y, &x, 0.0, &noise, 3);
        assert!(report.passes(), "violations {}", report.violations);
    }
}
