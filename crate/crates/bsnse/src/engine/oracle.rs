use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::forcing::TimeFn;

/// Gauss-Hermite rule: nodes and weights with
/// `int g(x) exp(-x^2) dx ~ sum w_i g(x_i)`, exact for polynomials of degree
/// `2n - 1`. Computed by eigendecomposition of the Jacobi matrix (zero
/// diagonal, off-diagonal `sqrt(i / 2)`); the weight is `sqrt(pi)` times the
/// squared first component of the normalized eigenvector.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jacobi = DMatrix::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        jacobi[(i - 1, i)] = b;
        jacobi[(i, i - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (node, std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Terminal profile of the scalar mode coefficient as a function of `W_T`.
/// All variants extend analytically to complex arguments, which the oracle
/// needs because the transport term shifts the state into the complex plane.
#[derive(Debug, Clone, Copy)]
pub enum Psi {
    Const(Complex64),
    /// `psi(w) = c * w`.
    Linear(Complex64),
    /// `psi(w) = amp * tanh(w)`.
    Tanh { amp: f64 },
}

impl Psi {
    pub fn eval(&self, w: Complex64) -> Complex64 {
        match *self {
            Psi::Const(c) => c,
            Psi::Linear(c) => c * w,
            Psi::Tanh { amp } => w.tanh() * amp,
        }
    }

    pub fn deriv(&self, w: Complex64) -> Complex64 {
        match *self {
            Psi::Const(_) => Complex64::default(),
            Psi::Linear(c) => c,
            Psi::Tanh { amp } => {
                let c = w.cosh();
                Complex64::new(amp, 0.0) / (c * c)
            }
        }
    }
}

/// Closed-form solution of the scalar backward equation satisfied by one
/// Fourier coefficient of the linear system (no convection, forcing at most
/// linear in the state):
///
/// `-dy = (-nu lambda y + a1 y + i j z + f(t)) dt - z dW, y_T = psi(W_T)`,
///
/// where `j = (2 pi / a) (sigma . k)` is the transport symbol of the mode.
/// By the Feynman-Kac correspondence `y(t, w)` solves the terminal-value
/// problem
///
/// `y_t + y_ww / 2 + i j y_w - lh y + f(t) = 0` with `lh = nu lambda - a1`,
///
/// whose heat-kernel solution (the drift `i j` shifts the Gaussian mean into
/// the complex plane; `psi` is entire on the strip in use) is
///
/// `y(t, w) = e^{-lh D} E[psi(w + sqrt(D) X + i j D)]
///           + int_t^T e^{-lh (s - t)} f(s) ds`, `D = T - t`,
///
/// with `X` standard normal, and `z = y_w` by the martingale representation.
/// The Gaussian mean is evaluated by Gauss-Hermite quadrature.
pub struct LinearModeOracle {
    pub nu: f64,
    /// Stokes eigenvalue of the mode.
    pub lambda: f64,
    /// Transport symbol `(2 pi / a) (sigma . k)`.
    pub j_symbol: f64,
    /// Linear state-feedback coefficient of the forcing.
    pub a1: f64,
    pub horizon: f64,
    pub psi: Psi,
    /// Deterministic forcing `f(s) = forcing_coeff * forcing_time(s)`.
    pub forcing_time: TimeFn,
    pub forcing_coeff: Complex64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl LinearModeOracle {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        nu: f64,
        lambda: f64,
        j_symbol: f64,
        a1: f64,
        horizon: f64,
        psi: Psi,
        forcing_time: TimeFn,
        forcing_coeff: Complex64,
    ) -> Self {
        let (nodes, weights) = gauss_hermite(64);
        Self {
            nu,
            lambda,
            j_symbol,
            a1,
            horizon,
            psi,
            forcing_time,
            forcing_coeff,
            nodes,
            weights,
        }
    }

    fn lh(&self) -> f64 {
        self.nu * self.lambda - self.a1
    }

    fn gaussian_mean(&self, f: impl Fn(Complex64) -> Complex64, mean: Complex64, var: f64) -> Complex64 {
        // E[f(mean + sqrt(var) X)] = (1/sqrt(pi)) sum w_i f(mean + sqrt(2 var) x_i)
        let s = (2.0 * var).sqrt();
        let mut acc = Complex64::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mean + Complex64::new(s * x, 0.0)) * w;
        }
        acc / std::f64::consts::PI.sqrt()
    }

    fn forcing_integral(&self, t: f64) -> Complex64 {
        let d = self.horizon - t;
        if d <= 0.0 {
            return Complex64::default();
        }
        let lh = self.lh();
        if let TimeFn::Constant(c) = self.forcing_time {
            let shape = if lh.abs() < 1e-14 {
                d
            } else {
                (1.0 - (-lh * d).exp()) / lh
            };
            return self.forcing_coeff * c * shape;
        }
        // Composite Simpson on [t, T].
        let n = 512;
        let h = d / n as f64;
        let g = |s: f64| (-lh * (s - t)).exp() * self.forcing_time.eval(s);
        let mut acc = g(t) + g(self.horizon);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(t + i as f64 * h);
        }
        self.forcing_coeff * (acc * h / 3.0)
    }

    /// The mode coefficient `y(t, w)`.
    pub fn value(&self, t: f64, w: f64) -> Complex64 {
        let d = self.horizon - t;
        let mean = Complex64::new(w, self.j_symbol * d);
        let terminal = if d <= 0.0 {
            self.psi.eval(Complex64::new(w, 0.0))
        } else {
            self.gaussian_mean(|x| self.psi.eval(x), mean, d) * (-self.lh() * d).exp()
        };
        terminal + self.forcing_integral(t)
    }

    /// The integrand coefficient `z(t, w) = dy/dw`.
    pub fn z_value(&self, t: f64, w: f64) -> Complex64 {
        let d = self.horizon - t;
        let mean = Complex64::new(w, self.j_symbol * d);
        if d <= 0.0 {
            self.psi.deriv(Complex64::new(w, 0.0))
        } else {
            self.gaussian_mean(|x| self.psi.deriv(x), mean, d) * (-self.lh() * d).exp()
        }
    }
}
