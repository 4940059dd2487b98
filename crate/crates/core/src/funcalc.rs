//! Scalar phi-functions and a functional calculus for 2x2 generators with a
//! real shift and a real squared half-gap.
//!
//! A generator of the form `A = m I + K` with `K^2 = w I` (`m`, `w` real) has
//! eigenvalues `m +- sqrt(w)`. Any entire function then acts as
//! `f(A) = mean I + dd K` with `mean = (f(m+d) + f(m-d)) / 2` and
//! `dd = (f(m+d) - f(m-d)) / (2 d)`, `d = sqrt(w)`. Both numbers are real for
//! functions that are real on the real axis. Near `w = 0` the divided
//! difference cancels catastrophically, so a Taylor expansion in `w` around
//! `m` is used instead.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::quadrature::gauss_legendre_on;

/// Below this gap `|lambda_+ - lambda_-| t`, the Taylor branch is used.
pub const DEGENERATE_GAP: f64 = 1e-4;
/// Number of terms of the degenerate Taylor expansion.
pub const TAYLOR_TERMS: usize = 6;

/// `exp(z) - 1` without cancellation for small `|z|`.
pub fn expm1c(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let em = x.exp_m1();
    let s = (0.5 * y).sin();
    Complex64::new(em * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

/// `phi_1(z) = (e^z - 1) / z`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = term;
        for j in 1..8 {
            term *= z / (j as f64 + 1.0);
            acc += term;
        }
        acc
    } else {
        expm1c(z) / z
    }
}

/// `phi_2(z) = (e^z - 1 - z) / z^2`.
pub fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < 1.0 {
        // sum_j z^j / (j + 2)!
        let mut term = Complex64::new(0.5, 0.0);
        let mut acc = term;
        for j in 1..24 {
            term *= z / (j as f64 + 2.0);
            acc += term;
        }
        acc
    } else {
        (expm1c(z) - z) / (z * z)
    }
}

pub fn phi1_real(x: f64) -> f64 {
    phi1(Complex64::new(x, 0.0)).re
}

pub fn phi2_real(x: f64) -> f64 {
    phi2(Complex64::new(x, 0.0)).re
}

/// Entire functions supported by the pair calculus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairFn {
    Exp,
    Phi1,
    Phi2,
    /// `z e^z`
    ZExp,
}

fn gl_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre_on(48, 0.0, 1.0))
}

/// `n`-th derivative of `phi_k` at real `x`:
/// `phi_k^(n)(x) = 1/(k-1)! int_0^1 u^n (1-u)^(k-1) e^(u x) du`.
pub fn phi_derivative(k: u32, n: u32, x: f64) -> f64 {
    assert!(k >= 1);
    // for strongly negative x the integrand lives in u < 60/|x|
    let top = if x < -60.0 { 60.0 / -x } else { 1.0 };
    let (nodes, weights) = gl_nodes();
    let mut acc = 0.0;
    for (u0, w0) in nodes.iter().zip(weights.iter()) {
        let u = u0 * top;
        acc += w0 * top * u.powi(n as i32) * (1.0 - u).powi(k as i32 - 1) * (u * x).exp();
    }
    let fact: f64 = (1..k).map(|i| i as f64).product();
    acc / fact
}

impl PairFn {
    pub fn eval(self, z: Complex64) -> Complex64 {
        match self {
            PairFn::Exp => z.exp(),
            PairFn::Phi1 => phi1(z),
            PairFn::Phi2 => phi2(z),
            PairFn::ZExp => z * z.exp(),
        }
    }

    /// `n`-th derivative at a real point.
    pub fn derivative(self, n: u32, x: f64) -> f64 {
        match self {
            PairFn::Exp => x.exp(),
            PairFn::Phi1 => phi_derivative(1, n, x),
            PairFn::Phi2 => phi_derivative(2, n, x),
            PairFn::ZExp => (x + n as f64) * x.exp(),
        }
    }
}

/// `(mean, dd)` for `f` at the eigenvalue pair `m +- sqrt(w)`.
pub fn pair_split(f: PairFn, m: f64, w: f64) -> (f64, f64) {
    let gap = 2.0 * w.abs().sqrt();
    if gap < DEGENERATE_GAP {
        let mut mean = 0.0;
        let mut dd = 0.0;
        let mut wk = 1.0;
        let mut fact_even = 1.0; // (2k)!
        for k in 0..TAYLOR_TERMS {
            if k > 0 {
                fact_even *= ((2 * k - 1) * (2 * k)) as f64;
            }
            let fact_odd = fact_even * (2 * k + 1) as f64;
            mean += f.derivative(2 * k as u32, m) * wk / fact_even;
            dd += f.derivative(2 * k as u32 + 1, m) * wk / fact_odd;
            wk *= w;
        }
        (mean, dd)
    } else {
        let d = if w >= 0.0 {
            Complex64::new(w.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-w).sqrt())
        };
        let mc = Complex64::new(m, 0.0);
        let fp = f.eval(mc + d);
        let fm = f.eval(mc - d);
        (0.5 * (fp + fm).re, ((fp - fm) / (2.0 * d)).re)
    }
}

/// 2x2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

pub fn mat2_apply(a: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Generator `[[-alpha, i kappa], [i kappa, 0]]`, the common shape of the
/// solenoidal Maxwell block and of the first-order damped wave system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampedPair {
    pub alpha: f64,
    pub kappa: f64,
}

impl DampedPair {
    pub fn new(alpha: f64, kappa: f64) -> DampedPair {
        DampedPair { alpha, kappa }
    }

    pub fn shift(&self) -> f64 {
        -0.5 * self.alpha
    }

    /// Squared half-gap `alpha^2 / 4 - kappa^2`.
    pub fn half_gap_sq(&self) -> f64 {
        0.25 * self.alpha * self.alpha - self.kappa * self.kappa
    }

    pub fn generator(&self) -> Mat2 {
        let i = Complex64::new(0.0, 1.0);
        [
            [Complex64::new(-self.alpha, 0.0), i * self.kappa],
            [i * self.kappa, Complex64::new(0.0, 0.0)],
        ]
    }

    /// Traceless part `K = A - shift I`.
    pub fn traceless(&self) -> Mat2 {
        let i = Complex64::new(0.0, 1.0);
        [
            [Complex64::new(-0.5 * self.alpha, 0.0), i * self.kappa],
            [i * self.kappa, Complex64::new(0.5 * self.alpha, 0.0)],
        ]
    }

    /// Coefficients `(mean, dd)` such that `f(h A) = mean I + dd h K`.
    pub fn split(&self, f: PairFn, h: f64) -> (f64, f64) {
        pair_split(f, h * self.shift(), h * h * self.half_gap_sq())
    }

    /// `f(h A)` as a matrix.
    pub fn matrix(&self, f: PairFn, h: f64) -> Mat2 {
        let (mean, dd) = self.split(f, h);
        let k = self.traceless();
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = k[i][j] * (dd * h);
            }
            out[i][i] += mean;
        }
        out
    }
}
