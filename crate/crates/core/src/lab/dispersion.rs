//! Oscillatory integrals `I(t, x) = int e^{i(x.xi +- t delta(xi))} psi(xi) dxi`
//! in 2D with `delta(xi) = sqrt(|xi|^2 - alpha^2 / 4)`.
//!
//! For radial `psi` the angular integral is a Bessel function:
//! `I(t, x) = 2 pi int J0(|x| r) e^{+- i t delta(r)} psi(r) r dr`, which is
//! evaluated with composite Gauss-Legendre panels.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::lab::fit::DecayFit;
use crate::lp::{phi, smooth_step};
use crate::quadrature::gauss_legendre;

const NODES: usize = 8;
const MIN_PANELS: f64 = 64.0;

/// Radial test function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PsiSpec {
    /// The dyadic annulus profile, supported in `(3/4, 2)`.
    Dyadic,
    /// Smooth bump supported in `(inner, outer)`.
    Bump { inner: f64, outer: f64 },
}

impl PsiSpec {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            PsiSpec::Dyadic => (0.75, 2.0),
            PsiSpec::Bump { inner, outer } => (inner, outer),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            PsiSpec::Dyadic => phi(r),
            PsiSpec::Bump { inner, outer } => {
                let w = 0.25 * (outer - inner);
                smooth_step((r - inner) / w) * smooth_step((outer - r) / w)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.support();
        if !(a >= 0.25 && b > a && b.is_finite()) {
            return Err(EmError::InvalidParameter(format!(
                "psi must be supported in 1/4 <= r_in < r_out, got ({a}, {b})"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

pub fn delta(r: f64, alpha: f64) -> f64 {
    (r * r - 0.25 * alpha * alpha).max(0.0).sqrt()
}

/// Value of the integral and the difference to the next refinement level.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DispersionValue {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

fn check(t: f64, alpha: f64, psi: &PsiSpec) -> Result<()> {
    psi.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(EmError::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    if !(0.0..=0.5).contains(&alpha) {
        return Err(EmError::InvalidParameter(format!(
            "alpha must lie in [0, 1/2], got {alpha}"
        )));
    }
    Ok(())
}

/// Panel count: at least 4 panels per oscillation of `J0(rho r) e^{i t delta(r)}`
/// on the support, whose radial frequency is at most `rho + t max delta'`,
/// on top of a floor that resolves the transitions of `psi` itself.
fn panel_count(t: f64, rho: f64, alpha: f64, psi: &PsiSpec) -> usize {
    let (a, b) = psi.support();
    let slope = a / delta(a, alpha).max(1e-12);
    (MIN_PANELS + 4.0 * (t * slope + rho) * b / (2.0 * PI)).ceil() as usize
}

fn radial_sum(t: f64, rho: f64, alpha: f64, psi: &PsiSpec, branch: Branch, panels: usize) -> Complex64 {
    let (a, b) = psi.support();
    let (x, w) = gauss_legendre(NODES);
    let h = (b - a) / panels as f64;
    let s = branch.sign();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w.iter()) {
            let r = mid + 0.5 * h * xi;
            let amp = psi.eval(r);
            if amp == 0.0 {
                continue;
            }
            let ph = s * t * delta(r, alpha);
            acc += Complex64::from_polar(wi * 0.5 * h * amp * r * libm::j0(rho * r), ph);
        }
    }
    acc * (2.0 * PI)
}

/// `I(t, x)` with an error estimate from one doubling of the panel count.
/// Fails when the two levels differ by more than `tol`.
pub fn dispersion_integral(
    t: f64,
    x: [f64; 2],
    alpha: f64,
    psi: &PsiSpec,
    branch: Branch,
    tol: f64,
) -> Result<DispersionValue> {
    check(t, alpha, psi)?;
    let rho = x[0].hypot(x[1]);
    let n = panel_count(t, rho, alpha, psi);
    let coarse = radial_sum(t, rho, alpha, psi, branch, n);
    let fine = radial_sum(t, rho, alpha, psi, branch, 2 * n);
    let diff = (fine - coarse).norm();
    if !(diff <= tol) {
        return Err(EmError::Quadrature { diff, tol });
    }
    Ok(DispersionValue {
        value: fine,
        error: diff,
        panels: 2 * n,
    })
}

/// `sup_x |I(t, x)|` at one time.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DispersionSup {
    pub t: f64,
    pub sup: f64,
    /// `|x|` attaining the sup.
    pub rho: f64,
    pub error: f64,
}

/// Scan `|x|` across the stationary set `t r / delta(r)`, `r in supp psi`,
/// widened by a margin, then refine the maximiser.
pub fn dispersion_sup(t: f64, alpha: f64, psi: &PsiSpec, tol: f64) -> Result<DispersionSup> {
    check(t, alpha, psi)?;
    let (a, b) = psi.support();
    let v_hi = a / delta(a, alpha).max(1e-12);
    let v_lo = b / delta(b, alpha);
    let margin = 12.0;
    let lo = (t * v_lo - margin).max(0.0);
    let hi = t * v_hi + margin;
    let step = 0.25;
    let count = ((hi - lo) / step).ceil() as usize + 1;
    let mut best = (0.0, 0.0);
    let mut scan = |rho: f64| {
        let n = panel_count(t, rho, alpha, psi);
        let v = radial_sum(t, rho, alpha, psi, Branch::Minus, n).norm();
        if v > best.1 {
            best = (rho, v);
        }
    };
    scan(0.0);
    for k in 0..count {
        scan(lo + k as f64 * step);
    }
    let refined = dispersion_integral(t, [best.0, 0.0], alpha, psi, Branch::Minus, tol)?;
    Ok(DispersionSup {
        t,
        sup: refined.value.norm(),
        rho: best.0,
        error: refined.error,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DispersionReport {
    pub alpha: f64,
    pub samples: Vec<DispersionSup>,
    /// `ln sup` against `ln t`.
    pub fit: DecayFit,
    pub predicted: f64,
}

/// Decay of `sup_x |I(t, x)|` over `t_list`; the predicted slope is `-(d-1)/2`.
pub fn dispersion_decay(alpha: f64, t_list: &[f64], psi: &PsiSpec, tol: f64) -> Result<DispersionReport> {
    let samples: Vec<DispersionSup> = t_list
        .iter()
        .map(|&t| dispersion_sup(t, alpha, psi, tol))
        .collect::<Result<_>>()?;
    let fit = DecayFit::log_log(t_list, &samples.iter().map(|s| s.sup).collect::<Vec<_>>())?;
    Ok(DispersionReport {
        alpha,
        samples,
        fit,
        predicted: -0.5,
    })
}

/// `n` logarithmically spaced times in `[t0, t1]`.
pub fn log_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| t0 * (t1 / t0).powf(k as f64 / (n - 1).max(1) as f64))
        .collect()
}
