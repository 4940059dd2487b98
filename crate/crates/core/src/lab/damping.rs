//! Damped integral operators `f -> int_0^T e^{-alpha |t-s|} chi(t,s) f(s) ds`
//! on scalar functions, measured on a family of test inputs.

use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::lab::fit::DecayFit;
use crate::quadrature::gauss_legendre_on;

/// Cutoff `chi(t, s)` of the model operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelCut {
    /// `chi = 1`
    Symmetric,
    /// `chi = 1_{s < t}`, the Duhamel shape.
    Causal,
}

/// Exponents of a damping-lemma experiment: the undamped operator with
/// kernel 1 maps `L^{p0} -> L^{q0}` with `(q0, p0) = (inf, 1)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DampingExponents {
    pub q: f64,
    pub p: f64,
    pub q0: f64,
    pub p0: f64,
}

impl DampingExponents {
    pub fn new(q: f64, p: f64) -> DampingExponents {
        DampingExponents {
            q,
            p,
            q0: f64::INFINITY,
            p0: 1.0,
        }
    }

    pub fn beta(&self) -> f64 {
        let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
        inv(self.q) - inv(self.q0) + inv(self.p0) - inv(self.p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 <= self.p && self.p <= self.q && self.q <= self.q0 && self.q >= 1.0) {
            return Err(EmError::InvalidParameter(format!(
                "need p0 <= p <= q <= q0 and q >= 1, got {self:?}"
            )));
        }
        if self.beta() < 0.0 {
            return Err(EmError::InvalidParameter("beta must be >= 0".into()));
        }
        Ok(())
    }
}

/// `K f (t)` for `f = 1_{[a, a+w)}`, in closed form.
fn indicator_response(t: f64, a: f64, w: f64, alpha: f64, cut: KernelCut) -> f64 {
    // int_lo^hi e^{-alpha |t - s|} ds
    let seg = |lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let part = |x0: f64, x1: f64| -> f64 {
            // 0 <= x0 <= x1 distances from t
            if alpha == 0.0 {
                x1 - x0
            } else {
                ((-alpha * x0).exp() - (-alpha * x1).exp()) / alpha
            }
        };
        if t <= lo {
            part(lo - t, hi - t)
        } else if t >= hi {
            part(t - hi, t - lo)
        } else {
            part(0.0, t - lo) + part(0.0, hi - t)
        }
    };
    match cut {
        KernelCut::Symmetric => seg(a, a + w),
        KernelCut::Causal => seg(a, (a + w).min(t)),
    }
}

/// `L^q(0, T)` norm of `t -> K 1_{[a,a+w)} (t)` by Gauss-Legendre panels
/// graded toward the kinks of the response.
fn response_norm(a: f64, w: f64, alpha: f64, t_end: f64, q: f64, cut: KernelCut) -> f64 {
    let mut breaks = vec![0.0, a, a + w, t_end];
    // resolve the exponential layers of width 1/alpha
    if alpha > 0.0 {
        let mut d = 1.0 / alpha;
        for _ in 0..40 {
            for base in [a, a + w] {
                breaks.push(base + d);
                breaks.push(base - d);
            }
            d *= 2.0;
        }
        let mut d = 1.0 / alpha;
        for _ in 0..20 {
            d *= 0.5;
            for base in [a, a + w] {
                breaks.push(base + d);
                breaks.push(base - d);
            }
        }
    }
    breaks.retain(|b| *b >= 0.0 && *b <= t_end);
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * t_end);
    if q.is_infinite() {
        let mut m: f64 = 0.0;
        for win in breaks.windows(2) {
            for k in 0..=16 {
                let t = win[0] + (win[1] - win[0]) * k as f64 / 16.0;
                m = m.max(indicator_response(t, a, w, alpha, cut));
            }
        }
        return m;
    }
    let mut acc = 0.0;
    for win in breaks.windows(2) {
        if win[1] <= win[0] {
            continue;
        }
        let (x, wt) = gauss_legendre_on(16, win[0], win[1]);
        for (t, v) in x.iter().zip(wt.iter()) {
            acc += v * indicator_response(*t, a, w, alpha, cut).powf(q);
        }
    }
    acc.powf(1.0 / q)
}

/// Largest measured `||K f||_{L^q} / ||f||_{L^p}` over indicators of every
/// width in a geometric family (the full interval among them), placed at
/// the left edge and at the centre of `[0, T]`.
pub fn damped_operator_ratio(alpha: f64, t_end: f64, ex: &DampingExponents, cut: KernelCut) -> f64 {
    let widths = 48;
    let w_min = t_end * 1e-4;
    let mut best: f64 = 0.0;
    for k in 0..=widths {
        let w = w_min * (t_end / w_min).powf(k as f64 / widths as f64);
        let den = if ex.p.is_infinite() {
            1.0
        } else {
            w.powf(1.0 / ex.p)
        };
        // at the left edge and centred
        for a in [0.0, 0.5 * (t_end - w)] {
            best = best.max(response_norm(a, w, alpha, t_end, ex.q, cut) / den);
        }
    }
    best
}

/// Ratio for a random step function `f` with `cells` equal pieces, computed
/// exactly per piece.
pub fn damped_operator_ratio_random(
    alpha: f64,
    t_end: f64,
    ex: &DampingExponents,
    cut: KernelCut,
    values: &[f64],
) -> f64 {
    let cells = values.len();
    let h = t_end / cells as f64;
    let (x, wt) = gauss_legendre_on(8, 0.0, h);
    let kf = |t: f64| -> f64 {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| v * indicator_response(t, i as f64 * h, h, alpha, cut))
            .sum::<f64>()
            .abs()
    };
    let num = if ex.q.is_infinite() {
        (0..cells)
            .flat_map(|c| x.iter().map(move |t| c as f64 * h + t))
            .map(kf)
            .fold(0.0, f64::max)
    } else {
        let mut acc = 0.0;
        for c in 0..cells {
            for (t, w) in x.iter().zip(wt.iter()) {
                acc += w * kf(c as f64 * h + t).powf(ex.q);
            }
        }
        acc.powf(1.0 / ex.q)
    };
    let den = if ex.p.is_infinite() {
        values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    } else {
        (values.iter().map(|v| v.abs().powf(ex.p)).sum::<f64>() * h).powf(1.0 / ex.p)
    };
    num / den
}

/// One `(alpha, T)` point of a damping-lemma sweep.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DampingPoint {
    pub alpha: f64,
    pub t: f64,
    /// `T / (1 + alpha T)`
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DampingReport {
    pub exponents: DampingExponents,
    pub beta: f64,
    pub points: Vec<DampingPoint>,
    /// `ln ratio` against `ln (T / (1 + alpha T))`.
    pub fit: DecayFit,
}

/// Measure the operator ratio on the grid `alpha_list x t_list` and fit it
/// against the damping envelope.
pub fn damping_lemma_check(
    alpha_list: &[f64],
    t_list: &[f64],
    ex: &DampingExponents,
    cut: KernelCut,
) -> Result<DampingReport> {
    ex.validate()?;
    if alpha_list.iter().any(|a| !(*a >= 0.0)) || t_list.iter().any(|t| !(*t > 0.0)) {
        return Err(EmError::InvalidParameter("need alpha >= 0 and T > 0".into()));
    }
    let mut points = Vec::new();
    for &alpha in alpha_list {
        for &t in t_list {
            points.push(DampingPoint {
                alpha,
                t,
                envelope: t / (1.0 + alpha * t),
                ratio: damped_operator_ratio(alpha, t, ex, cut),
            });
        }
    }
    let x: Vec<f64> = points.iter().map(|p| p.envelope).collect();
    let y: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    let fit = DecayFit::log_log(&x, &y)?;
    Ok(DampingReport {
        exponents: *ex,
        beta: ex.beta(),
        points,
        fit,
    })
}
