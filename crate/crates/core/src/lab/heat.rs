//! Parabolic smoothing and maximal regularity of `d_t w + (alpha - Delta) w = f`
//! measured on random band-limited data.
//!
//! Time integrals use Gauss-Legendre panels on the exact per-mode solution:
//! geometric panels for the free flow, uniform sub-panels inside each piece of
//! the piecewise-constant forcing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::funcalc::phi1_real;
use crate::lp::{besov_from_blocks, lq_sum, DyadicCutoffs, NormSpec};
use crate::quadrature::gauss_legendre_on;
use crate::random::random_coefficients;
use crate::spectral::{lp_norm_samples, Field, Grid};

const GL_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeatKind {
    /// `||e^{-t(alpha - Delta)} w0||_{L^q_T B^{s+2/q}_{p,1}} / ||w0||_{B^s_{p,q}}`
    Smoothing,
    /// `||int_0^t e^{-(t-s)(alpha - Delta)} f ds||_{L~^r_T B^{s+2 theta}_{p,q}}`
    /// over `(T/(1+alpha T))^{1+1/m-1/r-theta} ||f||_{L~^m_T B^s_{p,q}}`
    Forced,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HeatParams {
    pub kind: HeatKind,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub m: f64,
    pub r: f64,
    pub theta: f64,
    pub alpha: f64,
    pub horizon: f64,
    /// Data and forcing live on `1 <= |xi| <= band`.
    pub band: f64,
    /// Number of constant pieces of the forcing.
    pub pieces: usize,
}

impl HeatParams {
    pub fn smoothing(s: f64, p: f64, q: f64, alpha: f64, horizon: f64) -> HeatParams {
        HeatParams {
            kind: HeatKind::Smoothing,
            s,
            p,
            q,
            m: q,
            r: q,
            theta: 1.0,
            alpha,
            horizon,
            band: 10.0,
            pieces: 1,
        }
    }

    pub fn forced(
        s: f64,
        p: f64,
        q: f64,
        m: f64,
        r: f64,
        theta: f64,
        alpha: f64,
        horizon: f64,
    ) -> HeatParams {
        HeatParams {
            kind: HeatKind::Forced,
            s,
            p,
            q,
            m,
            r,
            theta,
            alpha,
            horizon,
            band: 10.0,
            pieces: 16,
        }
    }

    /// Exponent `1 + 1/m - 1/r - theta` of `T / (1 + alpha T)`.
    pub fn time_exponent(&self) -> f64 {
        match self.kind {
            HeatKind::Smoothing => 0.0,
            HeatKind::Forced => 1.0 + inv(self.m) - inv(self.r) - self.theta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(EmError::InvalidParameter(msg));
        for (name, v) in [("p", self.p), ("q", self.q), ("m", self.m), ("r", self.r)] {
            if !(v >= 1.0) {
                return bad(format!("{name} must be >= 1, got {v}"));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("T must be > 0, got {}", self.horizon));
        }
        if !(self.band >= 1.0) {
            return bad(format!("band must be >= 1, got {}", self.band));
        }
        if !self.s.is_finite() {
            return bad("s must be finite".into());
        }
        if self.kind == HeatKind::Forced {
            if self.pieces == 0 {
                return bad("forcing needs at least one piece".into());
            }
            if self.m > self.r {
                return bad(format!("need m <= r, got m = {}, r = {}", self.m, self.r));
            }
            if !(0.0..=1.0).contains(&self.theta) {
                return bad(format!("theta must lie in [0, 1], got {}", self.theta));
            }
            if self.time_exponent() < 0.0 {
                return bad("1 + 1/m - 1/r - theta must be >= 0".into());
            }
            if self.theta == 1.0 && (self.m != self.r || self.r.is_infinite() || self.m == 1.0) {
                return bad("the full two-derivative gain needs 1 < m = r < inf".into());
            }
        }
        Ok(())
    }
}

fn inv(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// Band-limited random data on `1 <= |xi| <= band`, stream `tag`.
pub fn band_limited_field(grid: &Grid, seed: u64, tag: u64, band: f64) -> Field {
    let c = random_coefficients(grid, seed, tag, |r| if r <= band { 1.0 } else { 0.0 });
    Field::scalar(grid, c).expect("length matches grid")
}

/// Block `L^p` norms of a scalar spectral field restricted to `active` modes.
struct BlockMeter<'a> {
    grid: &'a Grid,
    cut: &'a DyadicCutoffs,
    active: Vec<usize>,
    p: f64,
    buf: Vec<Complex64>,
}

impl<'a> BlockMeter<'a> {
    fn new(cut: &'a DyadicCutoffs, support: &[Complex64], p: f64) -> BlockMeter<'a> {
        let grid = cut.grid();
        BlockMeter {
            grid,
            cut,
            active: (0..grid.len())
                .filter(|&i| support[i] != Complex64::new(0.0, 0.0))
                .collect(),
            p,
            buf: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    fn blocks(&mut self, coeff: &[Complex64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.cut.num_blocks());
        for k in self.cut.block_indices() {
            let prof = self.cut.block_profile(k)?;
            if self.p == 2.0 {
                let s: f64 = self.active.iter().map(|&i| (prof[i] * coeff[i]).norm_sqr()).sum();
                out.push(self.grid.length() * s.sqrt());
                continue;
            }
            if self.active.iter().all(|&i| prof[i] == 0.0) {
                out.push(0.0);
                continue;
            }
            self.buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for &i in &self.active {
                self.buf[i] = coeff[i] * prof[i];
            }
            self.grid.inverse(&mut self.buf);
            let re: Vec<f64> = self.buf.iter().map(|z| z.re).collect();
            out.push(lp_norm_samples(self.grid, &[re], self.p)?);
        }
        Ok(out)
    }
}

/// One measured ratio.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HeatRatio {
    pub n: usize,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// `(T / (1 + alpha T))^exponent`
    pub factor: f64,
    /// `lhs / (factor * rhs)`
    pub ratio: f64,
}

/// Accumulates `int |g(t)|^r dt` per block and of a Besov value.
struct TimeAcc {
    r: f64,
    per_block: Vec<f64>,
    whole: f64,
}

impl TimeAcc {
    fn new(nb: usize, r: f64) -> TimeAcc {
        TimeAcc {
            r,
            per_block: vec![0.0; nb],
            whole: 0.0,
        }
    }

    fn add(&mut self, w: f64, blocks: &[f64], value: f64) {
        if self.r.is_infinite() {
            for (a, b) in self.per_block.iter_mut().zip(blocks) {
                *a = a.max(*b);
            }
            self.whole = self.whole.max(value);
        } else {
            for (a, b) in self.per_block.iter_mut().zip(blocks) {
                *a += w * b.powf(self.r);
            }
            self.whole += w * value.powf(self.r);
        }
    }

    fn root(&self, x: f64) -> f64 {
        if self.r.is_infinite() {
            x
        } else {
            x.powf(1.0 / self.r)
        }
    }

    fn chemin_lerner(&self, k_min: i32, spec: &NormSpec) -> f64 {
        let v: Vec<f64> = self.per_block.iter().map(|&x| self.root(x)).collect();
        besov_from_blocks(&v, k_min, spec)
    }

    fn lebesgue(&self) -> f64 {
        self.root(self.whole)
    }
}

/// Geometric panels on `[0, T]` refined towards `t = 0`.
fn graded_panels(t_end: f64, first: f64) -> Vec<(f64, f64)> {
    let first = first.min(t_end);
    let mut edges = vec![0.0, first];
    while *edges.last().expect("non-empty") < t_end {
        let next = (edges.last().expect("non-empty") * 1.5).min(t_end);
        edges.push(next);
    }
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

fn smoothing_ratio(par: &HeatParams, grid: &Grid, seed: u64) -> Result<HeatRatio> {
    let cut = DyadicCutoffs::new(grid);
    let w0 = band_limited_field(grid, seed, 0, par.band);
    let c0 = w0.comp(0);
    let mut meter = BlockMeter::new(&cut, c0, par.p);
    let rhs_spec = NormSpec::besov(par.s, par.p, par.q);
    let rhs = besov_from_blocks(&meter.blocks(c0)?, cut.k_min, &rhs_spec);
    let lhs_spec = NormSpec::besov(par.s + 2.0 * inv(par.q), par.p, 1.0);
    let rate = |i: usize| par.alpha + grid.xi_sq()[i];
    let lam_max = meter.active.iter().map(|&i| rate(i)).fold(0.0, f64::max);
    let mut acc = TimeAcc::new(cut.num_blocks(), par.q);
    let mut coeff = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut visit = |t: f64, w: f64, acc: &mut TimeAcc, meter: &mut BlockMeter| -> Result<()> {
        for &i in &meter.active {
            coeff[i] = c0[i] * (-t * rate(i)).exp();
        }
        let b = meter.blocks(&coeff)?;
        let v = besov_from_blocks(&b, cut.k_min, &lhs_spec);
        acc.add(w, &b, v);
        Ok(())
    };
    if par.q.is_infinite() {
        visit(0.0, 0.0, &mut acc, &mut meter)?;
    } else {
        for (a, b) in graded_panels(par.horizon, 1e-2 / lam_max.max(1.0)) {
            let (x, w) = gauss_legendre_on(GL_NODES, a, b);
            for (t, wt) in x.into_iter().zip(w) {
                visit(t, wt, &mut acc, &mut meter)?;
            }
        }
    }
    let lhs = acc.lebesgue();
    Ok(HeatRatio {
        n: grid.n(),
        seed,
        lhs,
        rhs,
        factor: 1.0,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
    })
}

fn forced_ratio(par: &HeatParams, grid: &Grid, seed: u64) -> Result<HeatRatio> {
    let cut = DyadicCutoffs::new(grid);
    let h = par.horizon / par.pieces as f64;
    let forcing: Vec<Field> = (0..par.pieces)
        .map(|n| band_limited_field(grid, seed, n as u64 + 1, par.band))
        .collect();
    let mut meter = BlockMeter::new(&cut, forcing[0].comp(0), par.p);
    let src_spec = NormSpec::chemin_lerner(par.s, par.p, par.q, par.m);
    let out_spec = NormSpec::chemin_lerner(par.s + 2.0 * par.theta, par.p, par.q, par.r);
    // forcing norm: constant on each piece
    let mut src = TimeAcc::new(cut.num_blocks(), par.m);
    for f in &forcing {
        let b = meter.blocks(f.comp(0))?;
        src.add(h, &b, 0.0);
    }
    let rhs = src.chemin_lerner(cut.k_min, &src_spec);

    let rate: Vec<f64> = (0..grid.len()).map(|i| par.alpha + grid.xi_sq()[i]).collect();
    let lam_max = meter.active.iter().map(|&i| rate[i]).fold(0.0, f64::max);
    // sub-panels resolve the relaxation time 1/lam_max inside each piece
    let sub = ((h * lam_max / 4.0).ceil() as usize).clamp(2, 64);
    let mut state = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut coeff = state.clone();
    let mut out = TimeAcc::new(cut.num_blocks(), par.r);
    for f in &forcing {
        let fc = f.comp(0);
        let evolve = |tau: f64, i: usize| -> Complex64 {
            let z = -tau * rate[i];
            state[i] * z.exp() + fc[i] * (tau * phi1_real(z))
        };
        for k in 0..sub {
            let (a, b) = (k as f64 * h / sub as f64, (k + 1) as f64 * h / sub as f64);
            let (x, w) = gauss_legendre_on(GL_NODES, a, b);
            for (tau, wt) in x.into_iter().zip(w) {
                for &i in &meter.active {
                    coeff[i] = evolve(tau, i);
                }
                let blocks = meter.blocks(&coeff)?;
                out.add(wt, &blocks, 0.0);
            }
            if par.r.is_infinite() {
                for &i in &meter.active {
                    coeff[i] = evolve(b, i);
                }
                let blocks = meter.blocks(&coeff)?;
                out.add(0.0, &blocks, 0.0);
            }
        }
        let next: Vec<Complex64> = meter.active.iter().map(|&i| evolve(h, i)).collect();
        for (&i, v) in meter.active.iter().zip(next) {
            state[i] = v;
        }
    }
    let lhs = out.chemin_lerner(cut.k_min, &out_spec);
    let t = par.horizon;
    let factor = (t / (1.0 + par.alpha * t)).powf(par.time_exponent());
    Ok(HeatRatio {
        n: grid.n(),
        seed,
        lhs,
        rhs,
        factor,
        ratio: if rhs > 0.0 { lhs / (factor * rhs) } else { 0.0 },
    })
}

/// Measure one ratio on a `2 pi` torus with `n` points.
pub fn heat_ratio(par: &HeatParams, n: usize, seed: u64) -> Result<HeatRatio> {
    par.validate()?;
    let grid = Grid::new(n, 2.0 * std::f64::consts::PI)?;
    if par.band > grid.band_radius() {
        return Err(EmError::InvalidParameter(format!(
            "band {} is not resolved by N = {n}",
            par.band
        )));
    }
    match par.kind {
        HeatKind::Smoothing => smoothing_ratio(par, &grid, seed),
        HeatKind::Forced => forced_ratio(par, &grid, seed),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeatStudy {
    pub params: HeatParams,
    pub samples: Vec<HeatRatio>,
    pub median: f64,
    pub max_ratio: f64,
    /// `max |ratio / median - 1|` over all samples.
    pub spread: f64,
    /// `max |ratio(N) / ratio(N_0) - 1|` over seeds, against the coarsest grid.
    pub refinement: f64,
}

impl HeatStudy {
    pub fn stable(&self, tol: f64) -> bool {
        self.max_ratio.is_finite() && self.spread <= tol && self.refinement <= tol
    }
}

/// Ratios for every grid size and seed.
pub fn heat_smoothing_check(par: &HeatParams, n_list: &[usize], seeds: &[u64]) -> Result<HeatStudy> {
    par.validate()?;
    if n_list.is_empty() || seeds.is_empty() {
        return Err(EmError::InvalidParameter("need grids and seeds".into()));
    }
    let mut samples = Vec::new();
    for &n in n_list {
        for &s in seeds {
            samples.push(heat_ratio(par, n, s)?);
        }
    }
    let mut sorted: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let spread = samples
        .iter()
        .map(|s| (s.ratio / median - 1.0).abs())
        .fold(0.0, f64::max);
    let ns = seeds.len();
    let refinement = (0..samples.len())
        .map(|k| (samples[k].ratio / samples[k % ns].ratio - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(HeatStudy {
        params: *par,
        max_ratio: lq_sum(&sorted, f64::INFINITY),
        samples,
        median,
        spread,
        refinement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panels_cover_interval() {
        let p = graded_panels(3.0, 1e-3);
        assert_eq!(p[0].0, 0.0);
        assert_eq!(p[p.len() - 1].1, 3.0);
        assert!(p.windows(2).all(|w| w[0].1 == w[1].0));
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut p = HeatParams::forced(0.0, 2.0, 2.0, 2.0, 1.5, 1.0, 0.0, 1.0);
        assert!(p.validate().is_err());
        p.r = 2.0;
        assert!(p.validate().is_ok());
        p.theta = 1.2;
        assert!(p.validate().is_err());
        assert!(HeatParams::smoothing(0.0, 0.5, 2.0, 0.0, 1.0).validate().is_err());
    }
}
