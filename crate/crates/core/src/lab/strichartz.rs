//! Space-time norms of dyadically localised damped dispersive flows.
//!
//! For data in the shell `|xi| ~ 2^j` the ratio
//! `||Delta_j v||_{L^q(0,T; L^r)} / ||Delta_j v(0)||_{L^2}` is computed from
//! the exact per-mode solution, where `v` is `u` for the Schrodinger and
//! half-wave flows, `(d_t u, grad u)` for the wave equation and `(E, b)` for
//! Maxwell. Its growth in `2^j` and in `T / (1 + alpha T)` is then fitted.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::funcalc::PairFn;
use crate::lab::fit::{crossover_fit, CrossoverFit, DecayFit};
use crate::lp::{chi, phi};
use crate::propagator::{eigenvalues, ModePropagator, WaveMode};
use crate::spectral::{Field, Grid, PhysParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const DIM: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquationKind {
    Schrodinger,
    HalfWave,
    Wave,
    Maxwell,
}

impl EquationKind {
    /// Decay rate `sigma` of the dispersive bound `|t - s|^{-sigma}` in 2D.
    pub fn dispersion_sigma(self) -> f64 {
        match self {
            EquationKind::Schrodinger => DIM / 2.0,
            _ => (DIM - 1.0) / 2.0,
        }
    }
}

fn inv(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// `(q, r) in [1, inf] x [2, inf]` with `1/q + s/r >= s/2`, `1/2 + s/r >= s/2`
/// and `(r, s) != (inf, 1)`.
pub fn admissible(sigma: f64, q: f64, r: f64) -> bool {
    q >= 1.0
        && r >= 2.0
        && inv(q) + sigma * inv(r) >= sigma / 2.0 - 1e-14
        && 0.5 + sigma * inv(r) >= sigma / 2.0 - 1e-14
        && !(r.is_infinite() && (sigma - 1.0).abs() < 1e-14)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StrichartzSpec {
    pub kind: EquationKind,
    pub q: f64,
    pub r: f64,
    pub q_tilde: Option<f64>,
    pub r_tilde: Option<f64>,
    pub j: i32,
    pub alpha: f64,
    pub horizon: f64,
}

impl StrichartzSpec {
    pub fn new(kind: EquationKind, q: f64, r: f64, j: i32, alpha: f64, horizon: f64) -> StrichartzSpec {
        StrichartzSpec {
            kind,
            q,
            r,
            q_tilde: None,
            r_tilde: None,
            j,
            alpha,
            horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.kind.dispersion_sigma();
        if !admissible(s, self.q, self.r) {
            return Err(EmError::InvalidParameter(format!(
                "(q, r) = ({}, {}) is not admissible",
                self.q, self.r
            )));
        }
        match (self.q_tilde, self.r_tilde) {
            (Some(qt), Some(rt)) => {
                if !admissible(s, qt, rt) {
                    return Err(EmError::InvalidParameter(format!(
                        "(q~, r~) = ({qt}, {rt}) is not admissible"
                    )));
                }
                if inv(self.q) + inv(qt) > 1.0 + 1e-14 {
                    return Err(EmError::InvalidParameter(format!(
                        "1/q + 1/q~ must not exceed 1 (q = {}, q~ = {qt})",
                        self.q
                    )));
                }
            }
            (None, None) => {}
            _ => {
                return Err(EmError::InvalidParameter("give both q~ and r~ or neither".into()));
            }
        }
        if !(self.alpha >= 0.0) || !(self.horizon > 0.0) {
            return Err(EmError::InvalidParameter("need alpha >= 0 and T > 0".into()));
        }
        if self.kind == EquationKind::Maxwell && self.alpha <= 0.0 {
            return Err(EmError::InvalidParameter(
                "the Maxwell flow needs alpha > 0".into(),
            ));
        }
        Ok(())
    }

    /// Exponent of `T / (1 + alpha T)`: `1/q + sigma (1/r - 1/2)`.
    pub fn time_exponent(&self) -> f64 {
        inv(self.q) + self.kind.dispersion_sigma() * (inv(self.r) - 0.5)
    }

    /// Exponent of `2^j`.
    pub fn frequency_exponent(&self) -> f64 {
        match self.kind {
            EquationKind::Schrodinger => DIM * (0.5 - inv(self.r)) - 2.0 * inv(self.q),
            _ => (DIM + 1.0) / 2.0 * (0.5 - inv(self.r)),
        }
    }
}

/// Initial data of a Strichartz measurement, as spectral coefficients.
#[derive(Clone, Debug)]
pub enum StrichartzData {
    /// Schrodinger or half-wave data `f`.
    Scalar(Vec<Complex64>),
    /// Wave data `(u(0), d_t u(0)) = (f, g)`.
    Wave { f: Vec<Complex64>, g: Vec<Complex64> },
    /// Maxwell data `(E, b)` and the speed of light; `sigma = alpha / c^2`.
    Maxwell { e: Field, b: Field, c: f64 },
}

/// Time samples and norms of a measurement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrichartzProfile {
    pub times: Vec<f64>,
    /// `||Delta_j v(t)||_{L^r}`
    pub values: Vec<f64>,
    /// `||Delta_j v||_{L^q(0, t; L^r)}` at each sample time
    pub cumulative: Vec<f64>,
    /// `||Delta_j v(0)||_{L^2}`
    pub denominator: f64,
    pub ratio: Vec<f64>,
}

/// `phi(2^-j |xi|)` on the lattice, zero on the Nyquist lines.
pub fn block_symbol(grid: &Grid, j: i32) -> Vec<f64> {
    let s = 2f64.powi(-j);
    (0..grid.len())
        .map(|i| {
            if grid.is_nyquist(i) {
                0.0
            } else {
                let r = grid.xi_mag(i);
                if r > 0.0 {
                    phi(s * r)
                } else {
                    0.0
                }
            }
        })
        .collect()
}

/// Reusable buffers for evaluating `||v||_{L^r}` of multi-component
/// complex fields.
struct Evaluator {
    grid: Grid,
    block: Vec<f64>,
    active: Vec<usize>,
    bufs: Vec<Vec<Complex64>>,
    r: f64,
}

impl Evaluator {
    fn new(grid: &Grid, j: i32, r: f64, ncomp: usize, support: &[bool]) -> Evaluator {
        let block = block_symbol(grid, j);
        let active = (0..grid.len())
            .filter(|&i| block[i] != 0.0 && support[i])
            .collect();
        Evaluator {
            grid: grid.clone(),
            block,
            active,
            bufs: vec![vec![ZERO; grid.len()]; ncomp],
            r,
        }
    }

    /// `fill(i)` returns the spectral components of `v` at mode `i`.
    fn norm<F: FnMut(usize) -> [Complex64; 3]>(&mut self, mut fill: F) -> f64 {
        let nc = self.bufs.len();
        for b in self.bufs.iter_mut() {
            b.iter_mut().for_each(|z| *z = ZERO);
        }
        for &i in &self.active {
            let v = fill(i);
            for c in 0..nc {
                self.bufs[c][i] = v[c] * self.block[i];
            }
        }
        for b in self.bufs.iter_mut() {
            self.grid.inverse(b);
        }
        let n = self.grid.len();
        let modulus = |k: usize, bufs: &[Vec<Complex64>]| -> f64 {
            bufs.iter().map(|b| b[k].norm_sqr()).sum::<f64>().sqrt()
        };
        if self.r.is_infinite() {
            (0..n).map(|k| modulus(k, &self.bufs)).fold(0.0, f64::max)
        } else {
            let da = self.grid.dx() * self.grid.dx();
            ((0..n).map(|k| modulus(k, &self.bufs).powf(self.r)).sum::<f64>() * da).powf(1.0 / self.r)
        }
    }

    /// `||v||_{L^2}` via Parseval.
    fn l2<F: FnMut(usize) -> [Complex64; 3]>(&self, mut fill: F) -> f64 {
        let nc = self.bufs.len();
        let mut s = 0.0;
        for &i in &self.active {
            let v = fill(i);
            for z in v.iter().take(nc) {
                s += (z * self.block[i]).norm_sqr();
            }
        }
        self.grid.length() * s.sqrt()
    }
}

fn support_of(grid: &Grid, parts: &[&[Complex64]]) -> Vec<bool> {
    (0..grid.len())
        .map(|i| parts.iter().any(|p| p[i] != ZERO))
        .collect()
}

fn accumulate(times: &[f64], values: &[f64], q: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for k in 0..times.len() {
        if q.is_infinite() {
            acc = f64::max(acc, values[k]);
            out.push(acc);
        } else {
            if k > 0 {
                acc += 0.5 * (values[k].powf(q) + values[k - 1].powf(q)) * (times[k] - times[k - 1]);
            }
            out.push(acc.powf(1.0 / q));
        }
    }
    out
}

/// Run the exact flow of `spec.kind` from `data`, sampled at `times`
/// (increasing, starting at 0), and accumulate the space-time norm.
pub fn measure_strichartz(
    spec: &StrichartzSpec,
    grid: &Grid,
    data: &StrichartzData,
    times: &[f64],
) -> Result<StrichartzProfile> {
    spec.validate()?;
    if times.is_empty() || times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EmError::InvalidParameter(
            "sample times must increase strictly from 0".into(),
        ));
    }
    let alpha = spec.alpha;
    let xi = |i: usize| (grid.xi1()[i], grid.xi2()[i], grid.xi_mag(i));
    let i_unit = Complex64::new(0.0, 1.0);
    let (values, denominator) = match (spec.kind, data) {
        (EquationKind::Schrodinger | EquationKind::HalfWave, StrichartzData::Scalar(f)) => {
            if f.len() != grid.len() {
                return Err(EmError::GridMismatch);
            }
            let sup = support_of(grid, &[f]);
            let mut ev = Evaluator::new(grid, spec.j, spec.r, 1, &sup);
            let symbol = |r: f64| -> Complex64 {
                if spec.kind == EquationKind::Schrodinger {
                    Complex64::new(-alpha, -r * r)
                } else {
                    Complex64::new(-alpha, r)
                }
            };
            let den = ev.l2(|i| [f[i], ZERO, ZERO]);
            let vals = times
                .iter()
                .map(|&t| ev.norm(|i| [(symbol(xi(i).2) * t).exp() * f[i], ZERO, ZERO]))
                .collect();
            (vals, den)
        }
        (EquationKind::Wave, StrichartzData::Wave { f, g }) => {
            if f.len() != grid.len() || g.len() != grid.len() {
                return Err(EmError::GridMismatch);
            }
            let sup = support_of(grid, &[f, g]);
            let mut ev = Evaluator::new(grid, spec.j, spec.r, 3, &sup);
            let obs = |i: usize, u: Complex64, du: Complex64| -> [Complex64; 3] {
                let (a, b, _) = xi(i);
                [du, i_unit * a * u, i_unit * b * u]
            };
            let den = ev.l2(|i| obs(i, f[i], g[i]));
            let vals = times
                .iter()
                .map(|&t| {
                    ev.norm(|i| {
                        let m = WaveMode { alpha, xi: xi(i).2 };
                        let (u, du) = m.apply(PairFn::Exp, t, f[i], g[i]);
                        obs(i, u, du)
                    })
                })
                .collect();
            (vals, den)
        }
        (EquationKind::Maxwell, StrichartzData::Maxwell { e, b, c }) => {
            e.expect_ncomp(2)?;
            b.expect_ncomp(1)?;
            if e.grid() != grid || b.grid() != grid {
                return Err(EmError::GridMismatch);
            }
            let params = PhysParams::new(*c, alpha / (c * c));
            let sup = support_of(grid, &[e.comp(0), e.comp(1), b.comp(0)]);
            let mut ev = Evaluator::new(grid, spec.j, spec.r, 3, &sup);
            let den = ev.l2(|i| [e.comp(0)[i], e.comp(1)[i], b.comp(0)[i]]);
            let mut vals = Vec::with_capacity(times.len());
            for &t in times {
                let (et, bt) = if t == 0.0 {
                    (e.clone(), b.clone())
                } else {
                    ModePropagator::new(grid, &params, t)?.apply(crate::propagator::Flow::Exp, e, b)?
                };
                vals.push(ev.norm(|i| [et.comp(0)[i], et.comp(1)[i], bt.comp(0)[i]]));
            }
            (vals, den)
        }
        _ => {
            return Err(EmError::InvalidParameter(
                "initial data do not match the equation kind".into(),
            ))
        }
    };
    if !(denominator > 0.0) {
        return Err(EmError::InvalidParameter(
            "data vanish on the dyadic block".into(),
        ));
    }
    let cumulative = accumulate(times, &values, spec.q);
    let ratio = cumulative.iter().map(|v| v / denominator).collect();
    Ok(StrichartzProfile {
        times: times.to_vec(),
        values,
        cumulative,
        denominator,
        ratio,
    })
}

/// Wave data concentrated in the shell `2^j`, angularly restricted to
/// `|arg xi| < delta` (all directions when `delta >= pi`), on the outgoing
/// eigenmode `g = lambda_+ f`.
pub fn shell_wave_data(grid: &Grid, j: i32, alpha: f64, delta: f64) -> StrichartzData {
    let block = block_symbol(grid, j);
    let mut f = vec![ZERO; grid.len()];
    let mut g = vec![ZERO; grid.len()];
    for i in 0..grid.len() {
        if block[i] == 0.0 {
            continue;
        }
        let w = if delta >= PI {
            1.0
        } else {
            chi(grid.xi2()[i].atan2(grid.xi1()[i]).abs() / delta)
        };
        if w == 0.0 {
            continue;
        }
        let v = Complex64::new(block[i] * w, 0.0);
        f[i] = v;
        g[i] = eigenvalues(grid.xi_mag(i), alpha).0 * v;
    }
    StrichartzData::Wave { f, g }
}

/// `n` points `[0, s_0 h, s_0 h rho, ...]` up to `top`, with a geometric ratio
/// fixed by `per_decade`.
pub fn geometric_times(first: f64, top: f64, per_decade: usize) -> Vec<f64> {
    let decades = (top / first).log10();
    let n = (decades * per_decade as f64).ceil().max(1.0) as usize;
    let mut t = vec![0.0];
    for k in 0..=n {
        t.push(first * (top / first).powf(k as f64 / n as f64));
    }
    t
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrequencyLawReport {
    pub kind: EquationKind,
    pub alpha: f64,
    pub q: f64,
    pub r: f64,
    pub horizon: f64,
    pub n: usize,
    pub j: Vec<i32>,
    pub ratio: Vec<f64>,
    /// `log2 ratio` against `j`.
    pub fit: DecayFit,
    pub predicted: f64,
}

/// Ratios at `T = horizon` for shells `j_list` on the `2 pi` torus with
/// `n` points, using focusing wave data on the outgoing eigenmode.
pub fn wave_frequency_law(
    alpha: f64,
    q: f64,
    r: f64,
    j_list: &[i32],
    n: usize,
    horizon: f64,
) -> Result<FrequencyLawReport> {
    let grid = Grid::new(n, 2.0 * PI)?;
    let mut ratios = Vec::new();
    let mut predicted = 0.0;
    for &j in j_list {
        let spec = StrichartzSpec::new(EquationKind::Wave, q, r, j, alpha, horizon);
        predicted = spec.frequency_exponent();
        let data = shell_wave_data(&grid, j, alpha, PI);
        // identical sampling in the scaled time 2^j t for every shell
        let scale = 2f64.powi(-j);
        let mut times: Vec<f64> = geometric_times(1e-2, horizon / scale, 24)
            .into_iter()
            .map(|s| s * scale)
            .collect();
        *times.last_mut().expect("non-empty") = horizon;
        let prof = measure_strichartz(&spec, &grid, &data, &times)?;
        ratios.push(prof.ratio[prof.ratio.len() - 1]);
    }
    let fit = DecayFit::new(
        j_list.iter().map(|&j| j as f64).collect(),
        ratios.iter().map(|v| v.log2()).collect(),
    )?;
    Ok(FrequencyLawReport {
        kind: EquationKind::Wave,
        alpha,
        q,
        r,
        horizon,
        n,
        j: j_list.to_vec(),
        ratio: ratios,
        fit,
        predicted,
    })
}

/// Settings of the damping crossover measurement. The torus and the shell
/// are scaled together: the shell radius is `shell_over_alpha * alpha` and
/// the torus side is `scaled_length` shell wavelengths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossoverSettings {
    pub n: usize,
    pub scaled_length: f64,
    pub shell_over_alpha: f64,
    pub deltas: Vec<f64>,
    pub per_decade: usize,
    /// Window `alpha T in [lo, hi]` of the short-time fit, with `lo` given in
    /// units of `alpha / 2^j`.
    pub small_lo_scaled: f64,
    pub small_hi: f64,
    pub large_min: f64,
    pub t_max_alpha: f64,
}

impl Default for CrossoverSettings {
    fn default() -> Self {
        let m = 14;
        CrossoverSettings {
            n: 1024,
            scaled_length: 2.0 * PI * 144.0,
            shell_over_alpha: 4096.0,
            deltas: (0..m)
                .map(|k| PI * (0.04 / PI).powf(k as f64 / (m - 1) as f64))
                .collect(),
            per_decade: 18,
            small_lo_scaled: 64.0,
            small_hi: 0.1,
            large_min: 4.0,
            t_max_alpha: 30.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossoverReport {
    pub alpha: f64,
    pub j: i32,
    pub length: f64,
    pub q: f64,
    pub r: f64,
    pub times: Vec<f64>,
    /// Largest ratio over the angular family at each time.
    pub ratio: Vec<f64>,
    /// Angular width attaining it.
    pub argmax_delta: Vec<f64>,
    pub fit: CrossoverFit,
    pub predicted_small: f64,
    pub predicted_large: f64,
}

/// Time growth of the wave Strichartz ratio across `alpha T ~ 1`.
pub fn wave_damping_crossover(
    alpha: f64,
    q: f64,
    r: f64,
    set: &CrossoverSettings,
) -> Result<CrossoverReport> {
    if !(alpha > 0.0) {
        return Err(EmError::InvalidParameter("crossover needs alpha > 0".into()));
    }
    let j = (set.shell_over_alpha * alpha).log2().round() as i32;
    let shell = 2f64.powi(j);
    let length = set.scaled_length / shell;
    let grid = Grid::new(set.n, length)?;
    let t_max = set.t_max_alpha / alpha;
    let spec = StrichartzSpec::new(EquationKind::Wave, q, r, j, alpha, t_max);
    spec.validate()?;
    let times: Vec<f64> = geometric_times(1e-2, t_max * shell, set.per_decade)
        .into_iter()
        .map(|s| s / shell)
        .collect();
    let mut best = vec![0.0; times.len()];
    let mut arg = vec![0.0; times.len()];
    for &d in &set.deltas {
        let data = shell_wave_data(&grid, j, alpha, d);
        let prof = measure_strichartz(&spec, &grid, &data, &times)?;
        for k in 0..times.len() {
            if prof.ratio[k] > best[k] {
                best[k] = prof.ratio[k];
                arg[k] = d;
            }
        }
    }
    let lo = set.small_lo_scaled * alpha / shell;
    let (tt, rr): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(best.iter())
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, r)| (*t, *r))
        .unzip();
    let fit = crossover_fit(alpha, &tt, &rr, (lo, set.small_hi), set.large_min)?;
    Ok(CrossoverReport {
        alpha,
        j,
        length,
        q,
        r,
        times,
        ratio: best,
        argmax_delta: arg,
        fit,
        predicted_small: spec.time_exponent(),
        predicted_large: 0.0,
    })
}
