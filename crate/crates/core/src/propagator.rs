//! Exact per-mode propagation of the damped Maxwell flow and of scalar damped
//! dispersive equations, with second-order exponential time differencing for
//! sources.
//!
//! Per Fourier mode `xi != 0` write `E = e tau + g nu` with
//! `tau = (-xi2, xi1)/|xi|`, `nu = xi/|xi|`. Then
//!
//! ```text
//! d/dt (e, b) = [[-sigma c^2, -i c |xi|], [-i c |xi|, 0]] (e, b) + (G_tau, 0)
//! d/dt g      = -sigma c^2 g + G_nu
//! ```
//!
//! The 2x2 block has eigenvalues `c(-sigma c/2 +- sqrt(sigma^2 c^2/4 - |xi|^2))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::funcalc::{phi1_real, phi2_real, DampedPair, Mat2, PairFn};
use crate::spectral::{Field, Grid, PhysParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Roots of `lambda^2 + alpha lambda + |xi|^2 = 0`, i.e.
/// `-alpha/2 +- sqrt(alpha^2/4 - |xi|^2)`.
pub fn eigenvalues(xi_mag: f64, alpha: f64) -> (Complex64, Complex64) {
    let disc = 0.25 * alpha * alpha - xi_mag * xi_mag;
    if disc >= 0.0 {
        let minus = -0.5 * alpha - disc.sqrt();
        // avoid cancellation in the small root
        let plus = if minus != 0.0 {
            xi_mag * xi_mag / minus
        } else {
            0.0
        };
        (Complex64::new(plus, 0.0), Complex64::new(minus, 0.0))
    } else {
        let w = (-disc).sqrt();
        (Complex64::new(-0.5 * alpha, w), Complex64::new(-0.5 * alpha, -w))
    }
}

/// Unit vectors `(tau, nu)` of mode `idx`; an arbitrary orthonormal pair at `xi = 0`.
pub fn mode_basis(grid: &Grid, idx: usize) -> ([f64; 2], [f64; 2]) {
    let r = grid.xi_mag(idx);
    if r == 0.0 {
        ([0.0, 1.0], [1.0, 0.0])
    } else {
        let (a, b) = (grid.xi1()[idx] / r, grid.xi2()[idx] / r);
        ([-b, a], [a, b])
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Split3 {
    exp: (f64, f64),
    phi1: (f64, f64),
    phi2: (f64, f64),
}

/// Precomputed exact flow of the damped Maxwell system for one step length.
#[derive(Clone, Debug)]
pub struct ModePropagator {
    grid: Grid,
    params: PhysParams,
    dt: f64,
    splits: Vec<Split3>,
    /// `exp(-sigma c^2 dt)` on the gradient direction.
    pub grad_decay: f64,
    grad_phi1: f64,
    grad_phi2: f64,
}

/// Which function of `dt L` to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Exp,
    Phi1,
    Phi2,
}

/// Alias of [`ModePropagator::new`].
pub fn build_mode_propagator(grid: &Grid, params: &PhysParams, dt: f64) -> Result<ModePropagator> {
    ModePropagator::new(grid, params, dt)
}

impl ModePropagator {
    pub fn new(grid: &Grid, params: &PhysParams, dt: f64) -> Result<ModePropagator> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(EmError::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        let alpha = params.damping();
        let splits = (0..grid.len())
            .map(|i| {
                let pair = DampedPair::new(alpha, -params.c * grid.xi_mag(i));
                Split3 {
                    exp: pair.split(PairFn::Exp, dt),
                    phi1: pair.split(PairFn::Phi1, dt),
                    phi2: pair.split(PairFn::Phi2, dt),
                }
            })
            .collect();
        let z = -alpha * dt;
        Ok(ModePropagator {
            grid: grid.clone(),
            params: *params,
            dt,
            splits,
            grad_decay: z.exp(),
            grad_phi1: phi1_real(z),
            grad_phi2: phi2_real(z),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    fn pair(&self, idx: usize) -> DampedPair {
        DampedPair::new(self.params.damping(), -self.params.c * self.grid.xi_mag(idx))
    }

    fn coeffs(&self, idx: usize, flow: Flow) -> (f64, f64) {
        let s = &self.splits[idx];
        match flow {
            Flow::Exp => s.exp,
            Flow::Phi1 => s.phi1,
            Flow::Phi2 => s.phi2,
        }
    }

    /// Action on the solenoidal pair `(e, b)` of mode `idx`.
    #[inline]
    pub fn apply_pair(&self, idx: usize, flow: Flow, e: Complex64, b: Complex64) -> (Complex64, Complex64) {
        let (mean, dd) = self.coeffs(idx, flow);
        let half = 0.5 * self.params.damping();
        let ick = Complex64::new(0.0, -self.params.c * self.grid.xi_mag(idx));
        let h = dd * self.dt;
        let ke = -half * e + ick * b;
        let kb = ick * e + half * b;
        (mean * e + h * ke, mean * b + h * kb)
    }

    /// Scalar factor on the gradient direction.
    pub fn grad_factor(&self, flow: Flow) -> f64 {
        match flow {
            Flow::Exp => self.grad_decay,
            Flow::Phi1 => self.grad_phi1,
            Flow::Phi2 => self.grad_phi2,
        }
    }

    /// 2x2 matrix of the solenoidal block for mode `idx`.
    pub fn pair_matrix(&self, idx: usize, flow: Flow) -> Mat2 {
        let f = match flow {
            Flow::Exp => PairFn::Exp,
            Flow::Phi1 => PairFn::Phi1,
            Flow::Phi2 => PairFn::Phi2,
        };
        self.pair(idx).matrix(f, self.dt)
    }

    /// Full 3x3 matrix acting on `(E1, E2, b)` of mode `idx`.
    pub fn matrix3(&self, idx: usize, flow: Flow) -> [[Complex64; 3]; 3] {
        let (tau, nu) = mode_basis(&self.grid, idx);
        let m = self.pair_matrix(idx, flow);
        let d = self.grad_factor(flow);
        let mut out = [[ZERO; 3]; 3];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = m[0][0] * tau[r] * tau[c] + Complex64::new(d * nu[r] * nu[c], 0.0);
            }
            out[r][2] = m[0][1] * tau[r];
            out[2][r] = m[1][0] * tau[r];
        }
        out[2][2] = m[1][1];
        out
    }

    /// Apply `f(dt L)` to `(E, b)`. Returns new `(E, b)` fields.
    pub fn apply(&self, flow: Flow, e: &Field, b: &Field) -> Result<(Field, Field)> {
        e.expect_ncomp(2)?;
        b.expect_ncomp(1)?;
        if e.grid() != &self.grid || b.grid() != &self.grid {
            return Err(EmError::GridMismatch);
        }
        let n = self.grid.len();
        let (e1, e2, bb) = (e.comp(0), e.comp(1), b.comp(0));
        let mut o1 = vec![ZERO; n];
        let mut o2 = vec![ZERO; n];
        let mut ob = vec![ZERO; n];
        let d = self.grad_factor(flow);
        for i in 0..n {
            let (tau, nu) = mode_basis(&self.grid, i);
            let et = e1[i] * tau[0] + e2[i] * tau[1];
            let en = e1[i] * nu[0] + e2[i] * nu[1];
            let (ne, nb) = self.apply_pair(i, flow, et, bb[i]);
            let ng = en * d;
            o1[i] = ne * tau[0] + ng * nu[0];
            o2[i] = ne * tau[1] + ng * nu[1];
            ob[i] = nb;
        }
        Ok((Field::vector(&self.grid, o1, o2)?, Field::scalar(&self.grid, ob)?))
    }

    /// `exp(dt L) (e, b) + s1 phi1(dt L) (g0, 0) + s2 phi2(dt L) (dg, 0)`, the
    /// building block of the ETD2 step and of its dense output.
    pub fn etd2(
        &self,
        e: &Field,
        b: &Field,
        g0: Option<&Field>,
        dg: Option<&Field>,
        s1: f64,
        s2: f64,
    ) -> Result<(Field, Field)> {
        e.expect_ncomp(2)?;
        b.expect_ncomp(1)?;
        if e.grid() != &self.grid || b.grid() != &self.grid {
            return Err(EmError::GridMismatch);
        }
        for g in [g0, dg].into_iter().flatten() {
            g.expect_ncomp(2)?;
            if g.grid() != &self.grid {
                return Err(EmError::GridMismatch);
            }
        }
        let n = self.grid.len();
        let (e1, e2, bb) = (e.comp(0), e.comp(1), b.comp(0));
        let mut o1 = vec![ZERO; n];
        let mut o2 = vec![ZERO; n];
        let mut ob = vec![ZERO; n];
        let (d0, d1, d2) = (self.grad_decay, self.grad_phi1 * s1, self.grad_phi2 * s2);
        for i in 0..n {
            let (tau, nu) = mode_basis(&self.grid, i);
            let et = e1[i] * tau[0] + e2[i] * tau[1];
            let en = e1[i] * nu[0] + e2[i] * nu[1];
            let (mut ne, mut nb) = self.apply_pair(i, Flow::Exp, et, bb[i]);
            let mut ng = en * d0;
            if let Some(g) = g0 {
                let (g1, g2) = (g.comp(0)[i], g.comp(1)[i]);
                let (pe, pb) = self.apply_pair(i, Flow::Phi1, g1 * tau[0] + g2 * tau[1], ZERO);
                ne += pe * s1;
                nb += pb * s1;
                ng += (g1 * nu[0] + g2 * nu[1]) * d1;
            }
            if let Some(g) = dg {
                let (g1, g2) = (g.comp(0)[i], g.comp(1)[i]);
                let (pe, pb) = self.apply_pair(i, Flow::Phi2, g1 * tau[0] + g2 * tau[1], ZERO);
                ne += pe * s2;
                nb += pb * s2;
                ng += (g1 * nu[0] + g2 * nu[1]) * d2;
            }
            o1[i] = ne * tau[0] + ng * nu[0];
            o2[i] = ne * tau[1] + ng * nu[1];
            ob[i] = nb;
        }
        Ok((Field::vector(&self.grid, o1, o2)?, Field::scalar(&self.grid, ob)?))
    }

    /// Largest spectral radius of the one-step matrices.
    pub fn max_spectral_radius(&self) -> f64 {
        let mut worst = self.grad_decay;
        for i in 0..self.grid.len() {
            let (lp, lm) = eigenvalues(self.params.c * self.grid.xi_mag(i), self.params.damping());
            let r = (lp * self.dt).exp().norm().max((lm * self.dt).exp().norm());
            worst = worst.max(r);
        }
        worst
    }
}

/// Snapshots of a damped Maxwell evolution.
#[derive(Clone, Debug)]
pub struct MaxwellTrajectory {
    pub times: Vec<f64>,
    pub e: Vec<Field>,
    pub b: Vec<Field>,
}

/// Number of steps of length `dt` covering `t_end`; errors when `dt` does not
/// divide `t_end`.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(EmError::InvalidParameter(format!(
            "need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(EmError::InvalidParameter(format!(
            "dt = {dt} does not divide t_end = {t_end}"
        )));
    }
    Ok(n as usize)
}

/// Evolve `(E, b)` under `d/dt E = c curl B - sigma c^2 E + G`,
/// `d/dt b = -c curl E`, with `G` sampled at the step boundaries
/// (`source[n]` at `t = n dt`) and interpolated linearly in between (ETD2).
pub fn propagate_damped_maxwell(
    params: &PhysParams,
    e0: &Field,
    b0: &Field,
    source: Option<&[Field]>,
    t_end: f64,
    dt: f64,
    cadence: usize,
) -> Result<MaxwellTrajectory> {
    let steps = step_count(t_end, dt)?;
    if let Some(s) = source {
        if s.len() < steps + 1 {
            return Err(EmError::InvalidParameter(format!(
                "source needs {} samples, got {}",
                steps + 1,
                s.len()
            )));
        }
    }
    let prop = ModePropagator::new(e0.grid(), params, dt)?;
    let cadence = cadence.max(1);
    let mut e = e0.clone();
    let mut b = b0.clone();
    let mut traj = MaxwellTrajectory {
        times: vec![0.0],
        e: vec![e.clone()],
        b: vec![b.clone()],
    };
    for n in 0..steps {
        let (ne, nb) = match source {
            Some(src) => {
                let dg = src[n + 1].sub(&src[n])?;
                prop.etd2(&e, &b, Some(&src[n]), Some(&dg), dt, dt)?
            }
            None => prop.etd2(&e, &b, None, None, 0.0, 0.0)?,
        };
        e = ne;
        b = nb;
        if (n + 1) % cadence == 0 || n + 1 == steps {
            traj.times.push((n + 1) as f64 * dt);
            traj.e.push(e.clone());
            traj.b.push(b.clone());
        }
    }
    Ok(traj)
}

/// Scalar damped dispersive equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalarKind {
    /// `d/dt u = (-alpha - i |xi|^2) u + F`
    Schrodinger,
    /// `d/dt u = (-alpha + i |xi|) u + F`
    HalfWavePlus,
    /// `d/dt u = (-alpha - i |xi|) u + F`
    HalfWaveMinus,
    /// `u'' + alpha u' - Delta u = F`
    Wave,
}

/// Complex spectral state of a scalar equation. For the wave equation
/// `du` holds the time derivative.
#[derive(Clone, Debug)]
pub struct ScalarState {
    pub u: Vec<Complex64>,
    pub du: Option<Vec<Complex64>>,
}

#[derive(Clone, Debug)]
pub struct ScalarTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ScalarState>,
}

fn scalar_symbol(kind: ScalarKind, alpha: f64, r: f64) -> Complex64 {
    match kind {
        ScalarKind::Schrodinger => Complex64::new(-alpha, -r * r),
        ScalarKind::HalfWavePlus => Complex64::new(-alpha, r),
        ScalarKind::HalfWaveMinus => Complex64::new(-alpha, -r),
        ScalarKind::Wave => unreachable!(),
    }
}

/// Wave flow on `(u_hat, du_hat)` through the first-order pair
/// `(e, b) = (du, i |xi| u)` with generator `[[-alpha, i|xi|], [i|xi|, 0]]`.
/// The zero mode is integrated directly: `u' = du`, `du' = -alpha du + F`.
#[derive(Clone, Copy, Debug)]
pub struct WaveMode {
    pub alpha: f64,
    pub xi: f64,
}

impl WaveMode {
    /// `f(h L)` applied to `(u, du)` with forcing `(F, 0)` in the `du` slot.
    pub fn apply(&self, f: PairFn, h: f64, u: Complex64, du: Complex64) -> (Complex64, Complex64) {
        let i = Complex64::new(0.0, 1.0);
        if self.xi == 0.0 {
            // generator [[0, 1], [0, -alpha]] on (u, du)
            let a = self.alpha;
            let z = -a * h;
            let (f0, f1) = match f {
                PairFn::Exp => (1.0, h * phi1_real(z)),
                PairFn::Phi1 => (1.0, h * phi2_real(z)),
                PairFn::Phi2 => (0.5, h * phi3_real(z)),
                PairFn::ZExp => unreachable!(),
            };
            let d = match f {
                PairFn::Exp => z.exp(),
                PairFn::Phi1 => phi1_real(z),
                PairFn::Phi2 => phi2_real(z),
                PairFn::ZExp => unreachable!(),
            };
            return (u * f0 + du * f1, du * d);
        }
        let pair = DampedPair::new(self.alpha, self.xi);
        let m = pair.matrix(f, h);
        let e = du;
        let b = i * self.xi * u;
        let ne = m[0][0] * e + m[0][1] * b;
        let nb = m[1][0] * e + m[1][1] * b;
        (nb / (i * self.xi), ne)
    }
}

/// `phi_3(z) = (e^z - 1 - z - z^2/2) / z^3`, needed for the zero wave mode.
fn phi3_real(z: f64) -> f64 {
    if z.abs() < 1.0 {
        let mut term = 1.0 / 6.0;
        let mut acc = term;
        for j in 1..24 {
            term *= z / (j as f64 + 3.0);
            acc += term;
        }
        acc
    } else {
        (z.exp_m1() - z - 0.5 * z * z) / (z * z * z)
    }
}

/// Per-mode exact evolution of a scalar damped equation with ETD2 Duhamel
/// for a forcing sampled at step boundaries.
#[allow(clippy::too_many_arguments)]
pub fn scalar_propagator(
    kind: ScalarKind,
    alpha: f64,
    grid: &Grid,
    f: &[Complex64],
    g: Option<&[Complex64]>,
    forcing: Option<&[Vec<Complex64>]>,
    t_end: f64,
    dt: f64,
    cadence: usize,
) -> Result<ScalarTrajectory> {
    let steps = step_count(t_end, dt)?;
    if f.len() != grid.len() {
        return Err(EmError::GridMismatch);
    }
    if (kind == ScalarKind::Wave) != g.is_some() {
        return Err(EmError::InvalidParameter(
            "initial velocity is given exactly for the wave equation".into(),
        ));
    }
    if let Some(fs) = forcing {
        if fs.len() < steps + 1 {
            return Err(EmError::InvalidParameter(
                "forcing needs steps + 1 samples".into(),
            ));
        }
    }
    let cadence = cadence.max(1);
    let n = grid.len();
    let mut u = f.to_vec();
    let mut du = g.map(|v| v.to_vec());
    let mut traj = ScalarTrajectory {
        times: vec![0.0],
        states: vec![ScalarState {
            u: u.clone(),
            du: du.clone(),
        }],
    };
    // per-mode step coefficients
    match kind {
        ScalarKind::Wave => {
            let modes: Vec<WaveMode> = (0..n)
                .map(|i| WaveMode {
                    alpha,
                    xi: grid.xi_mag(i),
                })
                .collect();
            let du = du.as_mut().expect("checked above");
            for s in 0..steps {
                for i in 0..n {
                    let (mut a, mut b) = modes[i].apply(PairFn::Exp, dt, u[i], du[i]);
                    if let Some(fs) = forcing {
                        let f0 = fs[s][i];
                        let df = fs[s + 1][i] - f0;
                        let (p1u, p1d) = modes[i].apply(PairFn::Phi1, dt, ZERO, f0);
                        let (p2u, p2d) = modes[i].apply(PairFn::Phi2, dt, ZERO, df);
                        a += (p1u + p2u) * dt;
                        b += (p1d + p2d) * dt;
                    }
                    u[i] = a;
                    du[i] = b;
                }
                if (s + 1) % cadence == 0 || s + 1 == steps {
                    traj.times.push((s + 1) as f64 * dt);
                    traj.states.push(ScalarState {
                        u: u.clone(),
                        du: Some(du.clone()),
                    });
                }
            }
        }
        _ => {
            let coef: Vec<(Complex64, Complex64, Complex64)> = (0..n)
                .map(|i| {
                    let z = scalar_symbol(kind, alpha, grid.xi_mag(i)) * dt;
                    (z.exp(), crate::funcalc::phi1(z), crate::funcalc::phi2(z))
                })
                .collect();
            for s in 0..steps {
                for i in 0..n {
                    let (ex, p1, p2) = coef[i];
                    let mut v = ex * u[i];
                    if let Some(fs) = forcing {
                        let f0 = fs[s][i];
                        v += dt * (p1 * f0 + p2 * (fs[s + 1][i] - f0));
                    }
                    u[i] = v;
                }
                if (s + 1) % cadence == 0 || s + 1 == steps {
                    traj.times.push((s + 1) as f64 * dt);
                    traj.states.push(ScalarState {
                        u: u.clone(),
                        du: None,
                    });
                }
            }
        }
    }
    Ok(traj)
}

/// Exact homogeneous solution of a scalar equation at an arbitrary time.
pub fn scalar_evolve(kind: ScalarKind, alpha: f64, grid: &Grid, state: &ScalarState, t: f64) -> ScalarState {
    let n = grid.len();
    match kind {
        ScalarKind::Wave => {
            let du0 = state.du.as_ref().expect("wave state carries a velocity");
            let mut u = vec![ZERO; n];
            let mut du = vec![ZERO; n];
            for i in 0..n {
                let m = WaveMode {
                    alpha,
                    xi: grid.xi_mag(i),
                };
                let (a, b) = m.apply(PairFn::Exp, t, state.u[i], du0[i]);
                u[i] = a;
                du[i] = b;
            }
            ScalarState { u, du: Some(du) }
        }
        _ => ScalarState {
            u: (0..n)
                .map(|i| (scalar_symbol(kind, alpha, grid.xi_mag(i)) * t).exp() * state.u[i])
                .collect(),
            du: None,
        },
    }
}

/// Time-dependent multipliers of the damped wave representation, with the
/// heat-type compensating factors `exp(A t |xi|^2 / alpha)` and `exp(A t alpha)`.
#[derive(Clone, Debug)]
pub struct WaveMultipliers {
    pub t: f64,
    pub alpha: f64,
    pub a: f64,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    pub m2_plus: Vec<Complex64>,
    pub m2_minus: Vec<Complex64>,
    pub m3: Vec<f64>,
}

/// Divided differences at `lambda_+-`: returns
/// `((e^{t l+} - e^{t l-})/(l+ - l-), (l+ e^{t l+} - l- e^{t l-})/(l+ - l-))`.
pub fn wave_divided_differences(xi: f64, alpha: f64, t: f64) -> (f64, f64) {
    let m = -0.5 * alpha * t;
    let w = t * t * (0.25 * alpha * alpha - xi * xi);
    let (_, dd_exp) = crate::funcalc::pair_split(PairFn::Exp, m, w);
    let (_, dd_zexp) = crate::funcalc::pair_split(PairFn::ZExp, m, w);
    (t * dd_exp, dd_zexp)
}

impl WaveMultipliers {
    /// Evaluate on a list of frequencies `|xi|`. `m2_plus` and `m2_minus` are
    /// singular on `|xi| = alpha/2` and at `xi = 0`; they are returned as
    /// non-finite values there.
    pub fn new(xi: &[f64], t: f64, alpha: f64, a: f64) -> Result<WaveMultipliers> {
        if !(alpha > 0.0) {
            return Err(EmError::InvalidParameter("multipliers need alpha > 0".into()));
        }
        let mut out = WaveMultipliers {
            t,
            alpha,
            a,
            m1: vec![],
            m2: vec![],
            m2_plus: vec![],
            m2_minus: vec![],
            m3: vec![],
        };
        for &r in xi {
            let heat = (a * t * r * r / alpha).exp();
            let (d1, d2) = wave_divided_differences(r, alpha, t);
            out.m1.push(d1 * heat);
            out.m2.push(d2 * heat);
            out.m3.push((-alpha * d1 - d2) * heat);
            let (lp, lm) = eigenvalues(r, alpha);
            let gap = lp - lm;
            out.m2_plus.push((lp * t).exp() * lp / (gap * r * r) * heat);
            out.m2_minus
                .push((lm * t).exp() * lm / gap * (a * t * alpha).exp());
        }
        Ok(out)
    }

    pub fn on_grid(grid: &Grid, t: f64, alpha: f64, a: f64) -> Result<WaveMultipliers> {
        let xi: Vec<f64> = (0..grid.len()).map(|i| grid.xi_mag(i)).collect();
        WaveMultipliers::new(&xi, t, alpha, a)
    }
}
