//! Time integration of the 2D Euler-Maxwell system in vorticity form and of
//! its magnetohydrodynamic limit.
//!
//! Unknowns are `(omega, E, b)`. With `u = BS(omega)`, `W = P(u x B)` and
//! Ohm's law `j = sigma (c E + W)`:
//!
//! ```text
//! d/dt omega = nu Lap omega - u . grad omega - j . grad b
//! d/dt E     = c curl b - sigma c^2 E - sigma c W
//! d/dt b     = -c curl E
//! ```
//!
//! The linear part is applied exactly (`ModePropagator` for `(E, b)`, a
//! diagonal factor for the viscosity) and the remaining terms are advanced with
//! the two-stage exponential Runge-Kutta scheme of Cox and Matthews.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::funcalc::{phi1_real, phi2_real};
use crate::propagator::ModePropagator;
use crate::quadrature::gauss_legendre_on;
use crate::spectral::{
    biot_savart, cross_normal, grad_dot, leray_project, lp_norm, lp_norm_samples, Field, Grid, PhysParams,
};

/// Vorticity, in-plane electric field and normal magnetic component.
#[derive(Clone, Debug)]
pub struct NormalEMState {
    pub omega: Field,
    pub e: Field,
    pub b: Field,
    pub time: f64,
}

impl NormalEMState {
    pub fn new(omega: Field, e: Field, b: Field, time: f64) -> Result<NormalEMState> {
        omega.expect_ncomp(1)?;
        e.expect_ncomp(2)?;
        b.expect_ncomp(1)?;
        omega.same_grid(&e)?;
        omega.same_grid(&b)?;
        Ok(NormalEMState { omega, e, b, time })
    }

    pub fn zeros(grid: &Grid) -> NormalEMState {
        NormalEMState {
            omega: Field::zeros(grid, 1),
            e: Field::zeros(grid, 2),
            b: Field::zeros(grid, 1),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.omega.grid()
    }

    pub fn velocity(&self) -> Result<Field> {
        biot_savart(&self.omega)
    }

    /// `||u||^2 + ||E||^2 + ||B||^2`.
    pub fn energy(&self) -> Result<f64> {
        let u = self.velocity()?.l2_norm();
        Ok(u * u + self.e.l2_norm().powi(2) + self.b.l2_norm().powi(2))
    }

    pub fn is_finite(&self) -> bool {
        [&self.omega, &self.e, &self.b].iter().all(|f| {
            f.comps()
                .iter()
                .flatten()
                .all(|z| z.re.is_finite() && z.im.is_finite())
        })
    }

    /// Same state with every nonlinear coefficient restricted to the S_n ball.
    pub fn truncated(&self, params: &PhysParams) -> NormalEMState {
        match params.cutoff_radius() {
            Some(r) => NormalEMState {
                omega: self.omega.truncate_radius(r),
                e: self.e.truncate_radius(r),
                b: self.b.truncate_radius(r),
                time: self.time,
            },
            None => self.clone(),
        }
    }
}

/// `P(u x B)` without its mean.
fn lorentz_w(u: &Field, b: &Field) -> Result<Field> {
    Ok(leray_project(&cross_normal(u, b)?)?.without_mean())
}

/// Ohm's law `j = sigma (c E + P(u x B))`; the constant mode of `u x B` is
/// dropped so that `j` has zero mean like every other unknown.
pub fn ohm_current(state: &NormalEMState, params: &PhysParams) -> Result<Field> {
    let u = state.velocity()?;
    let w = lorentz_w(&u, &state.b)?;
    Ok(state.e.scale(params.c).add(&w)?.scale(params.sigma))
}

fn mask(f: Field, params: &PhysParams) -> Field {
    match params.cutoff_radius() {
        Some(r) => f.truncate_radius(r),
        None => f,
    }
}

/// `-u . grad omega - j . grad b + nu Lap omega`, restricted to the cutoff ball.
pub fn rhs_vorticity(state: &NormalEMState, params: &PhysParams) -> Result<Field> {
    let u = state.velocity()?;
    let j = ohm_current(state, params)?;
    let adv = grad_dot(&u, &state.omega)?;
    let lor = grad_dot(&j, &state.b)?;
    let mut r = adv.add(&lor)?.scale(-1.0);
    if params.nu > 0.0 {
        r = r.axpy(params.nu, &state.omega.laplacian())?;
    }
    Ok(mask(r, params))
}

/// Explicit terms at one state.
struct Explicit {
    n_omega: Field,
    n_e: Field,
    w: Field,
    j: Field,
    max_u: f64,
}

fn explicit_terms(omega: &Field, e: &Field, b: &Field, params: &PhysParams) -> Result<Explicit> {
    let u = biot_savart(omega)?;
    let w = lorentz_w(&u, b)?;
    let j = e.scale(params.c).add(&w)?.scale(params.sigma);
    let n_omega = grad_dot(&u, omega)?.add(&grad_dot(&j, b)?)?.scale(-1.0);
    let n_e = w.scale(-params.sigma * params.c);
    let max_u = lp_norm(&u, f64::INFINITY)?;
    Ok(Explicit {
        n_omega: mask(n_omega, params),
        n_e: mask(n_e, params),
        w,
        j,
        max_u,
    })
}

/// Per-mode scalar exponential integrator factors for `d/dt y = -rate(xi) y + N`.
#[derive(Clone, Debug)]
pub struct DiagonalFlow {
    exp: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

impl DiagonalFlow {
    /// `rate` receives `|xi|^2`.
    pub fn new<F: Fn(f64) -> f64>(grid: &Grid, rate: F, h: f64) -> DiagonalFlow {
        let mut out = DiagonalFlow {
            exp: Vec::with_capacity(grid.len()),
            p1: Vec::with_capacity(grid.len()),
            p2: Vec::with_capacity(grid.len()),
        };
        for &x in grid.xi_sq() {
            let z = -rate(x) * h;
            out.exp.push(z.exp());
            out.p1.push(phi1_real(z));
            out.p2.push(phi2_real(z));
        }
        out
    }

    /// `exp(hL) y + s1 phi1(hL) n0 + s2 phi2(hL) dn`.
    pub fn etd2(&self, y: &Field, n0: Option<&Field>, dn: Option<&Field>, s1: f64, s2: f64) -> Field {
        y.map_coeffs(|c, i, z| {
            let mut v = z * self.exp[i];
            if let Some(n) = n0 {
                v += n.comp(c)[i] * (s1 * self.p1[i]);
            }
            if let Some(d) = dn {
                v += d.comp(c)[i] * (s2 * self.p2[i]);
            }
            v
        })
    }
}

/// Space-time integrals accumulated over steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepIntegrals {
    /// `int ||j||_2^2 dt`
    pub j_sq: f64,
    /// `int ||E||_2^2 dt`
    pub e_sq: f64,
    /// `int ||grad E||_2^2 dt`
    pub grad_e_sq: f64,
    /// `int ||grad b||_inf^2 dt`
    pub grad_b_inf_sq: f64,
    /// `int ||grad b||_2^2 dt`
    pub grad_b_sq: f64,
}

impl StepIntegrals {
    pub fn add(&self, o: &StepIntegrals) -> StepIntegrals {
        StepIntegrals {
            j_sq: self.j_sq + o.j_sq,
            e_sq: self.e_sq + o.e_sq,
            grad_e_sq: self.grad_e_sq + o.grad_e_sq,
            grad_b_inf_sq: self.grad_b_inf_sq + o.grad_b_inf_sq,
            grad_b_sq: self.grad_b_sq + o.grad_b_sq,
        }
    }

    pub fn sub(&self, o: &StepIntegrals) -> StepIntegrals {
        StepIntegrals {
            j_sq: self.j_sq - o.j_sq,
            e_sq: self.e_sq - o.e_sq,
            grad_e_sq: self.grad_e_sq - o.grad_e_sq,
            grad_b_inf_sq: self.grad_b_inf_sq - o.grad_b_inf_sq,
            grad_b_sq: self.grad_b_sq - o.grad_b_sq,
        }
    }
}

/// Gauss-Legendre nodes per step for the dense-output integrals.
pub fn dense_nodes(damping: f64, h: f64) -> usize {
    ((damping * h).ceil() as usize + 4).clamp(4, 24)
}

/// Courant limit `0.5 dx / max|u|`.
pub fn cfl_limit(grid: &Grid, max_u: f64) -> f64 {
    if max_u > 0.0 {
        0.5 * grid.dx() / max_u
    } else {
        f64::INFINITY
    }
}

fn grad_sq_l2(f: &Field) -> f64 {
    f.hdot_norm(1.0).powi(2)
}

fn grad_inf(b: &Field) -> Result<f64> {
    let g = b.gradient()?;
    lp_norm_samples(b.grid(), &g.to_physical(), f64::INFINITY)
}

/// Divergence diagnostics of one step.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct StructureDefects {
    /// Spectral l2 norm of `xi . E_hat`, relative to `||E||`.
    pub div_e: f64,
    /// Same for `j`.
    pub div_j: f64,
    /// Out-of-plane components `u3, E3, B1, B2`; identically absent.
    pub suppressed: f64,
}

fn rel_div(f: &Field) -> Result<f64> {
    let d = f.divergence()?;
    let scale = f.hdot_norm(1.0);
    let n = d.l2_norm();
    Ok(if scale > 0.0 { n / scale } else { n })
}

/// Fixed-step integrator for the full system.
#[derive(Clone, Debug)]
pub struct Solver {
    pub params: PhysParams,
    pub dt: f64,
    grid: Grid,
    maxwell: ModePropagator,
    visc: DiagonalFlow,
    nodes: Vec<(f64, f64, ModePropagator, DiagonalFlow)>,
}

/// Result of one step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: NormalEMState,
    pub integrals: StepIntegrals,
    pub defects: StructureDefects,
    pub cfl: f64,
}

impl Solver {
    pub fn new(grid: &Grid, params: &PhysParams, dt: f64) -> Result<Solver> {
        params.validate()?;
        let maxwell = ModePropagator::new(grid, params, dt)?;
        let nu = params.nu;
        let visc = DiagonalFlow::new(grid, |x| nu * x, dt);
        let m = dense_nodes(params.damping(), dt);
        let (th, wt) = gauss_legendre_on(m, 0.0, 1.0);
        let nodes = th
            .iter()
            .zip(wt.iter())
            .map(|(&t, &w)| {
                Ok((
                    t,
                    w,
                    ModePropagator::new(grid, params, t * dt)?,
                    DiagonalFlow::new(grid, |x| nu * x, t * dt),
                ))
            })
            .collect::<Result<_>>()?;
        Ok(Solver {
            params: *params,
            dt,
            grid: grid.clone(),
            maxwell,
            visc,
            nodes,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// One exponential RK2 step.
    pub fn step(&self, state: &NormalEMState) -> Result<StepOutcome> {
        let h = self.dt;
        let p = &self.params;
        let n0 = explicit_terms(&state.omega, &state.e, &state.b, p)?;
        let limit = cfl_limit(&self.grid, n0.max_u);
        if h > limit {
            return Err(EmError::Cfl { dt: h, limit });
        }
        let defects = StructureDefects {
            div_e: rel_div(&state.e)?,
            div_j: rel_div(&n0.j)?,
            suppressed: 0.0,
        };
        // stage a
        let a_omega = self.visc.etd2(&state.omega, Some(&n0.n_omega), None, h, 0.0);
        let (a_e, a_b) = self
            .maxwell
            .etd2(&state.e, &state.b, Some(&n0.n_e), None, h, 0.0)?;
        let na = explicit_terms(&a_omega, &a_e, &a_b, p)?;
        let d_omega = na.n_omega.sub(&n0.n_omega)?;
        let d_e = na.n_e.sub(&n0.n_e)?;
        let omega = self
            .visc
            .etd2(&state.omega, Some(&n0.n_omega), Some(&d_omega), h, h);
        let (e, b) = self
            .maxwell
            .etd2(&state.e, &state.b, Some(&n0.n_e), Some(&d_e), h, h)?;
        let e = leray_project(&e)?;
        let next = NormalEMState {
            omega: omega.without_mean(),
            e,
            b: b.without_mean(),
            time: state.time + h,
        };
        if !next.is_finite() {
            return Err(EmError::NonFinite { time: next.time });
        }
        let integrals = self.dense_integrals(state, &n0, &na, &d_e)?;
        Ok(StepOutcome {
            state: next,
            integrals,
            defects,
            cfl: limit,
        })
    }

    /// Gauss-Legendre quadrature over the step of the exponential dense
    /// output `y(th) = e^{thL} y + th phi1(thL) N0 + (th)^2/h phi2(thL) (Na - N0)`.
    fn dense_integrals(
        &self,
        state: &NormalEMState,
        n0: &Explicit,
        na: &Explicit,
        d_e: &Field,
    ) -> Result<StepIntegrals> {
        let h = self.dt;
        let p = &self.params;
        let dw = na.w.sub(&n0.w)?;
        let mut acc = StepIntegrals::default();
        for (theta, wt, prop, _) in &self.nodes {
            let s = theta * h;
            let (e, b) = prop.etd2(&state.e, &state.b, Some(&n0.n_e), Some(d_e), s, s * theta)?;
            let w = n0.w.axpy(*theta, &dw)?;
            let j = e.scale(p.c).add(&w)?.scale(p.sigma);
            let jn = j.l2_norm();
            let en = e.l2_norm();
            let gb = grad_inf(&b)?;
            acc.j_sq += wt * h * jn * jn;
            acc.e_sq += wt * h * en * en;
            acc.grad_e_sq += wt * h * grad_sq_l2(&e);
            acc.grad_b_inf_sq += wt * h * gb * gb;
            acc.grad_b_sq += wt * h * grad_sq_l2(&b);
        }
        Ok(acc)
    }
}

/// One step with a freshly built solver.
pub fn step(state: &NormalEMState, params: &PhysParams, dt: f64) -> Result<NormalEMState> {
    Ok(Solver::new(state.grid(), params, dt)?.step(state)?.state)
}

/// Snapshots and running integrals of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub params: PhysParams,
    pub dt: f64,
    pub states: Vec<NormalEMState>,
    /// Integrals from `t = 0` to each snapshot.
    pub cumulative: Vec<StepIntegrals>,
    pub steps: usize,
    pub max_div_e: f64,
    pub max_div_j: f64,
    pub max_suppressed: f64,
    /// Largest `||omega(t)|| - ||omega_0|| - J ||grad b||_{L2 Linf}` over all steps,
    /// relative to `max(||omega_0||, 1e-300)`.
    pub vorticity_excess: f64,
    /// Reason the run stopped early; the last stored state is the last good one.
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }

    pub fn last(&self) -> &NormalEMState {
        &self.states[self.states.len() - 1]
    }
}

/// Advance `state0` to `t_end` with fixed steps, keeping every `cadence`-th state.
pub fn integrate(solver: &Solver, state0: &NormalEMState, t_end: f64, cadence: usize) -> Result<Trajectory> {
    let steps = crate::propagator::step_count(t_end, solver.dt)?;
    let cadence = cadence.max(1);
    let omega0 = state0.omega.l2_norm();
    let mut traj = Trajectory {
        params: solver.params,
        dt: solver.dt,
        states: vec![state0.clone()],
        cumulative: vec![StepIntegrals::default()],
        steps: 0,
        max_div_e: 0.0,
        max_div_j: 0.0,
        max_suppressed: 0.0,
        vorticity_excess: f64::NEG_INFINITY,
        failure: None,
    };
    let mut cur = state0.clone();
    let mut cum = StepIntegrals::default();
    for n in 0..steps {
        let out = match solver.step(&cur) {
            Ok(o) => o,
            Err(e) => {
                if traj.states.last().map(|s| s.time) != Some(cur.time) {
                    traj.states.push(cur.clone());
                    traj.cumulative.push(cum);
                }
                traj.failure = Some(e.to_string());
                return Ok(traj);
            }
        };
        cum = cum.add(&out.integrals);
        cur = out.state;
        traj.steps = n + 1;
        traj.max_div_e = traj.max_div_e.max(out.defects.div_e).max(rel_div(&cur.e)?);
        traj.max_div_j = traj.max_div_j.max(out.defects.div_j);
        traj.max_suppressed = traj.max_suppressed.max(out.defects.suppressed);
        let bound = omega0 + (cum.j_sq * cum.grad_b_inf_sq).sqrt();
        let excess = (cur.omega.l2_norm() - bound) / omega0.max(1e-300);
        traj.vorticity_excess = traj.vorticity_excess.max(excess);
        if (n + 1) % cadence == 0 || n + 1 == steps {
            traj.states.push(cur.clone());
            traj.cumulative.push(cum);
        }
    }
    Ok(traj)
}

/// State of the limiting system: 2D Euler plus heat-transport for `b`.
#[derive(Clone, Debug)]
pub struct MhdState {
    pub omega: Field,
    pub b: Field,
    pub time: f64,
}

/// Fixed-step integrator for `d/dt omega + u . grad omega = 0`,
/// `d/dt b - Lap b / sigma + u . grad b = 0`.
#[derive(Clone, Debug)]
pub struct MhdSolver {
    pub sigma: f64,
    pub dt: f64,
    grid: Grid,
    heat: DiagonalFlow,
    nodes: Vec<(f64, f64, DiagonalFlow)>,
}

/// Result of one limiting-system step; `grad_b_sq` is `int ||grad b||^2` over the step.
#[derive(Clone, Debug)]
pub struct MhdStep {
    pub state: MhdState,
    pub grad_b_sq: f64,
}

impl MhdSolver {
    pub fn new(grid: &Grid, sigma: f64, dt: f64) -> Result<MhdSolver> {
        if !(sigma > 0.0) || !(dt > 0.0) {
            return Err(EmError::InvalidParameter(format!(
                "need sigma > 0 and dt > 0, got sigma = {sigma}, dt = {dt}"
            )));
        }
        let heat = DiagonalFlow::new(grid, |x| x / sigma, dt);
        let (th, wt) = gauss_legendre_on(6, 0.0, 1.0);
        let nodes = th
            .iter()
            .zip(wt.iter())
            .map(|(&t, &w)| (t, w, DiagonalFlow::new(grid, |x| x / sigma, t * dt)))
            .collect();
        Ok(MhdSolver {
            sigma,
            dt,
            grid: grid.clone(),
            heat,
            nodes,
        })
    }

    pub fn step(&self, s: &MhdState) -> Result<MhdStep> {
        let h = self.dt;
        let u = biot_savart(&s.omega)?;
        let limit = cfl_limit(&self.grid, lp_norm(&u, f64::INFINITY)?);
        if h > limit {
            return Err(EmError::Cfl { dt: h, limit });
        }
        let no = grad_dot(&u, &s.omega)?.scale(-1.0);
        let nb = grad_dot(&u, &s.b)?.scale(-1.0);
        let ao = s.omega.axpy(h, &no)?;
        let ab = self.heat.etd2(&s.b, Some(&nb), None, h, 0.0);
        let ua = biot_savart(&ao)?;
        let nao = grad_dot(&ua, &ao)?.scale(-1.0);
        let nab = grad_dot(&ua, &ab)?.scale(-1.0);
        let omega = s.omega.axpy(0.5 * h, &no.add(&nao)?)?;
        let db = nab.sub(&nb)?;
        let b = self.heat.etd2(&s.b, Some(&nb), Some(&db), h, h);
        let state = MhdState {
            omega: omega.without_mean(),
            b: b.without_mean(),
            time: s.time + h,
        };
        let finite = [&state.omega, &state.b].iter().all(|f| {
            f.comps()
                .iter()
                .flatten()
                .all(|z: &Complex64| z.re.is_finite() && z.im.is_finite())
        });
        if !finite {
            return Err(EmError::NonFinite { time: state.time });
        }
        let mut grad_b_sq = 0.0;
        for (theta, wt, flow) in &self.nodes {
            let t = theta * h;
            let bt = flow.etd2(&s.b, Some(&nb), Some(&db), t, t * theta);
            grad_b_sq += wt * h * grad_sq_l2(&bt);
        }
        Ok(MhdStep { state, grad_b_sq })
    }
}

/// One limiting-system step with a freshly built solver.
pub fn step_mhd(omega: &Field, b: &Field, sigma: f64, dt: f64, time: f64) -> Result<MhdState> {
    let solver = MhdSolver::new(omega.grid(), sigma, dt)?;
    Ok(solver
        .step(&MhdState {
            omega: omega.clone(),
            b: b.clone(),
            time,
        })?
        .state)
}

/// Stored states of a limiting-system run and `int_0^t ||grad b||^2`.
#[derive(Clone, Debug)]
pub struct MhdTrajectory {
    pub states: Vec<MhdState>,
    pub grad_b_sq: Vec<f64>,
}

pub fn integrate_mhd(solver: &MhdSolver, s0: &MhdState, t_end: f64, cadence: usize) -> Result<MhdTrajectory> {
    let steps = crate::propagator::step_count(t_end, solver.dt)?;
    let cadence = cadence.max(1);
    let mut out = MhdTrajectory {
        states: vec![s0.clone()],
        grad_b_sq: vec![0.0],
    };
    let mut cur = s0.clone();
    let mut cum = 0.0;
    for n in 0..steps {
        let st = solver.step(&cur)?;
        cum += st.grad_b_sq;
        cur = st.state;
        if (n + 1) % cadence == 0 || n + 1 == steps {
            out.states.push(cur.clone());
            out.grad_b_sq.push(cum);
        }
    }
    Ok(out)
}
