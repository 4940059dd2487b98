//! Energy balance, dissipation and the composite functional `H(t1, t2)`.

use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::lp::{
    besov_from_blocks, joint_block_lp_norms, time_lr, DyadicCutoffs, NormSpec, Split, TimeSeriesNorms,
};
use crate::solver::{NormalEMState, Trajectory};
use crate::spectral::{lp_norm, PhysParams};

/// Integrability of the `W^{1,p}` leg of `H`.
pub const H_EXPONENT_P: f64 = 4.0;

/// The eight pieces of `H(t1, t2)` and their sum.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct HComponents {
    /// `||u||_{L^inf H^1}` (equal to `sup ||omega||_2`)
    pub u_h1: f64,
    /// `E0^{(p-2)/(2p-2)} ||u||_{L^inf W^{1,p}}^{p/(2p-2)}`, via `||omega||_p`
    pub u_w1p: f64,
    /// `c^{-3/4} ||(E, B)||_{L~^inf B^{7/4}_{2,1,>}}`
    pub em_hi_inf: f64,
    /// `c^{1/4} ||(E, B)||_{L~^2 B^{7/4}_{2,1,>}}`
    pub em_hi_2: f64,
    /// `||(E, B)||_{L~^2 B^1_{inf,1,>}}`
    pub em_hi_lip: f64,
    /// `||(E, B)||_{L^inf H^1}`
    pub em_h1: f64,
    /// `c ||E||_{L^2 H^1}`
    pub c_e_h1: f64,
    /// `||B||_{L^2 B^2_{2,1,<}}`
    pub b_lo: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntervalReport {
    pub t1: f64,
    pub t2: f64,
    /// `J(t1, t2) = ||j||_{L^2([t1, t2] x T^2)}`
    pub dissipation: f64,
    pub h: HComponents,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `sqrt(||u0||^2 + ||E0||^2 + ||B0||^2)`
    pub e0: f64,
    pub times: Vec<f64>,
    /// `||u(t)||_2^2`
    pub kinetic: Vec<f64>,
    /// `||E(t)||_2^2`
    pub electric: Vec<f64>,
    /// `||B(t)||_2^2`
    pub magnetic: Vec<f64>,
    /// `J(0, t)`
    pub dissipation: Vec<f64>,
    /// `E0^2 - (||u||^2 + ||E||^2 + ||B||^2 + (2/sigma) J(0,t)^2)`
    pub deficit: Vec<f64>,
    /// `sqrt(sigma / 2) E0`
    pub dissipation_bound: f64,
    pub intervals: Vec<IntervalReport>,
}

impl EnergyReport {
    /// Most negative deficit, relative to `E0^2` (0 for a zero run).
    pub fn worst_relative_deficit(&self) -> f64 {
        let e2 = self.e0 * self.e0;
        let m = self.deficit.iter().cloned().fold(f64::INFINITY, f64::min);
        if e2 > 0.0 {
            m / e2
        } else {
            m.min(0.0)
        }
    }

    pub fn max_dissipation(&self) -> f64 {
        self.dissipation.iter().cloned().fold(0.0, f64::max)
    }
}

fn locate(times: &[f64], t: f64) -> Result<usize> {
    let tol = 1e-9 * times.last().copied().unwrap_or(1.0).abs().max(1.0);
    times
        .iter()
        .position(|&s| (s - t).abs() <= tol)
        .ok_or_else(|| EmError::MissingSnapshots(format!("no snapshot at t = {t}")))
}

fn h_components(
    states: &[&NormalEMState],
    times: &[f64],
    e0: f64,
    c_e_h1: f64,
    params: &PhysParams,
    cut: &DyadicCutoffs,
) -> Result<HComponents> {
    let p = H_EXPONENT_P;
    let th = params.sigma * params.c;
    let mut u_h1: f64 = 0.0;
    let mut w1p: f64 = 0.0;
    let mut em_h1: f64 = 0.0;
    let mut em2 = Vec::new();
    let mut eminf = Vec::new();
    let mut b2 = Vec::new();
    for s in states {
        u_h1 = u_h1.max(s.omega.l2_norm());
        w1p = w1p.max(lp_norm(&s.omega, p)?);
        let h1 = (s.e.hdot_norm(1.0).powi(2) + s.b.hdot_norm(1.0).powi(2)).sqrt();
        em_h1 = em_h1.max(h1);
        em2.push(joint_block_lp_norms(&[&s.e, &s.b], 2.0, cut)?);
        eminf.push(joint_block_lp_norms(&[&s.e, &s.b], f64::INFINITY, cut)?);
        b2.push(joint_block_lp_norms(&[&s.b], 2.0, cut)?);
    }
    let series = |v: &Vec<Vec<f64>>| -> Result<TimeSeriesNorms> {
        let nb = cut.num_blocks();
        TimeSeriesNorms::new(
            times.to_vec(),
            cut.k_min,
            (0..nb).map(|b| v.iter().map(|x| x[b]).collect()).collect(),
        )
    };
    let ts2 = series(&em2)?;
    let tsinf = series(&eminf)?;
    let tsb = series(&b2)?;
    let above = Split::Above(th);
    let cl = |ts: &TimeSeriesNorms, s: f64, q: f64, r: f64, split: Split| -> Result<f64> {
        crate::lp::chemin_lerner_norm(ts, &NormSpec::chemin_lerner(s, q, 1.0, r).with_split(split))
    };
    let em_hi_inf = params.c.powf(-0.75) * cl(&ts2, 1.75, 2.0, f64::INFINITY, above)?;
    let em_hi_2 = params.c.powf(0.25) * cl(&ts2, 1.75, 2.0, 2.0, above)?;
    let em_hi_lip = cl(&tsinf, 1.0, f64::INFINITY, 2.0, above)?;
    let below = NormSpec::besov(2.0, 2.0, 1.0).with_split(Split::Below(th));
    let b_vals: Vec<f64> = (0..times.len())
        .map(|t| {
            let blocks: Vec<f64> = tsb.block_norms.iter().map(|b| b[t]).collect();
            besov_from_blocks(&blocks, tsb.k_min, &below)
        })
        .collect();
    let b_lo = time_lr(times, &b_vals, 2.0);
    let u_w1p = if e0 > 0.0 && w1p > 0.0 {
        e0.powf((p - 2.0) / (2.0 * p - 2.0)) * w1p.powf(p / (2.0 * p - 2.0))
    } else {
        0.0
    };
    let mut h = HComponents {
        u_h1,
        u_w1p,
        em_hi_inf,
        em_hi_2,
        em_hi_lip,
        em_h1,
        c_e_h1,
        b_lo,
        total: 0.0,
    };
    h.total = h.u_h1 + h.u_w1p + h.em_hi_inf + h.em_hi_2 + h.em_hi_lip + h.em_h1 + h.c_e_h1 + h.b_lo;
    Ok(h)
}

/// Energy balance along a trajectory plus `J` and `H` on each interval of
/// `partition` (whose points must be snapshot times).
pub fn energy_report(traj: &Trajectory, params: &PhysParams, partition: &[f64]) -> Result<EnergyReport> {
    if traj.states.is_empty() {
        return Err(EmError::MissingSnapshots("trajectory is empty".into()));
    }
    let times = traj.times();
    let e0 = traj.states[0].energy()?.sqrt();
    let mut rep = EnergyReport {
        e0,
        times: times.clone(),
        kinetic: vec![],
        electric: vec![],
        magnetic: vec![],
        dissipation: vec![],
        deficit: vec![],
        dissipation_bound: (params.sigma / 2.0).sqrt() * e0,
        intervals: vec![],
    };
    for (s, cum) in traj.states.iter().zip(traj.cumulative.iter()) {
        let k = s.velocity()?.l2_norm().powi(2);
        let e = s.e.l2_norm().powi(2);
        let m = s.b.l2_norm().powi(2);
        rep.kinetic.push(k);
        rep.electric.push(e);
        rep.magnetic.push(m);
        rep.dissipation.push(cum.j_sq.max(0.0).sqrt());
        rep.deficit
            .push(e0 * e0 - (k + e + m + 2.0 / params.sigma * cum.j_sq));
    }
    let cut = DyadicCutoffs::new(traj.states[0].grid());
    for w in partition.windows(2) {
        let (i1, i2) = (locate(&times, w[0])?, locate(&times, w[1])?);
        if i2 <= i1 {
            return Err(EmError::InvalidParameter("partition must increase".into()));
        }
        let d = traj.cumulative[i2].sub(&traj.cumulative[i1]);
        let states: Vec<&NormalEMState> = traj.states[i1..=i2].iter().collect();
        let h = h_components(
            &states,
            &times[i1..=i2],
            e0,
            params.c * d.grad_e_sq.max(0.0).sqrt(),
            params,
            &cut,
        )?;
        rep.intervals.push(IntervalReport {
            t1: w[0],
            t2: w[1],
            dissipation: d.j_sq.max(0.0).sqrt(),
            h,
        });
    }
    Ok(rep)
}
