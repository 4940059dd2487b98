//! Both sides of the energy and frequency-localised estimates along a
//! solver trajectory. Constants are unknown, so only the ratio
//! `lhs / rhs` is reported.
//!
//! All norms here are `L^2`-based and use Parseval on the dyadic blocks.
//! Frequency splits are at `|xi| = sigma c`; time norms use the trapezoid
//! rule on snapshots except where the solver's per-step integrals are exact.

use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::lp::{besov_from_blocks, lq_sum, time_lr, DyadicCutoffs, NormSpec, RatioReport, Split};
use crate::solver::Trajectory;
use crate::spectral::{lp_norm, Field, PhysParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaId {
    /// `||omega(t)||_2 <= ||omega_0||_2 + J(0,t) ||grad B||_{L^2 L^inf}`
    Vorticity,
    /// `||(E,B)||_{L^inf H^1} + c ||E||_{L^2 H^1}` against
    /// `||(E0,B0)||_{H^1} + ||u||_{L^inf L^2} ||grad B||_{L^2 L^inf}`
    ClassicalEnergy,
    /// `||B||_{L^inf L^2} + ||grad B||_{L^2 L^2}` against
    /// `||B0||_2 + c^-1 ||(E0,B0)||_{H^1} + c^-1 ||u||_{L^inf L^2} ||grad B||_{L^2 L^inf}`
    CL2Energy,
    /// Chemin-Lerner energy bound with `s = 3/2`, `n = 2`.
    TechnicalEnergy,
    /// High-frequency Maxwell bound with `alpha = 1/2`, `s = 1`, `r = 2`,
    /// `q = p = inf`, `n = 1`.
    HighFrequency,
    /// Low-frequency `E` and `B` bounds with `q = p = 2`, `alpha = 1/2`,
    /// `s = 1`, `n = 1`.
    LowFrequency,
}

impl LemmaId {
    pub const ALL: [LemmaId; 6] = [
        LemmaId::Vorticity,
        LemmaId::ClassicalEnergy,
        LemmaId::CL2Energy,
        LemmaId::TechnicalEnergy,
        LemmaId::HighFrequency,
        LemmaId::LowFrequency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Vorticity => "vorticity",
            LemmaId::ClassicalEnergy => "classical-energy",
            LemmaId::CL2Energy => "c-l2-energy",
            LemmaId::TechnicalEnergy => "technical-energy",
            LemmaId::HighFrequency => "high-frequency",
            LemmaId::LowFrequency => "low-frequency",
        }
    }

    pub fn parse(s: &str) -> Result<LemmaId> {
        LemmaId::ALL
            .iter()
            .copied()
            .find(|l| l.name() == s)
            .ok_or_else(|| EmError::InvalidParameter(format!("unknown lemma '{s}'")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InequalityRow {
    pub lemma: LemmaId,
    pub line: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl InequalityRow {
    fn new(lemma: LemmaId, line: &str, lhs: f64, rhs: f64) -> InequalityRow {
        let r = RatioReport::new(lhs, rhs);
        InequalityRow {
            lemma,
            line: line.to_string(),
            lhs: r.lhs,
            rhs: r.rhs,
            ratio: r.ratio,
        }
    }
}

/// Block `L^2` norms of several fields taken jointly.
fn block_l2(fields: &[&Field], cut: &DyadicCutoffs) -> Vec<f64> {
    let grid = cut.grid();
    cut.block_indices()
        .map(|k| {
            let prof = cut.block_profile(k).expect("index in range");
            let mut s = 0.0;
            for f in fields {
                for c in f.comps() {
                    s += c.iter().zip(prof).map(|(z, w)| (z * w).norm_sqr()).sum::<f64>();
                }
            }
            grid.length() * s.sqrt()
        })
        .collect()
}

/// Per-snapshot block norms of one quantity.
struct Series {
    times: Vec<f64>,
    k_min: i32,
    /// `blocks[t][b]`
    blocks: Vec<Vec<f64>>,
}

impl Series {
    fn new(traj: &Trajectory, cut: &DyadicCutoffs, pick: impl Fn(usize) -> Vec<Field>) -> Series {
        let blocks = (0..traj.states.len())
            .map(|t| {
                let fs = pick(t);
                block_l2(&fs.iter().collect::<Vec<_>>(), cut)
            })
            .collect();
        Series {
            times: traj.times(),
            k_min: cut.k_min,
            blocks,
        }
    }

    fn at(&self, t: usize, spec: &NormSpec) -> f64 {
        besov_from_blocks(&self.blocks[t], self.k_min, spec)
    }

    /// `L^r_t B` with the Besov norm inside.
    fn lebesgue(&self, r: f64, spec: &NormSpec) -> f64 {
        let v: Vec<f64> = (0..self.times.len()).map(|t| self.at(t, spec)).collect();
        time_lr(&self.times, &v, r)
    }

    /// Chemin-Lerner `L~^r_t B`: time norm per block first.
    fn chemin_lerner(&self, r: f64, spec: &NormSpec) -> f64 {
        let nb = self.blocks[0].len();
        let per: Vec<f64> = (0..nb)
            .map(|b| {
                let v: Vec<f64> = self.blocks.iter().map(|x| x[b]).collect();
                time_lr(&self.times, &v, r)
            })
            .collect();
        besov_from_blocks(&per, self.k_min, spec)
    }
}

fn besov(s: f64, q: f64, split: Split) -> NormSpec {
    NormSpec::besov(s, 2.0, q).with_split(split)
}

/// Rows for the selected lemma.
pub fn inequality_report(
    lemma: LemmaId,
    traj: &Trajectory,
    params: &PhysParams,
) -> Result<Vec<InequalityRow>> {
    if traj.states.len() < 2 {
        return Err(EmError::MissingSnapshots(format!(
            "need at least 2 snapshots, got {}",
            traj.states.len()
        )));
    }
    params.validate()?;
    let grid = traj.states[0].grid().clone();
    let cut = DyadicCutoffs::new(&grid);
    let c = params.c;
    let th = params.sigma * c;
    let (lo, hi, all) = (Split::Below(th), Split::Above(th), Split::All);
    let s0 = &traj.states[0];
    let last = traj.cumulative[traj.cumulative.len() - 1];
    let grad_b_l2linf = last.grad_b_inf_sq.max(0.0).sqrt();
    let u_l2 = traj
        .states
        .iter()
        .map(|s| s.velocity().map(|u| u.l2_norm()))
        .collect::<Result<Vec<f64>>>()?;
    let u_l2_sup = lq_sum(&u_l2, f64::INFINITY);
    let h1 = |e: &Field, b: &Field| (e.hdot_norm(1.0).powi(2) + b.hdot_norm(1.0).powi(2)).sqrt();
    let em0_h1 = h1(&s0.e, &s0.b);

    let rows = match lemma {
        LemmaId::Vorticity => {
            let w0 = s0.omega.l2_norm();
            // worst snapshot
            let mut worst = InequalityRow::new(lemma, "omega", 0.0, 0.0);
            for (s, cum) in traj.states.iter().zip(&traj.cumulative) {
                let rhs = w0 + (cum.j_sq.max(0.0) * cum.grad_b_inf_sq.max(0.0)).sqrt();
                let row = InequalityRow::new(lemma, "omega", s.omega.l2_norm(), rhs);
                if row.ratio > worst.ratio || (worst.lhs == 0.0 && worst.rhs == 0.0) {
                    worst = row;
                }
            }
            vec![worst]
        }
        LemmaId::ClassicalEnergy => {
            let em_h1 = traj.states.iter().map(|s| h1(&s.e, &s.b)).fold(0.0, f64::max);
            let lhs = em_h1 + c * last.grad_e_sq.max(0.0).sqrt();
            let rhs = em0_h1 + u_l2_sup * grad_b_l2linf;
            vec![InequalityRow::new(lemma, "(E,B) in H^1", lhs, rhs)]
        }
        LemmaId::CL2Energy => {
            let b_sup = traj.states.iter().map(|s| s.b.l2_norm()).fold(0.0, f64::max);
            let lhs = b_sup + last.grad_b_sq.max(0.0).sqrt();
            let rhs = s0.b.l2_norm() + (em0_h1 + u_l2_sup * grad_b_l2linf) / c;
            vec![InequalityRow::new(lemma, "B in L^2", lhs, rhs)]
        }
        LemmaId::TechnicalEnergy => {
            let (s, n) = (1.5, 2.0);
            let em = Series::new(traj, &cut, |t| {
                vec![traj.states[t].e.clone(), traj.states[t].b.clone()]
            });
            let e = Series::new(traj, &cut, |t| vec![traj.states[t].e.clone()]);
            let b = Series::new(traj, &cut, |t| vec![traj.states[t].b.clone()]);
            let lhs = em.chemin_lerner(f64::INFINITY, &besov(s, n, all))
                + c * e.chemin_lerner(2.0, &besov(s, n, all));
            let mut u_inf: f64 = 0.0;
            let mut u_h1: f64 = 0.0;
            for st in &traj.states {
                u_inf = u_inf.max(lp_norm(&st.velocity()?, f64::INFINITY)?);
                u_h1 = u_h1.max(st.omega.l2_norm());
            }
            let rhs = em.at(0, &besov(s, n, all))
                + (u_inf + u_h1)
                    * (last.grad_b_sq.max(0.0).sqrt()
                        + b.lebesgue(2.0, &besov(2.0, 1.0, lo))
                        + b.chemin_lerner(2.0, &besov(s, n, hi)));
            vec![InequalityRow::new(lemma, "(E,B) in B^s_{2,n}", lhs, rhs)]
        }
        LemmaId::HighFrequency => {
            let em = Series::new(traj, &cut, |t| {
                vec![traj.states[t].e.clone(), traj.states[t].b.clone()]
            });
            let b = Series::new(traj, &cut, |t| vec![traj.states[t].b.clone()]);
            let um = u_mix(traj, &cut)?;
            let lhs = em.chemin_lerner(f64::INFINITY, &besov(0.5, 1.0, hi));
            let rhs = em.at(0, &besov(0.5, 1.0, hi))
                + um * b.chemin_lerner(f64::INFINITY, &besov(1.0, f64::INFINITY, all)) / c;
            vec![InequalityRow::new(lemma, "(E,B) high", lhs, rhs)]
        }
        LemmaId::LowFrequency => {
            let e = Series::new(traj, &cut, |t| vec![traj.states[t].e.clone()]);
            let b = Series::new(traj, &cut, |t| vec![traj.states[t].b.clone()]);
            let um = u_mix(traj, &cut)?;
            let src = um * b.lebesgue(2.0, &besov(1.0, f64::INFINITY, all));
            let e_lhs = e.lebesgue(2.0, &besov(0.5, 1.0, lo));
            let e_rhs = (e.at(0, &besov(0.5, 1.0, lo)) + b.at(0, &besov(0.5, 2.0, lo)) + src) / c;
            let b_lhs = b.lebesgue(2.0, &besov(1.5, 1.0, lo));
            let b_rhs = e.at(0, &besov(1.5, 2.0, lo)) / c + b.at(0, &besov(0.5, 2.0, lo)) + src;
            vec![
                InequalityRow::new(lemma, "E low", e_lhs, e_rhs),
                InequalityRow::new(lemma, "B low", b_lhs, b_rhs),
            ]
        }
    };
    Ok(rows)
}

/// `||u||_{L^inf B^0_{2,inf}}^{1/2} ||u||_{L^inf B^1_{2,inf}}^{1/2}`
fn u_mix(traj: &Trajectory, cut: &DyadicCutoffs) -> Result<f64> {
    let mut a: f64 = 0.0;
    let mut b: f64 = 0.0;
    for s in &traj.states {
        let u = s.velocity()?;
        let bl = block_l2(&[&u], cut);
        a = a.max(besov_from_blocks(
            &bl,
            cut.k_min,
            &besov(0.0, f64::INFINITY, Split::All),
        ));
        b = b.max(besov_from_blocks(
            &bl,
            cut.k_min,
            &besov(1.0, f64::INFINITY, Split::All),
        ));
    }
    Ok((a * b).sqrt())
}

/// Rows of every lemma.
pub fn full_report(traj: &Trajectory, params: &PhysParams) -> Result<Vec<InequalityRow>> {
    let mut out = Vec::new();
    for l in LemmaId::ALL {
        out.extend(inequality_report(l, traj, params)?);
    }
    Ok(out)
}
