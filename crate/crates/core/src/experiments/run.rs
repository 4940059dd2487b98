//! Experiment dispatch and artifact emission.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::energy::energy_report;
use crate::error::{EmError, Result};
use crate::experiments::config::{ExperimentConfig, ExperimentKind};
use crate::experiments::data::{make_initial_data, solenoidal};
use crate::lab::dispersion::{dispersion_decay, log_times, PsiSpec};
use crate::lab::heat::heat_smoothing_check;
use crate::lab::inequality::{full_report, InequalityRow};
use crate::lab::output::{num, write_json, CsvTable, FitSummary};
use crate::lab::strichartz::{wave_damping_crossover, wave_frequency_law, CrossoverSettings};
use crate::lp::{paraproduct, product_law_report, DyadicCutoffs};
use crate::random::random_coefficients;
use crate::snapshot::write_snapshot;
use crate::solver::{integrate, Solver, Trajectory};
use crate::spectral::{product, Field, Grid, PhysParams};

/// Default test function of the dispersion runs.
pub const DISPERSION_PSI: PsiSpec = PsiSpec::Bump {
    inner: 0.5,
    outer: 2.0,
};

/// Result of [`run`]: where the artifacts went and whether every run finished.
#[derive(Clone, Debug, Serialize)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub ok: bool,
    pub message: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    kind: &'a str,
    config_sha256: String,
    package: &'a str,
    version: &'a str,
    seed: Option<u64>,
    threads: usize,
    wall_time_s: f64,
    ok: bool,
    message: Option<String>,
    files: Vec<String>,
}

/// SHA-256 of the canonical configuration text without the output location.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.out = None;
    let digest = Sha256::digest(c.to_text().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

struct Emitter {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn table(&mut self, name: &str, t: &CsvTable) -> Result<()> {
        let p = self.dir.join(name);
        t.write(&p)?;
        self.files.push(p);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let p = self.dir.join(name);
        write_json(&p, v)?;
        self.files.push(p);
        Ok(())
    }
}

/// Validate, run and write `manifest.json`, tables and `summary.json` into
/// the output directory (default `emlab-out/<kind>`).
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let dir = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("emlab-out").join(cfg.kind.name()));
    std::fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| EmError::Config(format!("thread pool: {e}")))?;
    let mut em = Emitter {
        dir: dir.clone(),
        files: Vec::new(),
    };
    std::fs::write(dir.join("config.txt"), cfg.to_text())?;
    em.files.push(dir.join("config.txt"));
    let status = pool.install(|| dispatch(cfg, &mut em))?;
    let manifest = Manifest {
        kind: cfg.kind.name(),
        config_sha256: config_hash(cfg),
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.data.seed,
        threads: cfg.threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        ok: status.is_none(),
        message: status.clone(),
        files: em
            .files
            .iter()
            .map(|p| p.strip_prefix(&dir).unwrap_or(p).display().to_string())
            .collect(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    em.files.push(dir.join("manifest.json"));
    Ok(RunOutcome {
        out_dir: dir,
        files: em.files,
        ok: status.is_none(),
        message: status,
    })
}

/// Returns a failure message when a run stopped early.
fn dispatch(cfg: &ExperimentConfig, em: &mut Emitter) -> Result<Option<String>> {
    match cfg.kind {
        ExperimentKind::Simulate => simulate(cfg, em, false),
        ExperimentKind::EnergyReport => simulate(cfg, em, true),
        ExperimentKind::SweepC => sweep_c(cfg, em),
        ExperimentKind::Strichartz => strichartz(cfg, em),
        ExperimentKind::Dispersion => dispersion(cfg, em),
        ExperimentKind::Heat => heat(cfg, em),
        ExperimentKind::BesovCheck => besov_check(cfg, em),
    }
}

fn solve(cfg: &ExperimentConfig, params: &PhysParams) -> Result<Trajectory> {
    let grid = Grid::new(cfg.n, cfg.length)?;
    let s0 = make_initial_data(&cfg.data, &grid, params)?;
    let solver = Solver::new(&grid, params, cfg.dt)?;
    integrate(&solver, &s0, cfg.t_end, cfg.cadence)
}

#[derive(Clone, Debug, Serialize)]
struct RunSummary {
    c: f64,
    sigma: f64,
    n: usize,
    dt: f64,
    t_end: f64,
    steps: usize,
    e0: f64,
    worst_relative_deficit: f64,
    dissipation: f64,
    dissipation_bound: f64,
    /// `c ||E||_{L^2 H^1}` over the whole run
    c_e_h1: f64,
    max_div_e: f64,
    max_div_j: f64,
    max_suppressed: f64,
    vorticity_excess: f64,
    failure: Option<String>,
    inequalities: Vec<InequalityRow>,
}

fn summarize(traj: &Trajectory, cfg: &ExperimentConfig, params: &PhysParams) -> Result<RunSummary> {
    let rep = energy_report(traj, params, &[])?;
    let last = traj.cumulative[traj.cumulative.len() - 1];
    let inequalities = if traj.states.len() >= 2 {
        full_report(traj, params)?
    } else {
        vec![]
    };
    Ok(RunSummary {
        c: params.c,
        sigma: params.sigma,
        n: cfg.n,
        dt: cfg.dt,
        t_end: cfg.t_end,
        steps: traj.steps,
        e0: rep.e0,
        worst_relative_deficit: rep.worst_relative_deficit(),
        dissipation: rep.max_dissipation(),
        dissipation_bound: rep.dissipation_bound,
        c_e_h1: params.c * last.grad_e_sq.max(0.0).sqrt(),
        max_div_e: traj.max_div_e,
        max_div_j: traj.max_div_j,
        max_suppressed: traj.max_suppressed,
        vorticity_excess: traj.vorticity_excess.max(0.0),
        failure: traj.failure.clone(),
        inequalities,
    })
}

fn energy_table(traj: &Trajectory, params: &PhysParams) -> Result<CsvTable> {
    let rep = energy_report(traj, params, &[])?;
    let mut t = CsvTable::new(&["t", "kinetic", "electric", "magnetic", "dissipation", "deficit"])
        .note("kinetic, electric, magnetic: squared L^2(T^2) norms of u, E, B")
        .note(
            "dissipation: ||j||_{L^2((0,t) x T^2)}; deficit: E0^2 - (|u|^2 + |E|^2 + |B|^2 + (2/sigma) J^2)",
        )
        .note(&format!(
            "e0 = {}, c = {}, sigma = {}",
            num(rep.e0),
            num(params.c),
            num(params.sigma)
        ));
    for i in 0..rep.times.len() {
        t.push_nums(&[
            rep.times[i],
            rep.kinetic[i],
            rep.electric[i],
            rep.magnetic[i],
            rep.dissipation[i],
            rep.deficit[i],
        ])?;
    }
    Ok(t)
}

fn inequality_table(rows: &[InequalityRow]) -> Result<CsvTable> {
    let mut t = CsvTable::new(&["lemma", "line", "lhs", "rhs", "ratio"])
        .note("lhs, rhs: both sides of each estimate with unit constants; ratio = lhs / rhs");
    for r in rows {
        t.push(vec![
            r.lemma.name().into(),
            r.line.clone(),
            num(r.lhs),
            num(r.rhs),
            num(r.ratio),
        ])?;
    }
    Ok(t)
}

fn write_snapshots(traj: &Trajectory, root: &Path, tag: &str, em: &mut Emitter) -> Result<()> {
    for s in &traj.states {
        let step = (s.time / traj.dt).round() as usize;
        em.files.push(write_snapshot(root, tag, step, s, &traj.params)?);
    }
    Ok(())
}

fn simulate(cfg: &ExperimentConfig, em: &mut Emitter, intervals: bool) -> Result<Option<String>> {
    let params = cfg.params();
    let traj = solve(cfg, &params)?;
    write_snapshots(&traj, &em.dir.clone(), "main", em)?;
    em.table("energy.csv", &energy_table(&traj, &params)?)?;
    let summary = summarize(&traj, cfg, &params)?;
    em.table("inequalities.csv", &inequality_table(&summary.inequalities)?)?;
    if intervals && traj.failure.is_none() {
        let partition = if cfg.partition.is_empty() {
            vec![0.0, cfg.t_end]
        } else {
            cfg.partition.clone()
        };
        let rep = energy_report(&traj, &params, &partition)?;
        let mut t = CsvTable::new(&[
            "t1",
            "t2",
            "J",
            "u_h1",
            "u_w1p",
            "em_hi_inf",
            "em_hi_2",
            "em_hi_lip",
            "em_h1",
            "c_e_h1",
            "b_lo",
            "H",
        ])
        .note("J = ||j||_{L^2((t1,t2) x T^2)}; H and its eight pieces on [t1, t2]; split at |xi| = sigma c");
        for iv in &rep.intervals {
            let h = iv.h;
            t.push_nums(&[
                iv.t1,
                iv.t2,
                iv.dissipation,
                h.u_h1,
                h.u_w1p,
                h.em_hi_inf,
                h.em_hi_2,
                h.em_hi_lip,
                h.em_h1,
                h.c_e_h1,
                h.b_lo,
                h.total,
            ])?;
        }
        em.table("intervals.csv", &t)?;
    }
    let failure = summary.failure.clone();
    em.json("summary.json", &summary)?;
    Ok(failure)
}

fn sweep_c(cfg: &ExperimentConfig, em: &mut Emitter) -> Result<Option<String>> {
    let runs: Vec<(PhysParams, Trajectory)> = cfg
        .c_list
        .par_iter()
        .map(|&c| {
            let mut p = cfg.params();
            p.c = c;
            solve(cfg, &p).map(|t| (p, t))
        })
        .collect::<Result<_>>()?;
    let mut table = CsvTable::new(&[
        "c",
        "e0",
        "worst_relative_deficit",
        "J",
        "J_bound",
        "c_e_h1",
        "c_l2_ratio",
        "classical_ratio",
    ])
    .note("J = ||j||_{L^2((0,T) x T^2)}, J_bound = sqrt(sigma/2) E0, c_e_h1 = c ||E||_{L^2 H^1}")
    .note("c_l2_ratio, classical_ratio: lhs / rhs of the c-l2 and classical energy estimates");
    let mut summaries = Vec::new();
    let mut failure = None;
    let dir = em.dir.clone();
    for (p, traj) in &runs {
        write_snapshots(traj, &dir, &format!("c{}", p.c), em)?;
        let s = summarize(traj, cfg, p)?;
        let ratio = |name: &str| {
            s.inequalities
                .iter()
                .find(|r| r.lemma.name() == name)
                .map_or(f64::NAN, |r| r.ratio)
        };
        table.push_nums(&[
            p.c,
            s.e0,
            s.worst_relative_deficit,
            s.dissipation,
            s.dissipation_bound,
            s.c_e_h1,
            ratio("c-l2-energy"),
            ratio("classical-energy"),
        ])?;
        if let Some(f) = &s.failure {
            failure.get_or_insert_with(|| format!("c = {}: {f}", p.c));
        }
        summaries.push(s);
    }
    em.table("sweep.csv", &table)?;
    em.json("summary.json", &summaries)?;
    Ok(failure)
}

#[derive(Serialize)]
struct FitReport<T: Serialize> {
    fits: Vec<FitSummary>,
    detail: T,
}

fn strichartz(cfg: &ExperimentConfig, em: &mut Emitter) -> Result<Option<String>> {
    if cfg.strichartz_mode == "crossover" {
        let rep = wave_damping_crossover(cfg.alpha, cfg.q, cfg.r, &CrossoverSettings::default())?;
        let mut t = CsvTable::new(&["t", "alpha_t", "ratio", "argmax_delta"]).note(&format!(
            "ratio = sup over angular widths of ||Delta_j (u_t, grad u)||_{{L^q(0,t; L^r)}} / ||Delta_j (u_t, grad u)(0)||_2, q = {}, r = {}, j = {}",
            cfg.q, cfg.r, rep.j
        ));
        for k in 0..rep.times.len() {
            t.push_nums(&[
                rep.times[k],
                cfg.alpha * rep.times[k],
                rep.ratio[k],
                rep.argmax_delta[k],
            ])?;
        }
        em.table("crossover.csv", &t)?;
        let fits = vec![
            FitSummary::new("small-alpha-t", &rep.fit.small, rep.predicted_small, 0.08),
            FitSummary::new("large-alpha-t", &rep.fit.large, rep.predicted_large, 0.08),
        ];
        em.json("summary.json", &FitReport { fits, detail: rep })?;
    } else {
        let rep = wave_frequency_law(cfg.alpha, cfg.q, cfg.r, &cfg.j_list, cfg.n, cfg.horizon)?;
        let mut t = CsvTable::new(&["j", "ratio", "log2_ratio"]).note(&format!(
            "ratio = ||Delta_j (u_t, grad u)||_{{L^q(0,T; L^r)}} / ||Delta_j (u_t, grad u)(0)||_2, q = {}, r = {}, T = {}, alpha = {}",
            cfg.q, cfg.r, cfg.horizon, cfg.alpha
        ));
        for (j, r) in rep.j.iter().zip(&rep.ratio) {
            t.push_nums(&[*j as f64, *r, r.log2()])?;
        }
        em.table("strichartz.csv", &t)?;
        let fits = vec![FitSummary::new("frequency", &rep.fit, rep.predicted, 0.08)];
        em.json("summary.json", &FitReport { fits, detail: rep })?;
    }
    Ok(None)
}

fn dispersion(cfg: &ExperimentConfig, em: &mut Emitter) -> Result<Option<String>> {
    let times = log_times(cfg.t_min, cfg.t_max, cfg.t_count);
    let reps = cfg
        .alpha_list
        .par_iter()
        .map(|&a| dispersion_decay(a, &times, &DISPERSION_PSI, cfg.tol))
        .collect::<Result<Vec<_>>>()?;
    let mut t = CsvTable::new(&["alpha", "t", "sup", "rho", "error"])
        .note("sup = max over |x| of |int e^{i(x.xi - t delta(xi))} psi(xi) dxi|, rho = |x| attaining it, error = refinement difference");
    let mut fits = Vec::new();
    for r in &reps {
        for s in &r.samples {
            t.push_nums(&[r.alpha, s.t, s.sup, s.rho, s.error])?;
        }
        fits.push(FitSummary::new(
            &format!("alpha={}", r.alpha),
            &r.fit,
            r.predicted,
            0.05,
        ));
    }
    em.table("dispersion.csv", &t)?;
    em.json("summary.json", &FitReport { fits, detail: reps })?;
    Ok(None)
}

#[derive(Serialize)]
struct HeatSummary {
    median: f64,
    max_ratio: f64,
    spread: f64,
    refinement: f64,
    stable: bool,
}

fn heat(cfg: &ExperimentConfig, em: &mut Emitter) -> Result<Option<String>> {
    let par = cfg.heat_params();
    let base = cfg.data.seed.unwrap_or(0);
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|k| base + k).collect();
    let st = heat_smoothing_check(&par, &cfg.n_list, &seeds)?;
    let mut t = CsvTable::new(&["n", "seed", "lhs", "rhs", "factor", "ratio"]).note(&format!(
        "{:?}: s = {}, p = {}, q = {}, m = {}, r = {}, theta = {}, alpha = {}, T = {}; ratio = lhs / (factor rhs)",
        par.kind, par.s, par.p, par.q, par.m, par.r, par.theta, par.alpha, par.horizon
    ));
    for s in &st.samples {
        t.push_nums(&[s.n as f64, s.seed as f64, s.lhs, s.rhs, s.factor, s.ratio])?;
    }
    em.table("heat.csv", &t)?;
    em.json(
        "summary.json",
        &HeatSummary {
            median: st.median,
            max_ratio: st.max_ratio,
            spread: st.spread,
            refinement: st.refinement,
            stable: st.stable(0.15),
        },
    )?;
    Ok(None)
}

/// Random band-limited scalar `(tag)` resolved on both `n` and `2n`.
fn pair_field(grid: &Grid, seed: u64, tag: u64, band: f64) -> Vec<num_complex::Complex64> {
    random_coefficients(grid, seed, tag, |r| {
        if r <= band {
            (-(r * r) / (0.25 * band * band)).exp()
        } else {
            0.0
        }
    })
}

#[derive(Serialize)]
struct BesovSummary {
    partition_defect: f64,
    max_bony_error: f64,
    max_refinement_change: f64,
}

fn besov_check(cfg: &ExperimentConfig, em: &mut Emitter) -> Result<Option<String>> {
    let g1 = Grid::new(cfg.n, cfg.length)?;
    let g2 = Grid::new(2 * cfg.n, cfg.length)?;
    let (c1, c2) = (DyadicCutoffs::new(&g1), DyadicCutoffs::new(&g2));
    let band = g1.dk() * (cfg.n / 6) as f64;
    let seed = cfg.data.seed.unwrap_or(0);
    let rows = (0..cfg.pairs as u64)
        .into_par_iter()
        .map(|p| -> Result<[f64; 4]> {
            let f = Field::scalar(&g1, pair_field(&g1, seed, 100 + 2 * p, band))?;
            let g = Field::scalar(&g1, pair_field(&g1, seed, 101 + 2 * p, band))?;
            let bony = paraproduct(&f, &g, &c1)?;
            let fg = product(&f, &g)?;
            let sum = bony.tf_g.add(&bony.tg_f)?.add(&bony.remainder)?;
            let err = sum.sub(&fg)?.l2_norm() / fg.l2_norm().max(1e-300);
            let law = |grid: &Grid, cut: &DyadicCutoffs| -> Result<f64> {
                let pf = solenoidal(grid, &pair_field(grid, seed, 100 + 2 * p, band))?;
                let pg = Field::scalar(grid, pair_field(grid, seed, 101 + 2 * p, band))?;
                Ok(product_law_report(&pf, &pg, 0.5, 1.5, (2.0, 2.0, f64::INFINITY), cut)?.ratio)
            };
            let (r1, r2) = (law(&g1, &c1)?, law(&g2, &c2)?);
            Ok([p as f64, err, r1, r2])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = CsvTable::new(&["pair", "bony_error", "law_ratio_n", "law_ratio_2n"])
        .note("bony_error = ||T_f g + T_g f + R(f,g) - fg||_2 / ||fg||_2")
        .note("law_ratio = ||P(F x G)||_{B^1_{2,2}} / (||F||_{B^{1/2}_{2,2}} ||G||_{B^{3/2}_{2,inf}})");
    let mut s = BesovSummary {
        partition_defect: c1.partition_defect().max(c2.partition_defect()),
        max_bony_error: 0.0,
        max_refinement_change: 0.0,
    };
    for r in &rows {
        t.push_nums(r)?;
        s.max_bony_error = s.max_bony_error.max(r[1]);
        s.max_refinement_change = s.max_refinement_change.max((r[3] / r[2] - 1.0).abs());
    }
    em.table("besov.csv", &t)?;
    em.json("summary.json", &s)?;
    Ok(None)
}
