//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.
//! `cargo test --test acceptance -- C3 C7` runs a subset.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::{maxwell_generator, rescaled, rk4, vec_rel, C};
use emlab::energy::energy_report;
use emlab::experiments::run::DISPERSION_PSI;
use emlab::experiments::{make_initial_data, DataSpec};
use emlab::funcalc::PairFn;
use emlab::lab::dispersion::{dispersion_decay, log_times};
use emlab::lab::heat::{heat_smoothing_check, HeatParams};
use emlab::lab::strichartz::{wave_damping_crossover, wave_frequency_law, CrossoverSettings};
use emlab::lp::{paraproduct, product_law_report, DyadicCutoffs};
use emlab::propagator::{Flow, ModePropagator, WaveMode};
use emlab::random::random_coefficients;
use emlab::solver::{integrate, integrate_mhd, MhdSolver, MhdState, NormalEMState, Solver, Trajectory};
use emlab::spectral::{leray_project, product, Field, Grid, PhysParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const Z: C = C::new(0.0, 0.0);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Runs kept for the structure check.
#[derive(Default)]
struct Runs {
    structure: Vec<(String, f64, f64, f64, f64)>,
}

impl Runs {
    fn keep(&mut self, name: String, t: &Trajectory) {
        self.structure.push((
            name,
            t.max_div_e,
            t.max_div_j,
            t.max_suppressed,
            t.vorticity_excess,
        ));
    }
}

fn torus(n: usize) -> Grid {
    Grid::new(n, 2.0 * PI).unwrap()
}

// C1: per-mode propagators against RK4 at 1e4 substeps
fn c1(_: &mut Runs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut degenerate = 0;
    for k in 0..1000 {
        let c: f64 = rng.random_range(0.5..4.0);
        let sigma: f64 = rng.random_range(0.1..2.0);
        let dt: f64 = rng.random_range(0.01..0.5);
        let y0: [C; 3] =
            std::array::from_fn(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let err = if k % 2 == 0 {
            // Maxwell block, degenerate at |xi| = sigma c / 2
            let xi = match k % 10 {
                0 => 0.5 * sigma * c + 1e-6,
                2 => 0.5 * sigma * c - 1e-6,
                _ => rng.random_range(0.05..10.0),
            };
            if k % 10 < 3 {
                degenerate += 1;
            }
            let dir: (i64, i64) = [(1, 0), (1, 1), (2, 1), (-1, 3)][rng.random_range(0..4)];
            let len = 2.0 * PI * (dir.0 as f64).hypot(dir.1 as f64) / xi;
            let g = Grid::new(8, len).unwrap();
            let i = g.index_of(dir.0, dir.1);
            let mp = ModePropagator::new(&g, &PhysParams::new(c, sigma), dt).unwrap();
            let a = maxwell_generator([g.xi1()[i], g.xi2()[i]], c, sigma);
            let want = rk4(&a, |_| [Z; 3], y0, dt, 10_000);
            let m = mp.matrix3(i, Flow::Exp);
            let got: [C; 3] = std::array::from_fn(|r| (0..3).map(|q| m[r][q] * y0[q]).sum());
            vec_rel(&got, &want)
        } else {
            // damped wave u'' + alpha u' + xi^2 u = 0, degenerate at xi = alpha / 2
            let alpha = sigma * c * c;
            let xi = match k % 10 {
                1 => 0.5 * alpha + 1e-6,
                3 => 0.5 * alpha - 1e-6,
                _ => rng.random_range(0.05..10.0),
            };
            if k % 10 < 4 {
                degenerate += 1;
            }
            let (u, du) = WaveMode { alpha, xi }.apply(PairFn::Exp, dt, y0[0], y0[1]);
            let one = C::new(1.0, 0.0);
            let a = [[Z, one], [-one * xi * xi, -one * alpha]];
            let want = rk4(&a, |_| [Z; 2], [y0[0], y0[1]], dt, 10_000);
            vec_rel(&[u, du], &want)
        };
        worst = worst.max(err);
    }
    outcome(
        worst < 1e-8,
        format!("1000 tuples ({degenerate} degenerate), max relative error {worst:.2e} (< 1e-8)"),
    )
}

// C2: energy inequality and dissipation bound on 10 small-data runs
fn c2(runs: &mut Runs) -> Outcome {
    let g = torus(64);
    let p = PhysParams::new(8.0, 1.0);
    let mut worst_def = f64::INFINITY;
    let mut worst_j: f64 = 0.0;
    let mut ok = true;
    for seed in 0..10 {
        let spec = DataSpec {
            seed: Some(seed),
            ..DataSpec::default()
        };
        let s0 = make_initial_data(&spec, &g, &p).unwrap();
        let tr = integrate(&Solver::new(&g, &p, 0.0025).unwrap(), &s0, 2.0, 4).unwrap();
        let rep = energy_report(&tr, &p, &[]).unwrap();
        let d = rep.worst_relative_deficit();
        let j = rep.max_dissipation() / rep.dissipation_bound;
        ok &= tr.failure.is_none() && d >= -1e-6 && j <= 1.0;
        worst_def = worst_def.min(d);
        worst_j = worst_j.max(j);
        runs.keep(format!("C2 seed {seed}"), &tr);
    }
    outcome(
        ok,
        format!("N=64, T=2, dt=0.0025, 10 seeds: min deficit/E0^2 {worst_def:.2e} (>= -1e-6), max J/bound {worst_j:.4} (<= 1)"),
    )
}

// C3: frequency law of the 2D wave Strichartz estimate
fn c3(_: &mut Runs) -> Outcome {
    let rep = wave_frequency_law(0.0, 4.0, f64::INFINITY, &[3, 4, 5, 6], 256, 1.0).unwrap();
    let s = rep.fit.slope;
    outcome(
        (s - 0.75).abs() <= 0.08 && rep.fit.residual < 0.1,
        format!(
            "raw j-slope {s:.4}, normalized {:.4} (0 +- 0.08), residual {:.1e}",
            s - 0.75,
            rep.fit.residual
        ),
    )
}

// C4: damping crossover in T
fn c4(_: &mut Runs) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [1.0, 8.0] {
        let rep = wave_damping_crossover(alpha, 2.0, f64::INFINITY, &CrossoverSettings::default()).unwrap();
        let (sm, lg) = (&rep.fit.small, &rep.fit.large);
        let good = (sm.slope - rep.predicted_small).abs() <= 0.08
            && (lg.slope - rep.predicted_large).abs() <= 0.08
            && sm.residual < 0.1
            && lg.residual < 0.1;
        ok &= good;
        parts.push(format!(
            "alpha={alpha}: small {:.4} (pred {}), large {:.4} (pred {})",
            sm.slope, rep.predicted_small, lg.slope, rep.predicted_large
        ));
    }
    outcome(ok, parts.join("; "))
}

// C5: decay of the oscillatory integral
fn c5(_: &mut Runs) -> Outcome {
    let times = log_times(10.0, 1000.0, 9);
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [0.0, 0.25, 0.5] {
        let rep = dispersion_decay(alpha, &times, &DISPERSION_PSI, 1e-6).unwrap();
        let good = (rep.fit.slope + 0.5).abs() <= 0.05 && rep.fit.residual < 0.1;
        ok &= good;
        parts.push(format!(
            "alpha={alpha}: {:.4}{}",
            rep.fit.slope,
            if good { "" } else { " (out of -0.5 +- 0.05)" }
        ));
    }
    outcome(ok, parts.join("; "))
}

// C6: parabolic smoothing and maximal regularity
fn c6(_: &mut Runs) -> Outcome {
    let seeds: Vec<u64> = (0..50).collect();
    let cases = [
        (
            "smoothing alpha=0",
            HeatParams::smoothing(0.0, 2.0, 2.0, 0.0, 1.0),
        ),
        (
            "smoothing alpha=1",
            HeatParams::smoothing(0.0, 2.0, 2.0, 1.0, 1.0),
        ),
        (
            "max-regularity alpha=0",
            HeatParams::forced(0.0, 2.0, 2.0, 2.0, 2.0, 1.0, 0.0, 1.0),
        ),
        (
            "max-regularity alpha=1",
            HeatParams::forced(0.0, 2.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0),
        ),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, par) in cases {
        let st = heat_smoothing_check(&par, &[32, 64, 128], &seeds).unwrap();
        ok &= st.stable(0.15);
        parts.push(format!(
            "{name}: median {:.3}, spread {:.3}, refinement {:.1e}",
            st.median, st.spread, st.refinement
        ));
    }
    outcome(ok, parts.join("; "))
}

/// Random scalar on `|xi| <= band` with a Gaussian envelope; the same
/// coefficients on every grid that resolves it.
fn band_field(g: &Grid, seed: u64, tag: u64, band: f64) -> Vec<C> {
    random_coefficients(g, seed, tag, |r| {
        if r <= band {
            (-(r * r) / (0.25 * band * band)).exp()
        } else {
            0.0
        }
    })
}

// C7: partition of unity, Bony reconstruction, product-law refinement
fn c7(_: &mut Runs) -> Outcome {
    let defect = [32, 64, 128, 256]
        .iter()
        .map(|&n| DyadicCutoffs::new(&torus(n)).partition_defect())
        .fold(0.0, f64::max);
    let g = torus(64);
    let cut = DyadicCutoffs::new(&g);
    let mut bony: f64 = 0.0;
    for p in 0..100 {
        let f = Field::scalar(&g, band_field(&g, 7, 2 * p, 10.0)).unwrap();
        let h = Field::scalar(&g, band_field(&g, 7, 2 * p + 1, 10.0)).unwrap();
        let pp = paraproduct(&f, &h, &cut).unwrap();
        let fg = product(&f, &h).unwrap();
        let sum = pp.tf_g.add(&pp.tg_f).unwrap().add(&pp.remainder).unwrap();
        bony = bony.max(sum.sub(&fg).unwrap().l2_norm() / fg.l2_norm());
    }
    let mut law: f64 = 0.0;
    for p in 0..20 {
        let ratios: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let g = torus(n);
                let v = Field::vector(
                    &g,
                    band_field(&g, 9, 3 * p, 5.0),
                    band_field(&g, 9, 3 * p + 1, 5.0),
                )
                .unwrap();
                let f = leray_project(&v).unwrap();
                let h = Field::scalar(&g, band_field(&g, 9, 3 * p + 2, 5.0)).unwrap();
                product_law_report(
                    &f,
                    &h,
                    0.5,
                    1.5,
                    (2.0, 2.0, f64::INFINITY),
                    &DyadicCutoffs::new(&g),
                )
                .unwrap()
                .ratio
            })
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::MAX, 0.0f64), |m, r| (m.0.min(*r), m.1.max(*r)));
        law = law.max(hi / lo - 1.0);
    }
    outcome(
        defect < 1e-11 && bony < 1e-11 && law <= 0.2,
        format!(
            "partition defect {defect:.1e}, Bony error {bony:.1e} (100 pairs), product-law refinement change {law:.1e} (N=32,64,128)"
        ),
    )
}

fn sq_sum(f: &Field) -> f64 {
    f.l2_norm().powi(2)
}

// C8: convergence to the limiting system as c grows
fn c8(runs: &mut Runs) -> Outcome {
    let g = torus(64);
    let (sigma, dt, t_end) = (1.0, 0.005, 1.0);
    let spec = DataSpec {
        seed: Some(7),
        e_amp: 0.0,
        ..DataSpec::default()
    };
    let s0 = make_initial_data(&spec, &g, &PhysParams::new(4.0, sigma)).unwrap();
    let mhd = integrate_mhd(
        &MhdSolver::new(&g, sigma, dt).unwrap(),
        &MhdState {
            omega: s0.omega.clone(),
            b: s0.b.clone(),
            time: 0.0,
        },
        t_end,
        1,
    )
    .unwrap();
    let zero_e = Field::zeros(&g, 2);
    let u_mhd: Vec<Field> = mhd
        .states
        .iter()
        .map(|m| {
            NormalEMState::new(m.omega.clone(), zero_e.clone(), m.b.clone(), m.time)
                .unwrap()
                .velocity()
                .unwrap()
        })
        .collect();
    let mut diffs = Vec::new();
    let mut ce = Vec::new();
    for c in [4.0, 8.0, 16.0, 32.0] {
        let p = PhysParams::new(c, sigma);
        let tr = integrate(&Solver::new(&g, &p, dt).unwrap(), &s0, t_end, 1).unwrap();
        let sq: Vec<f64> = tr
            .states
            .iter()
            .zip(&mhd.states)
            .zip(&u_mhd)
            .map(|((s, m), um)| {
                sq_sum(&s.velocity().unwrap().sub(um).unwrap()) + sq_sum(&s.b.sub(&m.b).unwrap())
            })
            .collect();
        let integral: f64 = sq.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum();
        diffs.push(integral.sqrt());
        ce.push(c * tr.cumulative.last().unwrap().grad_e_sq.max(0.0).sqrt());
        runs.keep(format!("C8 c={c}"), &tr);
    }
    let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);
    let mean = ce.iter().sum::<f64>() / ce.len() as f64;
    let dev = ce.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max);
    outcome(
        decreasing && dev <= 0.25,
        format!(
            "||(u,b) - (u,b)_mhd||: {}; c||E||_{{L2 H1}}: {} (max deviation {dev:.3})",
            diffs
                .iter()
                .map(|d| format!("{d:.2e}"))
                .collect::<Vec<_>>()
                .join(", "),
            ce.iter()
                .map(|d| format!("{d:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

// C9: parabolic scaling with lambda = 2
fn c9(runs: &mut Runs) -> Outcome {
    let g = torus(64);
    let lambda = 2.0;
    let p = PhysParams::new(4.0, 1.0);
    let spec = DataSpec {
        seed: Some(3),
        ..DataSpec::default()
    };
    let s0 = make_initial_data(&spec, &g, &p).unwrap();
    let (dt, t_end) = (0.005, 0.5);
    let base = integrate(&Solver::new(&g, &p, dt).unwrap(), &s0, t_end, 10).unwrap();
    let p2 = PhysParams::new(lambda * p.c, p.sigma);
    let s2 = rescaled(&s0, lambda);
    let l2 = lambda * lambda;
    let scaled = integrate(
        &Solver::new(s2.grid(), &p2, dt / l2).unwrap(),
        &s2,
        t_end / l2,
        10,
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in base.states.iter().zip(&scaled.states) {
        let want = rescaled(a, lambda);
        for (x, y) in [(&b.omega, &want.omega), (&b.e, &want.e), (&b.b, &want.b)] {
            let num: f64 = x
                .comps()
                .iter()
                .flatten()
                .zip(y.comps().iter().flatten())
                .map(|(u, v)| (u - v).norm_sqr())
                .sum();
            let den: f64 = y.comps().iter().flatten().map(|v| v.norm_sqr()).sum();
            worst = worst.max((num / den.max(1e-300)).sqrt());
        }
        worst = worst.max((b.time - want.time).abs());
    }
    let same_len = base.states.len() == scaled.states.len();
    runs.keep("C9 base".into(), &base);
    runs.keep("C9 scaled".into(), &scaled);
    outcome(
        same_len && worst < 1e-6,
        format!(
            "{} snapshots, max relative coefficient mismatch {worst:.2e} (< 1e-6)",
            base.states.len()
        ),
    )
}

// C10: constraints and the vorticity bound along every run above
fn c10(runs: &mut Runs) -> Outcome {
    if runs.structure.is_empty() {
        return outcome(false, "no runs recorded (C2, C8, C9 must run first)".into());
    }
    let mut m = [0.0f64; 4];
    let mut bad = Vec::new();
    for (name, de, dj, sup, vort) in &runs.structure {
        m = [m[0].max(*de), m[1].max(*dj), m[2].max(*sup), m[3].max(*vort)];
        if !(*de < 1e-12 && *dj < 1e-12 && *sup < 1e-12 && *vort <= 1e-6) {
            bad.push(name.clone());
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} runs: max div E {:.1e}, div j {:.1e}, suppressed {:.1e}, vorticity excess {:.1e}{}",
            runs.structure.len(),
            m[0],
            m[1],
            m[2],
            m[3],
            if bad.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", bad.join(", "))
            }
        ),
    )
}

type Check = fn(&mut Runs) -> Outcome;

fn main() -> ExitCode {
    let checks: [(&str, &str, Check); 10] = [
        ("C1", "propagator vs RK4 oracle", c1),
        ("C2", "energy inequality", c2),
        ("C3", "Strichartz frequency law", c3),
        ("C4", "damping crossover", c4),
        ("C5", "dispersion decay", c5),
        ("C6", "heat smoothing and maximal regularity", c6),
        ("C7", "partition, Bony, product law", c7),
        ("C8", "c -> infinity limit", c8),
        ("C9", "scaling covariance", c9),
        ("C10", "structure preservation", c10),
    ];
    // libtest-style flags from `cargo test` are ignored; bare words select criteria
    let mut wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    // C10 inspects the runs of C2, C8 and C9
    if wanted.iter().any(|w| w == "C10") {
        wanted.extend(["C2", "C8", "C9"].map(String::from));
    }
    let mut runs = Runs::default();
    let mut failed = 0;
    for (id, name, f) in checks {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        let t0 = Instant::now();
        let o = f(&mut runs);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {id} {name}: {} [{:.1}s]",
            o.detail,
            t0.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
