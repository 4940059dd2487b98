mod common;

use std::f64::consts::PI;

use common::{grid, maxwell_generator, rk4, vec_rel, C};
use emlab::funcalc::{mat2_apply, DampedPair, PairFn};
use emlab::propagator::{
    eigenvalues, propagate_damped_maxwell, scalar_propagator, wave_divided_differences, Flow, ModePropagator,
    ScalarKind, WaveMode,
};
use emlab::quadrature::gauss_legendre_on;
use emlab::spectral::{leray_project, Field, Grid, PhysParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const Z: C = C::new(0.0, 0.0);

#[test]
fn eigenvalue_examples() {
    let (p, m) = eigenvalues(1.0, 0.0);
    assert!((p - C::new(0.0, 1.0)).norm() < 1e-15 && (m - C::new(0.0, -1.0)).norm() < 1e-15);
    let (p, m) = eigenvalues(1.0, 2.0);
    assert!((p + 1.0).norm() < 1e-15 && (m + 1.0).norm() < 1e-15);
    let (p, m) = eigenvalues(0.3, 1.0);
    assert!((p + 0.1).norm() < 1e-15 && (m + 0.9).norm() < 1e-15);
}

#[test]
fn eigenvalue_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let xi: f64 = rng.random_range(0.0..10.0);
        let a: f64 = rng.random_range(0.0..10.0);
        let (p, m) = eigenvalues(xi, a);
        let scale = 1.0 + a + xi;
        assert!((p + m + a).norm() < 1e-14 * scale, "{xi} {a}");
        assert!((p * m - xi * xi).norm() < 1e-14 * scale * scale, "{xi} {a}");
    }
}

#[test]
fn undamped_block_is_unitary() {
    for kappa in [0.0, 0.3, 1.0, 17.0] {
        let pair = DampedPair::new(0.0, kappa);
        let m = pair.matrix(PairFn::Exp, 0.05);
        for i in 0..2 {
            for j in 0..2 {
                let d: C = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).norm() < 1e-12);
            }
        }
        let mut v = [C::new(0.3, -0.1), C::new(-0.7, 0.2)];
        let e0 = v[0].norm_sqr() + v[1].norm_sqr();
        for _ in 0..1000 {
            v = mat2_apply(&m, v);
        }
        assert!((v[0].norm_sqr() + v[1].norm_sqr() - e0).abs() < 1e-12);
    }
}

#[test]
fn zero_mode_decays_electric_field_only() {
    let g = grid(8);
    let p = PhysParams::new(2.0, 0.5);
    let (dt, steps) = (0.1, 20);
    let mp = ModePropagator::new(&g, &p, dt).unwrap();
    let mut e = Field::zeros(&g, 2);
    e.comp_mut(0)[0] = C::new(1.0, 0.0);
    e.comp_mut(1)[0] = C::new(-2.0, 0.0);
    let mut b = Field::zeros(&g, 1);
    b.comp_mut(0)[0] = C::new(0.7, 0.0);
    let (mut ee, mut bb) = (e.clone(), b.clone());
    for _ in 0..steps {
        let (a, c) = mp.apply(Flow::Exp, &ee, &bb).unwrap();
        ee = a;
        bb = c;
    }
    let decay = (-p.damping() * dt * steps as f64).exp();
    assert!((ee.comp(0)[0] - e.comp(0)[0] * decay).norm() < 1e-14);
    assert!((ee.comp(1)[0] - e.comp(1)[0] * decay).norm() < 1e-14);
    assert_eq!(bb.comp(0)[0], C::new(0.7, 0.0));
}

/// Grid on which lattice point `(1, 0)` has modulus `xi`.
fn grid_with_mode(xi: f64) -> (Grid, usize) {
    let g = Grid::new(8, 2.0 * PI / xi).unwrap();
    let i = g.index_of(1, 0);
    (g, i)
}

#[test]
fn lattice_modes_match_rk4() {
    let g = grid(16);
    let p = PhysParams::new(3.0, 0.4);
    let dt = 0.2;
    let mp = ModePropagator::new(&g, &p, dt).unwrap();
    for (k1, k2) in [(1, 0), (2, -3), (5, 5), (0, 7), (-4, 1)] {
        let i = g.index_of(k1, k2);
        let a = maxwell_generator([g.xi1()[i], g.xi2()[i]], p.c, p.sigma);
        let y0 = [C::new(0.3, 0.1), C::new(-0.5, 0.2), C::new(0.9, -0.4)];
        let want = rk4(&a, |_| [Z; 3], y0, dt, 10_000);
        let m = mp.matrix3(i, Flow::Exp);
        let got: [C; 3] = std::array::from_fn(|r| (0..3).map(|c| m[r][c] * y0[c]).sum());
        assert!(
            vec_rel(&got, &want) < 1e-8,
            "({k1}, {k2}): {}",
            vec_rel(&got, &want)
        );
    }
}

#[test]
fn semigroup_property() {
    let g = grid(16);
    let p = PhysParams::new(2.0, 0.7);
    let (a, b) = (
        ModePropagator::new(&g, &p, 0.13).unwrap(),
        ModePropagator::new(&g, &p, 0.29).unwrap(),
    );
    let ab = ModePropagator::new(&g, &p, 0.42).unwrap();
    for i in 0..g.len() {
        let (ma, mb, mab) = (
            a.matrix3(i, Flow::Exp),
            b.matrix3(i, Flow::Exp),
            ab.matrix3(i, Flow::Exp),
        );
        for r in 0..3 {
            for c in 0..3 {
                let prod: C = (0..3).map(|k| ma[r][k] * mb[k][c]).sum();
                assert!((prod - mab[r][c]).norm() < 1e-12, "mode {i}");
            }
        }
    }
    assert!(ab.max_spectral_radius() <= 1.0);
}

#[test]
fn damped_energy_balance() {
    let g = grid(16);
    let p = PhysParams::new(1.5, 0.6);
    let e0 = leray_project(&common::vector(&g, 3, 0, 6.0)).unwrap();
    let b0 = common::scalar(&g, 3, 5, 6.0);
    let t_end = 1.0;
    let traj = propagate_damped_maxwell(&p, &e0, &b0, None, t_end, 0.05, 20).unwrap();
    let (e_t, b_t) = (traj.e.last().unwrap(), traj.b.last().unwrap());
    // exact evolution at arbitrary times for the dissipation integral
    let mut dissipated = 0.0;
    for k in 0..40 {
        let (x, w) = gauss_legendre_on(10, k as f64 / 40.0, (k + 1) as f64 / 40.0);
        for (s, ws) in x.iter().zip(&w) {
            let (e, _) = ModePropagator::new(&g, &p, *s)
                .unwrap()
                .apply(Flow::Exp, &e0, &b0)
                .unwrap();
            dissipated += ws * 2.0 * p.damping() * e.l2_norm().powi(2);
        }
    }
    let energy = |e: &Field, b: &Field| e.l2_norm().powi(2) + b.l2_norm().powi(2);
    let lhs = energy(e_t, b_t) + dissipated;
    assert!((lhs / energy(&e0, &b0) - 1.0).abs() < 1e-10);
    let (ex, bx) = ModePropagator::new(&g, &p, t_end)
        .unwrap()
        .apply(Flow::Exp, &e0, &b0)
        .unwrap();
    assert!(common::rel(e_t, &ex) < 1e-12 && common::rel(b_t, &bx) < 1e-12);
}

fn fitted_rate(times: &[f64], vals: &[f64]) -> f64 {
    let n = times.len() as f64;
    let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let (mx, my) = (times.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = times.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = times.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}

#[test]
fn high_shell_envelope_rate() {
    let g = grid(64);
    let p = PhysParams::new(1.0, 1.0);
    // shell 2^3 >= sigma c
    let shell = |r: f64| emlab::lp::phi(r / 8.0);
    let e0 = Field::vector(
        &g,
        emlab::random::random_coefficients(&g, 2, 0, shell),
        emlab::random::random_coefficients(&g, 2, 1, shell),
    )
    .unwrap();
    let e0 = leray_project(&e0).unwrap();
    let b0 = Field::scalar(&g, emlab::random::random_coefficients(&g, 2, 2, shell)).unwrap();
    let traj = propagate_damped_maxwell(&p, &e0, &b0, None, 10.0, 0.1, 5).unwrap();
    let norms: Vec<f64> = traj
        .e
        .iter()
        .zip(&traj.b)
        .map(|(e, b)| (e.l2_norm().powi(2) + b.l2_norm().powi(2)).sqrt())
        .collect();
    let rate = fitted_rate(&traj.times, &norms);
    let want = 0.5 * p.damping();
    assert!((rate / want - 1.0).abs() < 0.05, "{rate} vs {want}");
}

#[test]
fn low_mode_parabolic_rate() {
    let g = grid(16);
    let p = PhysParams::new(100.0, 1.0);
    let b0 = Field::from_fn(&g, 1, |x, _| [x.cos(), 0.0]);
    let traj = propagate_damped_maxwell(&p, &Field::zeros(&g, 2), &b0, None, 3.0, 0.01, 10).unwrap();
    let (ts, vs): (Vec<f64>, Vec<f64>) = traj
        .times
        .iter()
        .zip(&traj.b)
        .filter(|(t, _)| **t >= 0.5)
        .map(|(t, b)| (*t, b.l2_norm()))
        .unzip();
    let rate = fitted_rate(&ts, &vs);
    assert!((rate / (1.0 / p.sigma) - 1.0).abs() < 0.1, "{rate}");
}

#[test]
fn dt_must_divide_horizon() {
    let g = grid(8);
    let z = Field::zeros(&g, 2);
    let b = Field::zeros(&g, 1);
    assert!(propagate_damped_maxwell(&PhysParams::new(1.0, 1.0), &z, &b, None, 1.0, 0.3, 1).is_err());
}

#[test]
fn schrodinger_modulus_is_constant() {
    let g = grid(16);
    let f: Vec<C> = (0..g.len())
        .map(|i| {
            if i == g.index_of(3, 2) {
                C::new(0.6, 0.8)
            } else {
                Z
            }
        })
        .collect();
    let tr = scalar_propagator(ScalarKind::Schrodinger, 0.0, &g, &f, None, None, 5.0, 0.01, 50).unwrap();
    for s in &tr.states {
        assert!((s.u[g.index_of(3, 2)].norm() - 1.0).abs() < 1e-13);
    }
}

#[test]
fn undamped_wave_energy() {
    let g = grid(32);
    let f = common::scalar(&g, 8, 0, 8.0);
    let gv = common::scalar(&g, 8, 1, 8.0);
    let tr = scalar_propagator(
        ScalarKind::Wave,
        0.0,
        &g,
        f.comp(0),
        Some(gv.comp(0)),
        None,
        4.0,
        0.02,
        20,
    )
    .unwrap();
    let energy = |s: &emlab::propagator::ScalarState| -> f64 {
        (0..g.len())
            .map(|i| s.du.as_ref().unwrap()[i].norm_sqr() + g.xi_sq()[i] * s.u[i].norm_sqr())
            .sum()
    };
    let e0 = energy(&tr.states[0]);
    for s in &tr.states {
        assert!((energy(s) / e0 - 1.0).abs() < 1e-10);
    }
}

#[test]
fn degenerate_wave_mode() {
    let m = WaveMode { alpha: 2.0, xi: 1.0 };
    for t in [0.1, 0.7, 2.0, 5.0] {
        let (u, du) = m.apply(PairFn::Exp, t, C::new(1.0, 0.0), Z);
        assert!((u.re - (1.0 + t) * (-t).exp()).abs() < 1e-13);
        let a = [[Z, C::new(1.0, 0.0)], [C::new(-1.0, 0.0), C::new(-2.0, 0.0)]];
        let want = rk4(&a, |_| [Z; 2], [C::new(1.0, 0.0), Z], t, 10_000);
        assert!(vec_rel(&[u, du], &want) < 1e-8);
    }
}

#[test]
fn multiplier_continuity_at_degeneracy() {
    let alpha: f64 = 1.3;
    // the true offset from the limit is about t^3 alpha eps e^{-alpha t/2} / 6
    for t in [0.2, 1.0, 2.0] {
        let want = t * (-0.5 * alpha * t).exp();
        for xi in [0.5 * alpha - 1e-6, 0.5 * alpha, 0.5 * alpha + 1e-6] {
            let (d1, _) = wave_divided_differences(xi, alpha, t);
            assert!((d1 - want).abs() < 1e-6, "{xi} {t}");
        }
        // just inside and outside the series switch
        let eps = 1e-4 / t;
        let (a, _) = wave_divided_differences(0.5 * alpha - eps, alpha, t);
        let (b, _) = wave_divided_differences(0.5 * alpha + eps, alpha, t);
        let (c, _) = wave_divided_differences(0.5 * alpha, alpha, t);
        assert!((a - c).abs() < 1e-9 + 2.0 * eps * t * t && (b - c).abs() < 1e-9 + 2.0 * eps * t * t);
    }
}

#[test]
fn pseudo_random_modes_match_rk4() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..50 {
        let c: f64 = rng.random_range(0.5..4.0);
        let sigma: f64 = rng.random_range(0.1..2.0);
        let xi = if k % 5 == 0 {
            0.5 * sigma * c + 1e-6
        } else {
            rng.random_range(0.1..10.0)
        };
        let dt: f64 = rng.random_range(0.01..0.5);
        let (g, i) = grid_with_mode(xi);
        let mp = ModePropagator::new(&g, &PhysParams::new(c, sigma), dt).unwrap();
        let a = maxwell_generator([g.xi1()[i], g.xi2()[i]], c, sigma);
        let y0 = [C::new(1.0, 0.0), C::new(0.0, 0.5), C::new(-0.3, 0.2)];
        let want = rk4(&a, |_| [Z; 3], y0, dt, 10_000);
        let m = mp.matrix3(i, Flow::Exp);
        let got: [C; 3] = std::array::from_fn(|r| (0..3).map(|q| m[r][q] * y0[q]).sum());
        assert!(vec_rel(&got, &want) < 1e-8);
    }
}

#[test]
fn etd2_is_second_order() {
    let g = grid(8);
    let i = g.index_of(2, 1);
    let (alpha, om) = (0.5, 1.7);
    let lam = C::new(-alpha, g.xi_mag(i));
    let t_end = 2.0;
    let exact = {
        let iw = C::new(0.0, om);
        ((iw * t_end).exp() - (lam * t_end).exp()) / (iw - lam)
    };
    let mut errs = Vec::new();
    let dts = [0.2, 0.1, 0.05, 0.025];
    for dt in dts {
        let steps = (t_end / dt).round() as usize;
        let forcing: Vec<Vec<C>> = (0..=steps)
            .map(|s| {
                let mut v = vec![Z; g.len()];
                v[i] = C::new(0.0, om * s as f64 * dt).exp();
                v
            })
            .collect();
        let tr = scalar_propagator(
            ScalarKind::HalfWavePlus,
            alpha,
            &g,
            &vec![Z; g.len()],
            None,
            Some(&forcing),
            t_end,
            dt,
            steps,
        )
        .unwrap();
        errs.push((tr.states.last().unwrap().u[i] - exact).norm());
    }
    let slope = (errs[0].ln() - errs[3].ln()) / (dts[0].ln() - dts[3].ln());
    assert!((slope - 2.0).abs() < 0.1, "{slope} {errs:?}");
}
