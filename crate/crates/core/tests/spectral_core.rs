mod common;

use std::f64::consts::PI;

use common::{grid, rel, scalar, vector};
use emlab::spectral::{biot_savart, cross_normal, grad_dot, leray_project, lp_norm, Field, Grid};
use emlab::EmError;
use proptest::prelude::*;

#[test]
fn grid_rejects_bad_sizes() {
    assert!(Grid::new(4, 1.0).is_err());
    assert!(Grid::new(24, 1.0).is_err());
    assert!(Grid::new(16, 0.0).is_err());
    assert!(Grid::new(16, 3.0).is_ok());
}

#[test]
fn leray_kills_gradients() {
    for n in [16, 32, 64] {
        let g = grid(n);
        let v = Field::from_fn(&g, 2, |x, _| [x.cos(), 0.0]);
        assert!(leray_project(&v).unwrap().l2_norm() < 1e-13);
        let h = scalar(&g, 3, 0, 6.0);
        assert!(leray_project(&h.gradient().unwrap()).unwrap().l2_norm() < 1e-13 * h.l2_norm());
    }
}

#[test]
fn leray_fixes_solenoidal_fields_and_is_idempotent() {
    for n in [16, 32, 64] {
        let g = grid(n);
        let v = Field::from_fn(&g, 2, |x, y| [-y.sin(), x.sin()]);
        assert!(rel(&leray_project(&v).unwrap(), &v) < 1e-13);
        let w = vector(&g, 9, 0, 5.0);
        let p = leray_project(&w).unwrap();
        assert!(rel(&leray_project(&p).unwrap(), &p) < 1e-15);
        assert!(p.divergence().unwrap().l2_norm() < 1e-13 * p.l2_norm());
    }
}

#[test]
fn biot_savart_single_mode() {
    let g = grid(32);
    let w = Field::from_fn(&g, 1, |x, _| [x.sin(), 0.0]);
    let u = biot_savart(&w).unwrap();
    let want = Field::from_fn(&g, 2, |x, _| [0.0, -x.cos()]);
    assert!(rel(&u, &want) < 1e-13);
    assert_eq!(biot_savart(&Field::zeros(&g, 1)).unwrap().l2_norm(), 0.0);
}

#[test]
fn biot_savart_rejects_mean() {
    let g = grid(16);
    let w = Field::from_fn(&g, 1, |x, _| [1.0 + x.sin(), 0.0]);
    assert!(matches!(biot_savart(&w), Err(EmError::NonZeroMean(_))));
}

#[test]
fn cross_normal_identity() {
    let g = grid(16);
    let u = Field::from_fn(&g, 2, |_, _| [1.0, 0.0]);
    let b = Field::from_fn(&g, 1, |_, _| [1.0, 0.0]);
    let want = Field::from_fn(&g, 2, |_, _| [0.0, -1.0]);
    assert!(rel(&cross_normal(&u, &b).unwrap(), &want) < 1e-14);
    assert_eq!(cross_normal(&Field::zeros(&g, 2), &b).unwrap().l2_norm(), 0.0);
}

#[test]
fn cross_normal_matches_oversampled_product() {
    let (g, big) = (grid(32), grid(64));
    let band = g.band_radius() / 2.0;
    let u = vector(&g, 4, 0, band);
    let b = scalar(&g, 4, 7, band);
    let got = cross_normal(&u, &b).unwrap();
    // same coefficients on the finer grid, product in physical space
    let lift = |f: &Field| -> Vec<Vec<f64>> {
        f.comps()
            .iter()
            .map(|c| {
                let mut out = vec![num_complex::Complex64::new(0.0, 0.0); big.len()];
                for i in 0..g.len() {
                    let (k1, k2) = (
                        emlab::spectral::signed_index(i / g.n(), g.n()),
                        emlab::spectral::signed_index(i % g.n(), g.n()),
                    );
                    out[big.index_of(k1, k2)] = c[i];
                }
                big.to_physical(&out)
            })
            .collect()
    };
    let (up, bp) = (lift(&u), lift(&b));
    let prod = Field::from_physical(
        &big,
        &[
            up[1].iter().zip(&bp[0]).map(|(a, b)| a * b).collect(),
            up[0].iter().zip(&bp[0]).map(|(a, b)| -a * b).collect(),
        ],
    )
    .unwrap();
    let mut err = 0.0;
    let mut tot = 0.0;
    for c in 0..2 {
        for i in 0..g.len() {
            let (k1, k2) = (
                emlab::spectral::signed_index(i / g.n(), g.n()),
                emlab::spectral::signed_index(i % g.n(), g.n()),
            );
            let want = if g.in_band(i) {
                prod.comp(c)[big.index_of(k1, k2)]
            } else {
                0.0.into()
            };
            err += (got.comp(c)[i] - want).norm_sqr();
            tot += want.norm_sqr();
        }
    }
    assert!((err / tot).sqrt() < 1e-12, "{}", (err / tot).sqrt());
}

#[test]
fn grad_dot_directional_derivative() {
    let g = grid(32);
    let u = Field::from_fn(&g, 2, |_, _| [1.0, 0.0]);
    let f = Field::from_fn(&g, 1, |x, _| [x.sin(), 0.0]);
    let want = Field::from_fn(&g, 1, |x, _| [x.cos(), 0.0]);
    assert!(rel(&grad_dot(&u, &f).unwrap(), &want) < 1e-13);
    assert_eq!(grad_dot(&u, &Field::zeros(&g, 1)).unwrap().l2_norm(), 0.0);
}

#[test]
fn lp_norm_of_sine() {
    let g = grid(64);
    let f = Field::from_fn(&g, 1, |x, _| [x.sin(), 0.0]);
    assert!((lp_norm(&f, 2.0).unwrap() - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
    assert!((lp_norm(&f, f64::INFINITY).unwrap() - 1.0).abs() <= (2.0 * PI / 64.0).powi(2));
    assert_eq!(lp_norm(&Field::zeros(&g, 1), 3.0).unwrap(), 0.0);
    assert!(lp_norm(&f, 0.5).is_err());
}

#[test]
fn skew_symmetry_over_seeds() {
    let g = grid(32);
    let band = g.band_radius() / 2.0;
    for seed in 0..100 {
        let u = biot_savart(&scalar(&g, seed, 1, band)).unwrap();
        let f = scalar(&g, seed, 2, band);
        let a = grad_dot(&u, &f).unwrap().inner(&f).unwrap();
        assert!(
            a.abs() < 1e-12 * f.l2_norm().powi(2) * u.l2_norm().max(1.0),
            "seed {seed}: {a}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip(seed in 0u64..10_000, n in prop::sample::select(vec![8usize, 16, 32])) {
        let g = grid(n);
        let f = scalar(&g, seed, 0, g.band_radius());
        let back = Field::from_physical(&g, &f.to_physical()).unwrap();
        prop_assert!(rel(&back, &f) < 1e-13);
    }

    #[test]
    fn parseval(seed in 0u64..10_000, len in 0.5f64..20.0) {
        let g = Grid::new(16, len).unwrap();
        let f = scalar(&g, seed, 0, g.band_radius());
        let sum: f64 = f.comp(0).iter().map(|z| z.norm_sqr()).sum();
        let l2 = lp_norm(&f, 2.0).unwrap();
        prop_assert!((l2 * l2 - len * len * sum).abs() < 1e-12 * l2 * l2);
        prop_assert!((f.l2_norm() - l2).abs() < 1e-12 * l2);
    }

    #[test]
    fn biot_savart_round_trip(seed in 0u64..10_000) {
        let g = grid(32);
        let w = scalar(&g, seed, 0, g.band_radius());
        let u = biot_savart(&w).unwrap();
        prop_assert!(rel(&u.curl().unwrap(), &w) < 1e-12);
        prop_assert!(u.divergence().unwrap().l2_norm() < 1e-12 * w.l2_norm());
    }

    #[test]
    fn leray_idempotent(seed in 0u64..10_000) {
        let g = grid(16);
        let p = leray_project(&vector(&g, seed, 0, g.band_radius())).unwrap();
        prop_assert!(rel(&leray_project(&p).unwrap(), &p) < 1e-15);
    }
}
