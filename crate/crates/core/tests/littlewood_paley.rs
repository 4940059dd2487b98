mod common;

use common::{grid, rel, scalar, vector};
use emlab::lp::{
    besov_norm, block_lp_norms, chemin_lerner_norm, dyadic_block, paraproduct, phi, product_law_report,
    time_besov_norm, DyadicCutoffs, NormSpec, Split, TimeSeriesNorms, PHI_PLATEAU,
};
use emlab::spectral::{leray_project, lp_norm, product, Field};
use emlab::EmError;
use num_complex::Complex64;
use proptest::prelude::*;

fn mode(k1: f64, k2: f64) -> impl Fn(f64, f64) -> [f64; 2] {
    move |x, y| [(k1 * x + k2 * y).cos(), 0.0]
}

#[test]
fn partition_of_unity() {
    for n in [16, 32, 64, 128] {
        assert!(DyadicCutoffs::new(&grid(n)).partition_defect() < 1e-12);
    }
}

#[test]
fn plateau_mode_sits_in_one_block() {
    let g = grid(32);
    let cut = DyadicCutoffs::new(&g);
    for (k1, k2, k) in [
        (4.0, 0.0, 2),
        (5.0, 0.0, 2),
        (3.0, 4.0, 2),
        (8.0, 0.0, 3),
        (2.0, 0.0, 1),
    ] {
        let f = Field::from_fn(&g, 1, mode(k1, k2));
        for j in cut.block_indices() {
            let b = dyadic_block(&f, j, &cut).unwrap();
            if j == k {
                assert!(rel(&b, &f) < 1e-14, "({k1}, {k2}) block {j}");
            } else {
                assert!(b.l2_norm() < 1e-14 * f.l2_norm(), "({k1}, {k2}) block {j}");
            }
        }
    }
    assert_eq!(phi(PHI_PLATEAU.0), 1.0);
    assert_eq!(phi(PHI_PLATEAU.1), 1.0);
}

#[test]
fn blocks_out_of_range_fail() {
    let g = grid(16);
    let cut = DyadicCutoffs::new(&g);
    let f = scalar(&g, 1, 0, 4.0);
    assert!(matches!(
        dyadic_block(&f, cut.k_max + 1, &cut),
        Err(EmError::OutOfRange { .. })
    ));
    assert!(dyadic_block(&f, cut.k_min - 1, &cut).is_err());
    for k in cut.block_indices() {
        assert_eq!(
            dyadic_block(&Field::zeros(&g, 1), k, &cut).unwrap().l2_norm(),
            0.0
        );
    }
}

#[test]
fn single_block_besov_norm() {
    let g = grid(32);
    let cut = DyadicCutoffs::new(&g);
    let f = Field::from_fn(&g, 1, mode(3.0, 4.0));
    for (s, p, q) in [
        (0.5, 2.0, 1.0),
        (-1.0, 4.0, 2.0),
        (2.0, f64::INFINITY, f64::INFINITY),
    ] {
        let want = 2f64.powf(2.0 * s) * lp_norm(&f, p).unwrap();
        let got = besov_norm(&f, &NormSpec::besov(s, p, q), &cut).unwrap();
        assert!((got - want).abs() < 1e-12 * want, "{s} {p} {q}: {got} vs {want}");
    }
}

#[test]
fn besov_l2_near_orthogonality() {
    let g = grid(64);
    let cut = DyadicCutoffs::new(&g);
    for seed in 0..20 {
        let f = scalar(&g, seed, 0, g.band_radius());
        let b = besov_norm(&f, &NormSpec::besov(0.0, 2.0, 2.0), &cut).unwrap();
        let l2 = lp_norm(&f, 2.0).unwrap();
        assert!((b / l2 - 1.0).abs() < 0.05, "seed {seed}: {}", b / l2);
    }
}

#[test]
fn split_norms_add_up() {
    let g = grid(64);
    let cut = DyadicCutoffs::new(&g);
    let f = scalar(&g, 2, 0, g.band_radius());
    for th in [0.5, 3.0, 8.0, 100.0] {
        let spec = NormSpec::besov(0.7, 3.0, 1.0);
        let all = besov_norm(&f, &spec, &cut).unwrap();
        let lo = besov_norm(&f, &spec.with_split(Split::Below(th)), &cut).unwrap();
        let hi = besov_norm(&f, &spec.with_split(Split::Above(th)), &cut).unwrap();
        assert!((lo + hi - all).abs() < 1e-12 * all);
    }
}

#[test]
fn chemin_lerner_examples() {
    let g = grid(32);
    let cut = DyadicCutoffs::new(&g);
    let f = scalar(&g, 5, 0, 10.0);
    let times: Vec<f64> = (0..11).map(|i| 0.3 * i as f64).collect();
    let fields = vec![f.clone(); times.len()];
    let ts = TimeSeriesNorms::from_fields(&times, &fields, 2.0, &cut).unwrap();
    let b = besov_norm(&f, &NormSpec::besov(0.5, 2.0, 1.0), &cut).unwrap();
    let cl = chemin_lerner_norm(&ts, &NormSpec::chemin_lerner(0.5, 2.0, 1.0, 3.0)).unwrap();
    assert!((cl - 3f64.powf(1.0 / 3.0) * b).abs() < 1e-12 * b);

    // r = q: the two orders of integration agree
    let evolving: Vec<Field> = times.iter().map(|t| f.scale((-t).exp())).collect();
    let ts = TimeSeriesNorms::from_fields(&times, &evolving, 2.0, &cut).unwrap();
    let spec = NormSpec::chemin_lerner(1.0, 2.0, 2.0, 2.0);
    let a = chemin_lerner_norm(&ts, &spec).unwrap();
    let b = time_besov_norm(&ts, &spec).unwrap();
    assert!((a - b).abs() < 1e-12 * a);

    // one block, r = inf
    let ts = TimeSeriesNorms::new(vec![0.0, 1.0, 2.0], 2, vec![vec![1.0, 3.0, 2.0]]).unwrap();
    let v = chemin_lerner_norm(&ts, &NormSpec::chemin_lerner(1.0, 2.0, 1.0, f64::INFINITY)).unwrap();
    assert_eq!(v, 12.0);
    assert!(matches!(
        TimeSeriesNorms::new(vec![], 0, vec![]),
        Err(EmError::EmptySeries)
    ));
    assert!(TimeSeriesNorms::new(vec![1.0, 1.0], 0, vec![vec![0.0, 0.0]]).is_err());
}

#[test]
fn paraproduct_frequency_separated() {
    let g = grid(64);
    let cut = DyadicCutoffs::new(&g);
    let f = Field::from_fn(&g, 1, mode(1.0, 0.0));
    let h = Field::from_fn(&g, 1, mode(0.0, 16.0));
    let p = paraproduct(&f, &h, &cut).unwrap();
    let fh = product(&f, &h).unwrap();
    assert!(rel(&p.tf_g, &fh) < 1e-13);
    assert!(p.tg_f.l2_norm() < 1e-14 && p.remainder.l2_norm() < 1e-14);
}

#[test]
fn paraproduct_diagonal() {
    let g = grid(32);
    let cut = DyadicCutoffs::new(&g);
    let f = Field::from_fn(&g, 1, mode(3.0, 4.0));
    let p = paraproduct(&f, &f, &cut).unwrap();
    assert!(rel(&p.remainder, &product(&f, &f).unwrap()) < 1e-13);
    assert!(p.tf_g.l2_norm() < 1e-14 && p.tg_f.l2_norm() < 1e-14);
}

#[test]
fn bony_reconstruction_random_pairs() {
    let g = grid(32);
    let cut = DyadicCutoffs::new(&g);
    for seed in 0..100 {
        let f = scalar(&g, seed, 0, 10.0);
        let h = scalar(&g, seed, 1, 10.0);
        let p = paraproduct(&f, &h, &cut).unwrap();
        let sum = p.tf_g.add(&p.tg_f).unwrap().add(&p.remainder).unwrap();
        assert!(rel(&sum, &product(&f, &h).unwrap()) < 1e-11);
    }
}

#[test]
fn product_law_examples() {
    let g = grid(32);
    let cut = DyadicCutoffs::new(&g);
    let f = leray_project(&vector(&g, 1, 0, 5.0)).unwrap();
    let r = product_law_report(
        &f,
        &Field::zeros(&g, 1),
        0.5,
        1.5,
        (2.0, 2.0, f64::INFINITY),
        &cut,
    )
    .unwrap();
    assert_eq!(r.lhs, 0.0);
    let b = scalar(&g, 1, 9, 5.0);
    let q = (2.0, 2.0, f64::INFINITY);
    assert!(product_law_report(&f, &b, 1.0, 0.5, q, &cut).is_err());
    assert!(product_law_report(&f, &b, 0.5, 2.0, q, &cut).is_err());
    assert!(product_law_report(&f, &b, -1.0, 0.5, q, &cut).is_err());
    assert!(product_law_report(&f, &b, 0.5, 1.5, (2.0, 2.0, 2.0), &cut).is_err());

    // F = (0, cos x1), G = cos(8 x2): F x G = (cos x1 cos 8 x2, 0) sits on the
    // circle |xi| = sqrt(65), on the plateau of block 3, and P keeps 64/65 of it.
    let ff = Field::from_fn(&g, 2, |x, _| [0.0, x.cos()]);
    let gg = Field::from_fn(&g, 1, mode(0.0, 8.0));
    let r = product_law_report(&ff, &gg, 0.5, 1.5, q, &cut).unwrap();
    assert!(r.ratio.is_finite() && r.ratio > 0.0);
    let prod = Field::from_fn(&g, 2, |x, y| [x.cos() * (8.0 * y).cos(), 0.0]);
    let want = 8.0 * (64.0f64 / 65.0).sqrt() * prod.l2_norm();
    assert!((r.lhs - want).abs() < 1e-12 * want, "{} vs {want}", r.lhs);
}

#[test]
fn bernstein_constant_is_stable() {
    let mut ratios = Vec::new();
    for (n, ks) in [(64usize, 2..=4), (128, 2..=5)] {
        let g = grid(n);
        let cut = DyadicCutoffs::new(&g);
        let delta = Field::scalar(&g, vec![Complex64::new(1.0, 0.0); g.len()]).unwrap();
        for k in ks {
            let b = dyadic_block(&delta, k, &cut).unwrap();
            let r = lp_norm(&b, f64::INFINITY).unwrap() / (2f64.powi(k) * lp_norm(&b, 2.0).unwrap());
            ratios.push(r);
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    for r in &ratios {
        assert!((r / mean - 1.0).abs() < 0.1, "{ratios:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blocks_reconstruct(seed in 0u64..10_000, n in prop::sample::select(vec![16usize, 32, 64])) {
        let g = grid(n);
        let cut = DyadicCutoffs::new(&g);
        let f = scalar(&g, seed, 0, g.band_radius());
        let mut sum = Field::zeros(&g, 1);
        for k in cut.block_indices() {
            sum = sum.add(&dyadic_block(&f, k, &cut).unwrap()).unwrap();
        }
        prop_assert!(rel(&sum, &f) < 1e-12);
    }

    #[test]
    fn besov_is_homogeneous(seed in 0u64..10_000, a in 0.1f64..10.0, s in -1.0f64..2.0) {
        let g = grid(16);
        let cut = DyadicCutoffs::new(&g);
        let f = scalar(&g, seed, 0, g.band_radius());
        let spec = NormSpec::besov(s, 3.0, 2.0);
        let n1 = besov_norm(&f.scale(a), &spec, &cut).unwrap();
        let n0 = besov_norm(&f, &spec, &cut).unwrap();
        prop_assert!((n1 - a * n0).abs() < 1e-12 * n1);
    }

    #[test]
    fn block_norms_nonnegative(seed in 0u64..10_000, p in 1.0f64..8.0) {
        let g = grid(16);
        let cut = DyadicCutoffs::new(&g);
        let f = scalar(&g, seed, 0, g.band_radius());
        prop_assert!(block_lp_norms(&f, p, &cut).unwrap().iter().all(|v| *v >= 0.0));
    }
}
