#![allow(dead_code)]

use std::f64::consts::PI;

use emlab::random::random_coefficients;
use emlab::spectral::{Field, Grid};

pub fn grid(n: usize) -> Grid {
    Grid::new(n, 2.0 * PI).unwrap()
}

/// Random real zero-mean scalar with modes up to `band`.
pub fn scalar(g: &Grid, seed: u64, tag: u64, band: f64) -> Field {
    Field::scalar(
        g,
        random_coefficients(g, seed, tag, |r| if r <= band { 1.0 } else { 0.0 }),
    )
    .unwrap()
}

pub fn vector(g: &Grid, seed: u64, tag: u64, band: f64) -> Field {
    let env = |r: f64| if r <= band { 1.0 } else { 0.0 };
    Field::vector(
        g,
        random_coefficients(g, seed, tag, env),
        random_coefficients(g, seed, tag + 1, env),
    )
    .unwrap()
}

pub fn rel(a: &Field, b: &Field) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm().max(1e-300)
}

pub type C = num_complex::Complex64;

/// Classical RK4 for `y' = A y + f(t)` with `steps` equal steps on `[0, h]`.
pub fn rk4<const D: usize>(
    a: &[[C; D]; D],
    f: impl Fn(f64) -> [C; D],
    y0: [C; D],
    h: f64,
    steps: usize,
) -> [C; D] {
    let rhs = |t: f64, y: &[C; D]| -> [C; D] {
        let src = f(t);
        let mut out = [C::new(0.0, 0.0); D];
        for i in 0..D {
            out[i] = src[i];
            for j in 0..D {
                out[i] += a[i][j] * y[j];
            }
        }
        out
    };
    let axpy = |y: &[C; D], k: &[C; D], s: f64| -> [C; D] {
        let mut out = *y;
        for i in 0..D {
            out[i] += k[i] * s;
        }
        out
    };
    let dt = h / steps as f64;
    let mut y = y0;
    for n in 0..steps {
        let t = n as f64 * dt;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + 0.5 * dt, &axpy(&y, &k1, 0.5 * dt));
        let k3 = rhs(t + 0.5 * dt, &axpy(&y, &k2, 0.5 * dt));
        let k4 = rhs(t + dt, &axpy(&y, &k3, dt));
        for i in 0..D {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    y
}

pub fn vec_rel<const D: usize>(a: &[C; D], b: &[C; D]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(1e-300)).sqrt()
}

/// Maxwell generator on `(E1, E2, b)` at wave vector `xi`:
/// `E' = c i (xi2, -xi1) b - sigma c^2 E`, `b' = -c i (xi1 E2 - xi2 E1)`.
pub fn maxwell_generator(xi: [f64; 2], c: f64, sigma: f64) -> [[C; 3]; 3] {
    let i = C::new(0.0, 1.0);
    let z = C::new(0.0, 0.0);
    let d = C::new(-sigma * c * c, 0.0);
    [
        [d, z, i * c * xi[1]],
        [z, d, -i * c * xi[0]],
        [i * c * xi[1], -i * c * xi[0], z],
    ]
}

/// Parabolic rescaling by `lambda`: same coefficients on the torus of side
/// `L / lambda`, with `omega -> lambda^2 omega` and `(E, b) -> lambda (E, b)`.
pub fn rescaled(s: &emlab::solver::NormalEMState, lambda: f64) -> emlab::solver::NormalEMState {
    let g = s.grid();
    let g2 = Grid::new(g.n(), g.length() / lambda).unwrap();
    let move_to = |f: &Field, a: f64| Field::from_spectral(&g2, f.comps().to_vec()).unwrap().scale(a);
    emlab::solver::NormalEMState::new(
        move_to(&s.omega, lambda * lambda),
        move_to(&s.e, lambda),
        move_to(&s.b, lambda),
        s.time / (lambda * lambda),
    )
    .unwrap()
}
