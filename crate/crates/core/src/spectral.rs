//! Periodic-grid Fourier infrastructure.
//!
//! Coefficients are stored row-major with index `i * n + j`, where `i` runs
//! along `x1` and `j` along `x2`. The forward transform is normalised so that
//! `f(x) = sum_k fhat_k exp(i k.x)`, hence Parseval reads
//! `||f||_2^2 = L^2 sum |fhat_k|^2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{EmError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

struct GridInner {
    n: usize,
    length: f64,
    xi1: Vec<f64>,
    xi2: Vec<f64>,
    xi_sq: Vec<f64>,
    band: Vec<bool>,
    nyquist: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Periodic torus `[0, L)^2` sampled on `n x n` points.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.length == other.inner.length)
    }
}

/// Signed integer wavenumber of FFT index `i`.
#[inline]
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Grid> {
        if n < 8 || !n.is_power_of_two() {
            return Err(EmError::InvalidParameter(format!(
                "grid size must be a power of two >= 8, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(EmError::InvalidParameter(format!(
                "torus length must be positive, got {length}"
            )));
        }
        let dk = 2.0 * PI / length;
        let cut = (n / 3) as i64;
        let mut xi1 = vec![0.0; n * n];
        let mut xi2 = vec![0.0; n * n];
        let mut xi_sq = vec![0.0; n * n];
        let mut band = vec![false; n * n];
        let mut nyquist = vec![false; n * n];
        for i in 0..n {
            let k1 = signed_index(i, n);
            for j in 0..n {
                let k2 = signed_index(j, n);
                let idx = i * n + j;
                xi1[idx] = dk * k1 as f64;
                xi2[idx] = dk * k2 as f64;
                xi_sq[idx] = xi1[idx] * xi1[idx] + xi2[idx] * xi2[idx];
                band[idx] = k1 * k1 + k2 * k2 <= cut * cut;
                nyquist[idx] = i == n / 2 || j == n / 2;
            }
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid {
            inner: Arc::new(GridInner {
                n,
                length,
                xi1,
                xi2,
                xi_sq,
                band,
                nyquist,
                fwd,
                inv,
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }
    pub fn length(&self) -> f64 {
        self.inner.length
    }
    pub fn len(&self) -> usize {
        self.inner.n * self.inner.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// Lattice spacing in frequency, `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.inner.length
    }
    /// Physical cell size `L / n`.
    pub fn dx(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }
    pub fn xi1(&self) -> &[f64] {
        &self.inner.xi1
    }
    pub fn xi2(&self) -> &[f64] {
        &self.inner.xi2
    }
    pub fn xi_sq(&self) -> &[f64] {
        &self.inner.xi_sq
    }
    pub fn xi_mag(&self, idx: usize) -> f64 {
        self.inner.xi_sq[idx].sqrt()
    }
    /// Radial two-thirds band `|k| <= floor(n/3)`.
    pub fn in_band(&self, idx: usize) -> bool {
        self.inner.band[idx]
    }
    pub fn band_mask(&self) -> &[bool] {
        &self.inner.band
    }
    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.inner.nyquist[idx]
    }
    /// Largest |xi| kept by the dealiasing band.
    pub fn band_radius(&self) -> f64 {
        self.dk() * (self.inner.n / 3) as f64
    }
    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let n = self.inner.n;
        let h = self.dx();
        ((idx / n) as f64 * h, (idx % n) as f64 * h)
    }
    pub fn index_of(&self, k1: i64, k2: i64) -> usize {
        let n = self.inner.n as i64;
        (k1.rem_euclid(n) * n + k2.rem_euclid(n)) as usize
    }

    fn transpose(&self, data: &mut [Complex64]) {
        // tiled to stay cache friendly on large grids
        const TILE: usize = 32;
        let n = self.inner.n;
        for bi in (0..n).step_by(TILE) {
            for bj in (bi..n).step_by(TILE) {
                for i in bi..(bi + TILE).min(n) {
                    let j0 = if bi == bj { i + 1 } else { bj };
                    for j in j0..(bj + TILE).min(n) {
                        data.swap(i * n + j, j * n + i);
                    }
                }
            }
        }
    }

    fn fft2(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len());
        let mut scratch = vec![ZERO; plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        self.transpose(data);
        plan.process_with_scratch(data, &mut scratch);
        self.transpose(data);
    }

    /// Physical samples to normalised coefficients, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.inner.fwd);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// Coefficients to physical samples, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.inner.inv);
    }

    pub fn to_spectral(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    pub fn to_physical_complex(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        self.inverse(&mut buf);
        buf
    }

    pub fn to_physical(&self, coeffs: &[Complex64]) -> Vec<f64> {
        self.to_physical_complex(coeffs)
            .into_iter()
            .map(|z| z.re)
            .collect()
    }
}

/// Scalar (1 component) or in-plane vector (2 components) field held by its
/// Fourier coefficients.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    comps: Vec<Vec<Complex64>>,
}

impl Field {
    pub fn zeros(grid: &Grid, ncomp: usize) -> Field {
        assert!(ncomp == 1 || ncomp == 2, "fields have 1 or 2 components");
        Field {
            grid: grid.clone(),
            comps: vec![vec![ZERO; grid.len()]; ncomp],
        }
    }

    pub fn from_spectral(grid: &Grid, comps: Vec<Vec<Complex64>>) -> Result<Field> {
        if comps.is_empty() || comps.len() > 2 {
            return Err(EmError::Components {
                expected: 2,
                got: comps.len(),
            });
        }
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(EmError::GridMismatch);
        }
        Ok(Field {
            grid: grid.clone(),
            comps,
        })
    }

    pub fn scalar(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Field> {
        Field::from_spectral(grid, vec![coeffs])
    }

    pub fn vector(grid: &Grid, c1: Vec<Complex64>, c2: Vec<Complex64>) -> Result<Field> {
        Field::from_spectral(grid, vec![c1, c2])
    }

    pub fn from_physical(grid: &Grid, comps: &[Vec<f64>]) -> Result<Field> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(EmError::GridMismatch);
        }
        Field::from_spectral(grid, comps.iter().map(|c| grid.to_spectral(c)).collect())
    }

    /// Samples `f(x1, x2)` at the grid points.
    pub fn from_fn<F>(grid: &Grid, ncomp: usize, f: F) -> Field
    where
        F: Fn(f64, f64) -> [f64; 2],
    {
        let mut phys = vec![vec![0.0; grid.len()]; ncomp];
        for idx in 0..grid.len() {
            let (x1, x2) = grid.point(idx);
            let v = f(x1, x2);
            for (c, p) in phys.iter_mut().enumerate() {
                p[idx] = v[c];
            }
        }
        Field::from_physical(grid, &phys).expect("sizes match by construction")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }
    pub fn comp(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }
    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }
    pub fn comps(&self) -> &[Vec<Complex64>] {
        &self.comps
    }
    pub fn into_comps(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|c| self.grid.to_physical(c)).collect()
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(EmError::GridMismatch)
        }
    }

    pub fn expect_ncomp(&self, n: usize) -> Result<()> {
        if self.ncomp() == n {
            Ok(())
        } else {
            Err(EmError::Components {
                expected: n,
                got: self.ncomp(),
            })
        }
    }

    pub fn mean_modulus(&self) -> f64 {
        self.comps.iter().map(|c| c[0].norm()).fold(0.0, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero_mean(&self, rel_tol: f64) -> bool {
        self.mean_modulus() <= rel_tol * self.max_modulus()
    }

    pub fn without_mean(mut self) -> Field {
        for c in &mut self.comps {
            c[0] = ZERO;
        }
        self
    }

    /// Largest deviation from `fhat(-k) = conj(fhat(k))`, ignoring the
    /// Nyquist lines.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n() as i64;
        let mut worst: f64 = 0.0;
        for c in &self.comps {
            for idx in 0..self.grid.len() {
                if self.grid.is_nyquist(idx) {
                    continue;
                }
                let k1 = signed_index(idx / n as usize, n as usize);
                let k2 = signed_index(idx % n as usize, n as usize);
                let partner = self.grid.index_of(-k1, -k2);
                worst = worst.max((c[idx] - c[partner].conj()).norm());
            }
        }
        worst
    }

    pub fn map_coeffs<F>(&self, f: F) -> Field
    where
        F: Fn(usize, usize, Complex64) -> Complex64,
    {
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(c, v)| v.iter().enumerate().map(|(i, &z)| f(c, i, z)).collect())
            .collect();
        Field {
            grid: self.grid.clone(),
            comps,
        }
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map_coeffs(|_, _, z| z * s)
    }

    pub fn axpy(&self, a: f64, other: &Field) -> Result<Field> {
        self.same_grid(other)?;
        other.expect_ncomp(self.ncomp())?;
        Ok(self.map_coeffs(|c, i, z| z + other.comps[c][i] * a))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(-1.0, other)
    }

    /// Zero every coefficient outside the dealiasing band.
    pub fn truncate_to_band(&self) -> Field {
        let g = self.grid.clone();
        self.map_coeffs(|_, i, z| if g.in_band(i) { z } else { ZERO })
    }

    /// Keep only `|xi| <= radius`.
    pub fn truncate_radius(&self, radius: f64) -> Field {
        let g = self.grid.clone();
        let r2 = radius * radius * (1.0 + 1e-12);
        self.map_coeffs(|_, i, z| if g.xi_sq()[i] <= r2 { z } else { ZERO })
    }

    /// L2 norm via Parseval.
    pub fn l2_norm(&self) -> f64 {
        let l = self.grid.length();
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum();
        l * s.sqrt()
    }

    /// L2 inner product via Parseval.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.same_grid(other)?;
        other.expect_ncomp(self.ncomp())?;
        let l = self.grid.length();
        let mut s = 0.0;
        for (a, b) in self.comps.iter().zip(other.comps.iter()) {
            s += a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (x * y.conj()).re)
                .sum::<f64>();
        }
        Ok(l * l * s)
    }

    /// Homogeneous Sobolev norm `|| |D|^s f ||_2`, zero mode excluded.
    pub fn hdot_norm(&self, s: f64) -> f64 {
        let l = self.grid.length();
        let xs = self.grid.xi_sq();
        let mut acc = 0.0;
        for c in &self.comps {
            for (i, z) in c.iter().enumerate() {
                if xs[i] > 0.0 {
                    acc += xs[i].powf(s) * z.norm_sqr();
                }
            }
        }
        l * acc.sqrt()
    }

    /// Gradient of a scalar field.
    pub fn gradient(&self) -> Result<Field> {
        self.expect_ncomp(1)?;
        Ok(Field {
            grid: self.grid.clone(),
            comps: vec![
                deriv(&self.grid, &self.comps[0], 0),
                deriv(&self.grid, &self.comps[0], 1),
            ],
        })
    }

    /// Spectral divergence coefficients `i xi . fhat` of a vector field.
    pub fn divergence(&self) -> Result<Field> {
        self.expect_ncomp(2)?;
        let a = deriv(&self.grid, &self.comps[0], 0);
        let b = deriv(&self.grid, &self.comps[1], 1);
        Ok(Field {
            grid: self.grid.clone(),
            comps: vec![a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()],
        })
    }

    /// Scalar curl `d1 v2 - d2 v1` of a vector field.
    pub fn curl(&self) -> Result<Field> {
        self.expect_ncomp(2)?;
        let a = deriv(&self.grid, &self.comps[1], 0);
        let b = deriv(&self.grid, &self.comps[0], 1);
        Ok(Field {
            grid: self.grid.clone(),
            comps: vec![a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()],
        })
    }

    pub fn laplacian(&self) -> Field {
        let xs = self.grid.xi_sq().to_vec();
        self.map_coeffs(|_, i, z| -z * xs[i])
    }
}

/// Spectral derivative along axis `a` (0 for x1, 1 for x2). Nyquist lines are
/// dropped so real fields stay real.
pub fn deriv(grid: &Grid, f: &[Complex64], axis: usize) -> Vec<Complex64> {
    let xi = if axis == 0 { grid.xi1() } else { grid.xi2() };
    f.iter()
        .enumerate()
        .map(|(i, &z)| {
            if grid.is_nyquist(i) {
                ZERO
            } else {
                Complex64::new(0.0, xi[i]) * z
            }
        })
        .collect()
}

/// Physical-space product of band-truncated inputs, truncated back to the band.
fn band_product(grid: &Grid, factors: &[(&[Complex64], &[Complex64])]) -> Vec<Complex64> {
    let mut acc = vec![ZERO; grid.len()];
    for (a, b) in factors {
        let pa = grid.to_physical(&band_only(grid, a));
        let pb = grid.to_physical(&band_only(grid, b));
        for (s, (x, y)) in acc.iter_mut().zip(pa.iter().zip(pb.iter())) {
            s.re += x * y;
        }
    }
    grid.forward(&mut acc);
    for (i, z) in acc.iter_mut().enumerate() {
        if !grid.in_band(i) {
            *z = ZERO;
        }
    }
    acc
}

fn band_only(grid: &Grid, a: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .enumerate()
        .map(|(i, &z)| if grid.in_band(i) { z } else { ZERO })
        .collect()
}

/// Dealiased pointwise product of two scalar fields.
pub fn product(f: &Field, g: &Field) -> Result<Field> {
    f.same_grid(g)?;
    f.expect_ncomp(1)?;
    g.expect_ncomp(1)?;
    Field::scalar(f.grid(), band_product(f.grid(), &[(f.comp(0), g.comp(0))]))
}

/// Leray projection `Id - xi xi^T / |xi|^2` onto divergence-free fields.
/// The mean coefficient is left alone (constants are solenoidal).
pub fn leray_project(v: &Field) -> Result<Field> {
    v.expect_ncomp(2)?;
    let grid = v.grid();
    let (x1, x2, xs) = (grid.xi1(), grid.xi2(), grid.xi_sq());
    let mut a = v.comp(0).to_vec();
    let mut b = v.comp(1).to_vec();
    for i in 0..grid.len() {
        if grid.is_nyquist(i) {
            a[i] = ZERO;
            b[i] = ZERO;
        } else if xs[i] > 0.0 {
            let d = (a[i] * x1[i] + b[i] * x2[i]) / xs[i];
            a[i] -= d * x1[i];
            b[i] -= d * x2[i];
        }
    }
    Field::vector(grid, a, b)
}

/// Velocity with `div u = 0` and `d1 u2 - d2 u1 = omega`.
pub fn biot_savart(omega: &Field) -> Result<Field> {
    omega.expect_ncomp(1)?;
    let m = omega.mean_modulus();
    if m > 1e-12 * omega.max_modulus().max(1e-300) {
        return Err(EmError::NonZeroMean(m));
    }
    let grid = omega.grid();
    let (x1, x2, xs) = (grid.xi1(), grid.xi2(), grid.xi_sq());
    let w = omega.comp(0);
    let mut a = vec![ZERO; grid.len()];
    let mut b = vec![ZERO; grid.len()];
    for i in 0..grid.len() {
        if xs[i] > 0.0 && !grid.is_nyquist(i) {
            let q = w[i] / xs[i];
            a[i] = Complex64::new(0.0, x2[i]) * q;
            b[i] = Complex64::new(0.0, -x1[i]) * q;
        }
    }
    Field::vector(grid, a, b)
}

/// `(u1, u2, 0) x (0, 0, b) = (u2 b, -u1 b)`, dealiased.
pub fn cross_normal(u: &Field, b: &Field) -> Result<Field> {
    u.same_grid(b)?;
    u.expect_ncomp(2)?;
    b.expect_ncomp(1)?;
    let g = u.grid();
    let c1 = band_product(g, &[(u.comp(1), b.comp(0))]);
    let c2: Vec<Complex64> = band_product(g, &[(u.comp(0), b.comp(0))])
        .into_iter()
        .map(|z| -z)
        .collect();
    Field::vector(g, c1, c2)
}

/// Advection term `u . grad f`, dealiased.
pub fn grad_dot(u: &Field, f: &Field) -> Result<Field> {
    u.same_grid(f)?;
    u.expect_ncomp(2)?;
    f.expect_ncomp(1)?;
    let g = u.grid();
    let d1 = deriv(g, f.comp(0), 0);
    let d2 = deriv(g, f.comp(0), 1);
    Field::scalar(g, band_product(g, &[(u.comp(0), &d1), (u.comp(1), &d2)]))
}

/// Rectangle-rule `L^p` norm; vector fields use the pointwise Euclidean length.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    let phys = f.to_physical();
    lp_norm_samples(f.grid(), &phys, p)
}

/// `L^p` norm of physical samples (one slice per component).
pub fn lp_norm_samples(grid: &Grid, phys: &[Vec<f64>], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(EmError::InvalidParameter(format!("L^p needs p >= 1, got {p}")));
    }
    let modulus = |i: usize| -> f64 {
        if phys.len() == 1 {
            phys[0][i].abs()
        } else {
            phys.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt()
        }
    };
    if p.is_infinite() {
        return Ok((0..grid.len()).map(modulus).fold(0.0, f64::max));
    }
    let da = grid.dx() * grid.dx();
    let s: f64 = (0..grid.len()).map(|i| modulus(i).powf(p)).sum();
    Ok((s * da).powf(1.0 / p))
}

/// Physical parameters of the system.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhysParams {
    pub c: f64,
    pub sigma: f64,
    pub nu: f64,
    /// Nonlinear terms are restricted to `|xi| <= 2^cutoff_index` when set.
    pub cutoff_index: Option<i32>,
}

impl PhysParams {
    pub fn new(c: f64, sigma: f64) -> PhysParams {
        PhysParams {
            c,
            sigma,
            nu: 0.0,
            cutoff_index: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(EmError::InvalidParameter(format!(
                "c must be > 0, got {}",
                self.c
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(EmError::InvalidParameter(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(EmError::InvalidParameter(format!(
                "nu must be >= 0, got {}",
                self.nu
            )));
        }
        Ok(())
    }

    /// Damping rate of the electric field, `sigma c^2`.
    pub fn damping(&self) -> f64 {
        self.sigma * self.c * self.c
    }

    pub fn cutoff_radius(&self) -> Option<f64> {
        self.cutoff_index.map(|n| 2f64.powi(n))
    }
}
