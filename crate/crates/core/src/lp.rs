//! Dyadic frequency decomposition, Besov and Chemin-Lerner norms, Bony
//! paraproducts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::spectral::{leray_project, lp_norm_samples, Field, Grid};

/// `exp(-1/x)` for `x > 0`, zero otherwise.
fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    let a = bump(x);
    let b = bump(1.0 - x);
    a / (a + b)
}

/// Low-pass radial profile: 1 on `r <= 3/4`, 0 on `r >= 1`.
pub fn chi(r: f64) -> f64 {
    smooth_step((1.0 - r) * 4.0)
}

/// Annular profile `chi(r/2) - chi(r)`: supported in `(3/4, 2)`, identically 1
/// on `[1, 3/2]`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Inner and outer radius of the plateau where `phi == 1`.
pub const PHI_PLATEAU: (f64, f64) = (1.0, 1.5);

/// Dyadic cutoffs sampled on a lattice.
#[derive(Clone, Debug)]
pub struct DyadicCutoffs {
    grid: Grid,
    /// `chi(|xi|)` on the lattice.
    pub psi_profile: Vec<f64>,
    /// `phi(|xi|)` on the lattice.
    pub phi_profile: Vec<f64>,
    pub k_min: i32,
    pub k_max: i32,
    blocks: Vec<Vec<f64>>,
}

impl DyadicCutoffs {
    pub fn new(grid: &Grid) -> DyadicCutoffs {
        let n = grid.n() as f64;
        let r_min = grid.dk();
        // farthest lattice point is the corner of the box
        let r_max = grid.dk() * (n / 2.0) * 2f64.sqrt();
        // 2^k_min <= r_min < 2^(k_min + 1), and k_max is the last k with (3/4) 2^k < r_max
        let k_min = r_min.log2().floor() as i32;
        let mut k_max = (r_max / 0.75).log2().floor() as i32 + 1;
        while 0.75 * 2f64.powi(k_max) >= r_max {
            k_max -= 1;
        }
        let mags: Vec<f64> = (0..grid.len()).map(|i| grid.xi_mag(i)).collect();
        let blocks = (k_min..=k_max)
            .map(|k| {
                let s = 2f64.powi(-k);
                mags.iter()
                    .map(|&r| if r > 0.0 { phi(s * r) } else { 0.0 })
                    .collect()
            })
            .collect();
        DyadicCutoffs {
            grid: grid.clone(),
            psi_profile: mags.iter().map(|&r| chi(r)).collect(),
            phi_profile: mags.iter().map(|&r| if r > 0.0 { phi(r) } else { 0.0 }).collect(),
            k_min,
            k_max,
            blocks,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn block_indices(&self) -> std::ops::RangeInclusive<i32> {
        self.k_min..=self.k_max
    }

    pub fn num_blocks(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    fn check(&self, k: i32) -> Result<()> {
        if k < self.k_min || k > self.k_max {
            Err(EmError::OutOfRange {
                index: k,
                min: self.k_min,
                max: self.k_max,
            })
        } else {
            Ok(())
        }
    }

    /// `phi(2^-k |xi|)` on the lattice.
    pub fn block_profile(&self, k: i32) -> Result<&[f64]> {
        self.check(k)?;
        Ok(&self.blocks[(k - self.k_min) as usize])
    }

    /// `chi(2^-k |xi|)` on the lattice, i.e. the symbol of `S_k`.
    pub fn low_pass_profile(&self, k: i32) -> Vec<f64> {
        let s = 2f64.powi(-k);
        (0..self.grid.len())
            .map(|i| {
                let r = self.grid.xi_mag(i);
                if r > 0.0 {
                    chi(s * r)
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Sum of all block profiles at every lattice point (zero mode excluded).
    pub fn partition_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 1..self.grid.len() {
            let s: f64 = self.blocks.iter().map(|b| b[i]).sum();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }
}

fn apply_multiplier(f: &Field, m: &[f64]) -> Field {
    f.map_coeffs(|_, i, z| z * m[i])
}

/// `Delta_k f`.
pub fn dyadic_block(f: &Field, k: i32, cut: &DyadicCutoffs) -> Result<Field> {
    if f.grid() != cut.grid() {
        return Err(EmError::GridMismatch);
    }
    Ok(apply_multiplier(f, cut.block_profile(k)?))
}

/// `S_k f = sum_{j < k} Delta_j f`.
pub fn low_pass(f: &Field, k: i32, cut: &DyadicCutoffs) -> Result<Field> {
    if f.grid() != cut.grid() {
        return Err(EmError::GridMismatch);
    }
    let mut acc = Field::zeros(f.grid(), f.ncomp());
    for j in cut.k_min..k.min(cut.k_max + 1) {
        acc = acc.add(&dyadic_block(f, j, cut)?)?;
    }
    Ok(acc)
}

/// Which dyadic blocks enter a norm, relative to a threshold (typically `sigma c`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Split {
    All,
    /// Blocks with `2^k < threshold`.
    Below(f64),
    /// Blocks with `2^k >= threshold`.
    Above(f64),
}

impl Split {
    pub fn keeps(&self, k: i32) -> bool {
        match *self {
            Split::All => true,
            Split::Below(th) => 2f64.powi(k) < th,
            Split::Above(th) => 2f64.powi(k) >= th,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    Besov,
    CheminLerner,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub r: Option<f64>,
    pub split: Split,
    pub flavor: Flavor,
}

impl NormSpec {
    pub fn besov(s: f64, p: f64, q: f64) -> NormSpec {
        NormSpec {
            s,
            p,
            q,
            r: None,
            split: Split::All,
            flavor: Flavor::Besov,
        }
    }

    pub fn chemin_lerner(s: f64, p: f64, q: f64, r: f64) -> NormSpec {
        NormSpec {
            s,
            p,
            q,
            r: Some(r),
            split: Split::All,
            flavor: Flavor::CheminLerner,
        }
    }

    pub fn with_split(mut self, split: Split) -> NormSpec {
        self.split = split;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x >= 1.0;
        if !ok(self.p) || !ok(self.q) || self.r.map(|r| !ok(r)).unwrap_or(false) {
            return Err(EmError::InvalidParameter(format!(
                "integrability exponents must be >= 1: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `l^q` norm of a finite sequence, accumulated in index order.
pub fn lq_sum(values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().cloned().fold(0.0, f64::max)
    } else {
        values.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `||Delta_k f||_{L^p}` for every block in range.
pub fn block_lp_norms(f: &Field, p: f64, cut: &DyadicCutoffs) -> Result<Vec<f64>> {
    cut.block_indices()
        .map(|k| {
            let b = dyadic_block(f, k, cut)?;
            lp_norm_samples(f.grid(), &b.to_physical(), p)
        })
        .collect()
}

/// Block norms of several fields taken together, with the pointwise
/// Euclidean modulus over all their components.
pub fn joint_block_lp_norms(fields: &[&Field], p: f64, cut: &DyadicCutoffs) -> Result<Vec<f64>> {
    let grid = cut.grid();
    if fields.iter().any(|f| f.grid() != grid) {
        return Err(EmError::GridMismatch);
    }
    cut.block_indices()
        .map(|k| {
            let mut phys = Vec::new();
            for f in fields {
                phys.extend(dyadic_block(f, k, cut)?.to_physical());
            }
            lp_norm_samples(grid, &phys, p)
        })
        .collect()
}

fn weighted(block_norms: &[f64], k_min: i32, spec: &NormSpec) -> Vec<f64> {
    block_norms
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| {
            let k = k_min + i as i32;
            spec.split.keeps(k).then(|| 2f64.powf(k as f64 * spec.s) * v)
        })
        .collect()
}

/// Homogeneous Besov norm from precomputed block norms.
pub fn besov_from_blocks(block_norms: &[f64], k_min: i32, spec: &NormSpec) -> f64 {
    lq_sum(&weighted(block_norms, k_min, spec), spec.q)
}

/// Homogeneous Besov (semi)norm restricted to the blocks selected by the split.
pub fn besov_norm(f: &Field, spec: &NormSpec, cut: &DyadicCutoffs) -> Result<f64> {
    spec.validate()?;
    if spec.flavor != Flavor::Besov {
        return Err(EmError::InvalidParameter("spec flavour is not besov".into()));
    }
    let b = block_lp_norms(f, spec.p, cut)?;
    Ok(besov_from_blocks(&b, cut.k_min, spec))
}

/// Per-block `L^p` norms sampled along a trajectory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeSeriesNorms {
    pub times: Vec<f64>,
    pub k_min: i32,
    /// `block_norms[b][t]` for block `k_min + b`.
    pub block_norms: Vec<Vec<f64>>,
}

impl TimeSeriesNorms {
    pub fn new(times: Vec<f64>, k_min: i32, block_norms: Vec<Vec<f64>>) -> Result<TimeSeriesNorms> {
        if times.is_empty() {
            return Err(EmError::EmptySeries);
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EmError::InvalidParameter("times must increase strictly".into()));
        }
        if block_norms.iter().any(|b| b.len() != times.len()) {
            return Err(EmError::InvalidParameter("block series length mismatch".into()));
        }
        if block_norms.iter().flatten().any(|&v| !(v >= 0.0)) {
            return Err(EmError::InvalidParameter("block norms must be >= 0".into()));
        }
        Ok(TimeSeriesNorms {
            times,
            k_min,
            block_norms,
        })
    }

    pub fn from_fields(
        times: &[f64],
        fields: &[Field],
        p: f64,
        cut: &DyadicCutoffs,
    ) -> Result<TimeSeriesNorms> {
        if fields.len() != times.len() {
            return Err(EmError::MissingSnapshots(format!(
                "{} times but {} fields",
                times.len(),
                fields.len()
            )));
        }
        let per_time: Vec<Vec<f64>> = fields
            .iter()
            .map(|f| block_lp_norms(f, p, cut))
            .collect::<Result<_>>()?;
        let nb = cut.num_blocks();
        let block_norms = (0..nb).map(|b| per_time.iter().map(|v| v[b]).collect()).collect();
        TimeSeriesNorms::new(times.to_vec(), cut.k_min, block_norms)
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }
}

/// Trapezoid-rule `L^r` norm in time of a sampled nonnegative series.
pub fn time_lr(times: &[f64], values: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return values.iter().cloned().fold(0.0, f64::max);
    }
    if times.len() == 1 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (values[i].powf(r) + values[i - 1].powf(r)) * (times[i] - times[i - 1]);
    }
    acc.powf(1.0 / r)
}

/// Chemin-Lerner norm: time `L^r` per block first, then the weighted `l^q` sum.
pub fn chemin_lerner_norm(ts: &TimeSeriesNorms, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    let r = spec
        .r
        .ok_or_else(|| EmError::InvalidParameter("chemin-lerner norm needs r".into()))?;
    if ts.times.is_empty() {
        return Err(EmError::EmptySeries);
    }
    let per_block: Vec<f64> = ts.block_norms.iter().map(|b| time_lr(&ts.times, b, r)).collect();
    Ok(besov_from_blocks(&per_block, ts.k_min, spec))
}

/// `L^r` in time of the Besov norm (summation inside, time integral outside).
pub fn time_besov_norm(ts: &TimeSeriesNorms, spec: &NormSpec) -> Result<f64> {
    let r = spec
        .r
        .ok_or_else(|| EmError::InvalidParameter("time norm needs r".into()))?;
    if ts.times.is_empty() {
        return Err(EmError::EmptySeries);
    }
    let vals: Vec<f64> = (0..ts.times.len())
        .map(|t| {
            let blocks: Vec<f64> = ts.block_norms.iter().map(|b| b[t]).collect();
            besov_from_blocks(&blocks, ts.k_min, spec)
        })
        .collect();
    Ok(time_lr(&ts.times, &vals, r))
}

/// Bony decomposition of a product.
#[derive(Clone, Debug)]
pub struct Paraproduct {
    /// `T_f g = sum_j S_{j-2} f Delta_j g`.
    pub tf_g: Field,
    /// `T_g f = sum_j S_{j-2} g Delta_j f`.
    pub tg_f: Field,
    /// `R(f, g) = sum_{|j-k| <= 2} Delta_j f Delta_k g`.
    pub remainder: Field,
}

/// Bony decomposition of the dealiased scalar product `f g`.
pub fn paraproduct(f: &Field, g: &Field, cut: &DyadicCutoffs) -> Result<Paraproduct> {
    f.same_grid(g)?;
    f.expect_ncomp(1)?;
    g.expect_ncomp(1)?;
    let grid = f.grid();
    let fb: Vec<Field> = cut
        .block_indices()
        .map(|k| dyadic_block(f, k, cut))
        .collect::<Result<_>>()?;
    let gb: Vec<Field> = cut
        .block_indices()
        .map(|k| dyadic_block(g, k, cut))
        .collect::<Result<_>>()?;
    let nb = fb.len();
    let zero = Field::zeros(grid, 1);
    // running low-pass sums: low[j] = sum_{i < j} blocks[i]
    let prefix = |blocks: &[Field]| -> Result<Vec<Field>> {
        let mut out = vec![zero.clone()];
        for b in blocks {
            let next = out[out.len() - 1].add(b)?;
            out.push(next);
        }
        Ok(out)
    };
    let f_low = prefix(&fb)?;
    let g_low = prefix(&gb)?;
    let mut tf = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut tg = tf.clone();
    let mut rr = tf.clone();
    let acc = |dst: &mut Vec<Complex64>, a: &Field, b: &Field| -> Result<()> {
        let p = crate::spectral::product(a, b)?;
        for (d, z) in dst.iter_mut().zip(p.comp(0)) {
            *d += z;
        }
        Ok(())
    };
    for j in 0..nb {
        // S_{j-2} covers blocks with index <= j - 3
        if j >= 3 {
            let lf = &f_low[j - 2];
            let lg = &g_low[j - 2];
            acc(&mut tf, lf, &gb[j])?;
            acc(&mut tg, lg, &fb[j])?;
        }
        let lo = j.saturating_sub(2);
        let hi = (j + 2).min(nb - 1);
        let mut near = zero.clone();
        for g_k in &gb[lo..=hi] {
            near = near.add(g_k)?;
        }
        acc(&mut rr, &fb[j], &near)?;
    }
    Ok(Paraproduct {
        tf_g: Field::scalar(grid, tf)?,
        tg_f: Field::scalar(grid, tg)?,
        remainder: Field::scalar(grid, rr)?,
    })
}

/// Two sides of a product estimate and their ratio.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RatioReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl RatioReport {
    pub fn new(lhs: f64, rhs: f64) -> RatioReport {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        RatioReport { lhs, rhs, ratio }
    }
}

/// Normal-structure product law for `F = (F1, F2, 0)` solenoidal and
/// `G = (0, 0, g)`:
/// `||P(F x G)||_{B^{s+t-1}_{2,q}} <~ ||F||_{B^s_{2,q1}} ||G||_{B^t_{2,q2}}`
/// with `1/q = 1/q1 + 1/q2`, valid for `s < 1`, `t < 2`, `s + t > 0`.
pub fn product_law_report(
    f: &Field,
    g: &Field,
    s: f64,
    t: f64,
    q: (f64, f64, f64),
    cut: &DyadicCutoffs,
) -> Result<RatioReport> {
    f.expect_ncomp(2)?;
    g.expect_ncomp(1)?;
    f.same_grid(g)?;
    if s >= 1.0 || t >= 2.0 || s + t <= 0.0 {
        return Err(EmError::InvalidParameter(format!(
            "product law needs s < 1, t < 2, s + t > 0 (got s = {s}, t = {t})"
        )));
    }
    let (q0, q1, q2) = q;
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    if (inv(q0) - inv(q1) - inv(q2)).abs() > 1e-12 {
        return Err(EmError::InvalidParameter(format!(
            "summability exponents must satisfy 1/q = 1/q1 + 1/q2, got {q:?}"
        )));
    }
    let fxg = leray_project(&crate::spectral::cross_normal(f, g)?)?;
    let lhs = besov_norm(&fxg, &NormSpec::besov(s + t - 1.0, 2.0, q0), cut)?;
    let rhs =
        besov_norm(f, &NormSpec::besov(s, 2.0, q1), cut)? * besov_norm(g, &NormSpec::besov(t, 2.0, q2), cut)?;
    Ok(RatioReport::new(lhs, rhs))
}

/// Variant for bounded vorticities:
/// `||P(F x G)||_{B^1_{2,1}} <~ ||F||_2 ||G||_{B^1_{inf,1}} + ||F||_{H^1} ||G||_{H^1}`.
pub fn product_law_endpoint_report(f: &Field, g: &Field, cut: &DyadicCutoffs) -> Result<RatioReport> {
    f.expect_ncomp(2)?;
    g.expect_ncomp(1)?;
    f.same_grid(g)?;
    let fxg = leray_project(&crate::spectral::cross_normal(f, g)?)?;
    let lhs = besov_norm(&fxg, &NormSpec::besov(1.0, 2.0, 1.0), cut)?;
    let rhs = f.l2_norm() * besov_norm(g, &NormSpec::besov(1.0, f64::INFINITY, 1.0), cut)?
        + f.hdot_norm(1.0) * g.hdot_norm(1.0);
    Ok(RatioReport::new(lhs, rhs))
}
