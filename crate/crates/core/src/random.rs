//! Reproducible random spectral fields.
//!
//! Every Fourier mode draws from its own ChaCha stream keyed by
//! `(seed, tag, k1, k2)`, so a field is the same on every grid that
//! resolves its spectral support and does not depend on iteration order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::spectral::{signed_index, Grid};

/// Generator for mode `(k1, k2)` of stream `tag`.
pub fn mode_rng(seed: u64, tag: u64, k1: i64, k2: i64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(((k1 as u32 as u64) << 32) | (k2 as u32 as u64));
    rng
}

/// Standard complex Gaussian (unit variance in total).
pub fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// Hermitian random coefficients `envelope(|xi|) * Z_k`, zero on the mean
/// and on the Nyquist lines. Each conjugate pair draws from the stream of
/// its representative with `k1 > 0` or `k1 == 0, k2 > 0`.
pub fn random_coefficients<F: Fn(f64) -> f64>(
    grid: &Grid,
    seed: u64,
    tag: u64,
    envelope: F,
) -> Vec<Complex64> {
    let n = grid.n();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..grid.len() {
        if i == 0 || grid.is_nyquist(i) {
            continue;
        }
        let amp = envelope(grid.xi_mag(i));
        if amp == 0.0 {
            continue;
        }
        let (k1, k2) = (signed_index(i / n, n), signed_index(i % n, n));
        let canonical = k1 > 0 || (k1 == 0 && k2 > 0);
        let z = if canonical {
            complex_normal(&mut mode_rng(seed, tag, k1, k2))
        } else {
            complex_normal(&mut mode_rng(seed, tag, -k1, -k2)).conj()
        };
        out[i] = z * amp;
    }
    out
}
