//! Initial-data recipes.

use num_complex::Complex64;

use crate::error::{EmError, Result};
use crate::experiments::config::{DataSpec, Recipe};
use crate::lp::phi;
use crate::random::random_coefficients;
use crate::solver::NormalEMState;
use crate::spectral::{leray_project, Field, Grid, PhysParams};

const TAG_OMEGA: u64 = 1;
const TAG_E: u64 = 2;
const TAG_B: u64 = 3;

/// Solenoidal field `i xi^perp / |xi| psi_hat` from a scalar potential.
pub(crate) fn solenoidal(grid: &Grid, psi: &[Complex64]) -> Result<Field> {
    let i = Complex64::new(0.0, 1.0);
    let mut c1 = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut c2 = c1.clone();
    for k in 0..grid.len() {
        let r = grid.xi_mag(k);
        if r == 0.0 || psi[k] == Complex64::new(0.0, 0.0) {
            continue;
        }
        c1[k] = -i * grid.xi2()[k] / r * psi[k];
        c2[k] = i * grid.xi1()[k] / r * psi[k];
    }
    Field::vector(grid, c1, c2)
}

fn rescale(f: Field, current: f64, target: f64) -> Field {
    if current > 0.0 {
        f.scale(target / current)
    } else {
        f
    }
}

/// Data of the requested recipe on `grid`, restricted to the dealiasing band
/// and to `|xi| <= 2^cutoff_index`, with `E` projected and every mean removed.
/// Amplitudes are the `L^2` norms of `u`, `E` and `B` after truncation.
pub fn make_initial_data(spec: &DataSpec, grid: &Grid, params: &PhysParams) -> Result<NormalEMState> {
    let (omega, e_pot, b) = match spec.recipe {
        Recipe::Zero => return Ok(NormalEMState::zeros(grid)),
        Recipe::SingleShell => {
            let s = 2f64.powi(-spec.shell);
            let env = |r: f64| if r > 0.0 { phi(s * r) } else { 0.0 };
            let coeffs = |tag: u64| -> Vec<Complex64> {
                match spec.seed {
                    // random phases with the shell profile as modulus
                    Some(seed) => random_coefficients(grid, seed, tag, env)
                        .into_iter()
                        .enumerate()
                        .map(|(k, z)| {
                            let n = z.norm();
                            if n > 0.0 {
                                z / n * env(grid.xi_mag(k))
                            } else {
                                z
                            }
                        })
                        .collect(),
                    None => (0..grid.len())
                        .map(|k| {
                            if grid.is_nyquist(k) {
                                Complex64::new(0.0, 0.0)
                            } else {
                                Complex64::new(env(grid.xi_mag(k)), 0.0)
                            }
                        })
                        .collect(),
                }
            };
            (coeffs(TAG_OMEGA), coeffs(TAG_E), coeffs(TAG_B))
        }
        Recipe::RandomSmooth => {
            let seed = spec
                .seed
                .ok_or_else(|| EmError::Config("random-smooth needs a seed".into()))?;
            let a = spec.spectrum_a;
            let x0 = spec.spectrum_xi0;
            let env = |r: f64| {
                if r > 0.0 {
                    r.powf(-a) * (-(r * r) / (x0 * x0)).exp()
                } else {
                    0.0
                }
            };
            (
                random_coefficients(grid, seed, TAG_OMEGA, env),
                random_coefficients(grid, seed, TAG_E, env),
                random_coefficients(grid, seed, TAG_B, env),
            )
        }
        Recipe::TaylorGreen => {
            let k = 2.0 * std::f64::consts::PI / grid.length();
            let pts: Vec<(f64, f64)> = (0..grid.len()).map(|i| grid.point(i)).collect();
            let w: Vec<f64> = pts
                .iter()
                .map(|&(x, y)| 2.0 * (k * x).sin() * (k * y).sin())
                .collect();
            let b: Vec<f64> = pts.iter().map(|&(x, y)| (k * x).cos() * (k * y).cos()).collect();
            let e1: Vec<f64> = pts.iter().map(|&(x, y)| (k * x).cos() * (k * y).sin()).collect();
            let e2: Vec<f64> = pts.iter().map(|&(x, y)| -(k * x).sin() * (k * y).cos()).collect();
            let omega = Field::from_physical(grid, &[w])?;
            let e = Field::from_physical(grid, &[e1, e2])?;
            let b = Field::from_physical(grid, &[b])?;
            return finish(NormalEMState::new(omega, e, b, 0.0)?, spec, params);
        }
    };
    let omega = Field::scalar(grid, omega)?;
    let e = solenoidal(grid, &e_pot)?;
    let b = Field::scalar(grid, b)?;
    finish(NormalEMState::new(omega, e, b, 0.0)?, spec, params)
}

fn finish(state: NormalEMState, spec: &DataSpec, params: &PhysParams) -> Result<NormalEMState> {
    let s = state.truncated(params);
    let omega = s.omega.truncate_to_band().without_mean();
    let e = leray_project(&s.e.truncate_to_band())?.without_mean();
    let b = s.b.truncate_to_band().without_mean();
    let u_norm = NormalEMState::new(omega.clone(), e.clone(), b.clone(), 0.0)?
        .velocity()?
        .l2_norm();
    let (en, bn) = (e.l2_norm(), b.l2_norm());
    NormalEMState::new(
        rescale(omega, u_norm, spec.u_amp),
        rescale(e, en, spec.e_amp),
        rescale(b, bn, spec.b_amp),
        0.0,
    )
}
