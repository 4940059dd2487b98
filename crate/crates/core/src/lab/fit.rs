//! Least-squares line fits for decay laws.

use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};

/// Tolerance on the fit residual, in log units.
pub const MAX_RESIDUAL: f64 = 0.1;

/// Line `y = slope x + intercept` through sample points, with the largest
/// absolute deviation of the samples from the line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

impl DecayFit {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<DecayFit> {
        if x.len() != y.len() {
            return Err(EmError::InvalidParameter(
                "abscissae and ordinates differ in length".into(),
            ));
        }
        if x.len() < 4 {
            return Err(EmError::InvalidParameter(format!(
                "a decay fit needs at least 4 points, got {}",
                x.len()
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(EmError::InvalidParameter("non-finite sample in fit".into()));
        }
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
        if sxx == 0.0 {
            return Err(EmError::InvalidParameter("degenerate abscissae".into()));
        }
        let sxy: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residual = x
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (b - slope * a - intercept).abs())
            .fold(0.0, f64::max);
        Ok(DecayFit {
            x,
            y,
            slope,
            intercept,
            residual,
        })
    }

    /// Fit `ln y` against `ln x`.
    pub fn log_log(x: &[f64], y: &[f64]) -> Result<DecayFit> {
        DecayFit::new(
            x.iter().map(|v| v.ln()).collect(),
            y.iter().map(|v| v.ln()).collect(),
        )
    }

    /// `|slope - predicted| <= tol` and the residual is below [`MAX_RESIDUAL`].
    pub fn matches(&self, predicted: f64, tol: f64) -> bool {
        (self.slope - predicted).abs() <= tol && self.residual < MAX_RESIDUAL
    }
}

/// Slopes of a log-log curve in the regimes `alpha T << 1` and `alpha T >> 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossoverFit {
    pub alpha: f64,
    pub small: DecayFit,
    pub large: DecayFit,
}

/// Fit `ln ratio` against `ln T` separately on `alpha T in [small.0, small.1]`
/// and on `alpha T >= large_min`.
pub fn crossover_fit(
    alpha: f64,
    times: &[f64],
    ratios: &[f64],
    small: (f64, f64),
    large_min: f64,
) -> Result<CrossoverFit> {
    let pick = |keep: &dyn Fn(f64) -> bool| -> (Vec<f64>, Vec<f64>) {
        times
            .iter()
            .zip(ratios.iter())
            .filter(|(t, _)| keep(alpha * **t))
            .map(|(t, r)| (*t, *r))
            .unzip()
    };
    let (ts, rs) = pick(&|at| at >= small.0 && at <= small.1);
    let (tl, rl) = pick(&|at| at >= large_min);
    Ok(CrossoverFit {
        alpha,
        small: DecayFit::log_log(&ts, &rs)?,
        large: DecayFit::log_log(&tl, &rl)?,
    })
}
