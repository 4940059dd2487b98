//! Pseudospectral 2D Euler-Maxwell solver with exact damped Maxwell
//! propagation, and a lab measuring damped Strichartz, parabolic smoothing,
//! energy and dispersion estimates on periodic grids.

pub mod energy;
pub mod error;
pub mod experiments;
pub mod funcalc;
pub mod lab;
pub mod lp;
pub mod propagator;
pub mod quadrature;
pub mod random;
pub mod snapshot;
pub mod solver;
pub mod spectral;

pub use error::{EmError, Result};
pub use lp::{DyadicCutoffs, NormSpec, TimeSeriesNorms};
pub use propagator::{ModePropagator, WaveMultipliers};
pub use solver::{NormalEMState, Solver};
pub use spectral::{Field, Grid, PhysParams};
