//! Numerical measurement of damped dispersive, parabolic and energy estimates.

pub mod damping;
pub mod dispersion;
pub mod fit;
pub mod heat;
pub mod inequality;
pub mod output;
pub mod strichartz;

pub use fit::{CrossoverFit, DecayFit};
