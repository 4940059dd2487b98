//! Configured experiments: data recipes, dispatch and artifacts.

pub mod config;
pub mod data;
pub mod run;

pub use config::{DataSpec, ExperimentConfig, ExperimentKind, Recipe};
pub use data::make_initial_data;
pub use run::{run, RunOutcome};
