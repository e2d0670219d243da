//! Experiment runner for random multiplicative walks: reproducible configs,
//! seed-parallel ensembles, CSV/JSON emission and SVG figures.

pub mod config;
pub mod error;
pub mod format;
pub mod resources;
pub mod runner;
pub mod svg;

pub use config::{Command, ExperimentConfig, Resolved, SeedRange};
pub use error::CliError;
pub use runner::{execute, run, RunOutput, RunSummary};
