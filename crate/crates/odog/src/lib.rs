//! Experiment runner for the ODOG optimizers: TOML configs, seeded runs on a
//! worker pool, bound verification, and CSV/JSON output.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiment::{run_experiment, sweep, Report};
