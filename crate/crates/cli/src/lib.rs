//! Command-line driver for the `kantorovich` crate: single-shot
//! subcommands and a staged experiment pipeline with JSON and CSV outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod specs;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use pipeline::{run_experiment, RunReport};
