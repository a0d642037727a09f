//! Experiment driver for the `netsirs` binary: JSON configuration, method
//! dispatch, deterministic CSV output with a checksum manifest, and the
//! canned figure recipes.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod recipes;
pub mod run;

pub use config::{ExperimentConfig, InitialCondition, Method};
pub use error::{CliError, CliResult};
pub use output::{OutputFile, RunManifest};
pub use recipes::{reproduce, Figure, ReproduceOptions};
pub use run::run;
