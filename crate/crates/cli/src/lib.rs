//! Command-line driver for the encoded-qubit simulator.

pub mod config;
pub mod error;
pub mod run;

pub use config::{Experiment, ExperimentConfig};
pub use error::CliError;
pub use run::{run, RunSummary};
