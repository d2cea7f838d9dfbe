//! Reproducible experiments for reflected-diffusion first-passage problems.
//!
//! An experiment is a TOML file (or a named preset) that is run by one of the
//! commands in [`commands`]; results land in an output directory as CSV
//! tables and JSON summaries. Monte Carlo runs use the rayon pool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod problems;
pub mod report;
pub mod sampling;
pub mod verify;

pub use commands::{run, Outcome};
pub use config::{preset, ExperimentConfig, Kind, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] rfpt_core::Error),
    #[error("io error: {0}")]
    Io(String),
}
