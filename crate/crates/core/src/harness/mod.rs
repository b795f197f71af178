//! Experiment configurations, noise, reports and the command-line checks.

pub mod config;
pub mod experiment;
pub mod noise;
pub mod report;
pub mod suite;
pub mod truth;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, ExperimentReport};
