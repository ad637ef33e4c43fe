//! Experiment harness: configuration, replicate orchestration, persistence,
//! and the named validation scenarios behind the command-line interface.
//!
//! [`config`] parses and validates TOML experiment documents into fully
//! resolved runs; [`experiment`] executes them over a worker pool with
//! per-replicate random streams and writes plot-ready artifacts;
//! [`scenarios`] packages the quantitative checks of the toolkit — exact
//! centering times, curvature and growth constants, limiting extreme-value
//! laws — as named pass/fail outcomes with measured details.

pub mod config;
pub mod experiment;
pub mod scenarios;

pub use config::{ConfigError, ExperimentConfig, ModelKind, ResolvedExperiment, resolve_seed};
pub use experiment::{ExperimentOutput, replicates_csv, run_experiment, write_experiment};
pub use scenarios::{CriterionOutcome, run_all_scenarios, run_scenario, scenario_names};

use thiserror::Error;

use crate::dist::DistError;
use crate::engines::EngineError;
use crate::extremal::ExtremalError;
use crate::fitness::FitnessError;
use crate::malthusian::MalthusianError;
use crate::scaling::ScalingError;

/// Any failure on the way from a config document to finished artifacts.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Law(#[from] MalthusianError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error(transparent)]
    Extremal(#[from] ExtremalError),
    #[error(transparent)]
    Distribution(#[from] DistError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
