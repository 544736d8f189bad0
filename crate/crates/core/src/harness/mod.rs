//! Scenario loading, experiment orchestration and CSV / library output.

mod commands;
mod experiment;
mod scenario;

pub use commands::{
    anchor_states, cmd_run, cmd_sweep_beta, cmd_validate, RunOutput, SweepRow, ValidateOutput,
    EPISODES_CSV, LIBRARY_FILE, SWEEP_CSV, TRAJECTORY_DIR, VALIDATE_CSV, Z_FAIL,
};
pub use experiment::{
    evaluate, evaluation_seed, run_stage, training_seed, BatchStats, ExperimentError, StageReport,
};
pub use scenario::{
    load_scenario, BoundsSpec, DictionarySpec, DynamicsSpec, PlannerSpec, PriorSpec, Scenario,
    ScenarioError, Setup, StartPose, WorldSpec,
};

use crate::analysis::AnalysisError;
use crate::costing::CostError;
use crate::prior_library::LibraryError;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("prior library file {0} does not exist")]
    MissingLibrary(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn from_cost(e: CostError) -> Self {
        Self::Scenario(ScenarioError::Invalid {
            field: "weights".into(),
            message: e.to_string(),
        })
    }
}
