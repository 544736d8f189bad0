//! Stages, evaluation batches and their summary statistics.

use super::scenario::Setup;
use crate::costing::CostModel;
use crate::planner::{EpisodeResult, Planner, PlannerError};
use crate::prior_library::{Beta, CommitSummary, LibraryError, PriorLibrary};
use crate::seed::{derive_seed, tag};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Library(#[from] LibraryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub stage: usize,
    pub beta: f64,
    pub episodes: Vec<EpisodeResult>,
    pub commit: CommitSummary,
}

impl StageReport {
    pub fn stats(&self) -> BatchStats {
        BatchStats::from_results(&self.episodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchStats {
    pub episodes: usize,
    pub successes: usize,
    /// Mean total cost over successful episodes; `None` without successes.
    pub mean_success_cost: Option<f64>,
    pub mean_cost: f64,
}

impl BatchStats {
    pub fn from_results(results: &[EpisodeResult]) -> Self {
        let successes: Vec<f64> = results
            .iter()
            .filter(|r| r.reached_destination)
            .map(|r| r.total_cost)
            .collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let all: Vec<f64> = results.iter().map(|r| r.total_cost).collect();
        Self {
            episodes: results.len(),
            successes: successes.len(),
            mean_success_cost: (!successes.is_empty()).then(|| mean(&successes)),
            mean_cost: if all.is_empty() { 0.0 } else { mean(&all) },
        }
    }

    pub fn success_rate(&self) -> f64 {
        if self.episodes == 0 {
            0.0
        } else {
            self.successes as f64 / self.episodes as f64
        }
    }
}

pub fn training_seed(master: u64, stage: usize, episode: usize) -> u64 {
    derive_seed(master, &[tag::TRAIN, stage as u64, episode as u64])
}

/// Evaluation episode `i` gets the same stream for every beta, which pairs
/// the runs of a sweep.
pub fn evaluation_seed(master: u64, episode: usize) -> u64 {
    derive_seed(master, &[tag::EVAL, episode as u64])
}

/// Runs one data-collection stage of `setup.episodes_per_stage` episodes
/// against the library as it stood at stage start, stages the successful
/// ones, then commits once.
pub fn run_stage(
    setup: &Setup,
    cost: &CostModel<'_>,
    library: &mut PriorLibrary,
    stage: usize,
    beta: Beta,
    master_seed: u64,
) -> Result<StageReport, ExperimentError> {
    let config = crate::planner::PlannerConfig {
        beta,
        ..setup.config
    };
    let m = setup.episodes_per_stage;
    let mut episodes = Vec::with_capacity(m);
    {
        let planner = Planner::new(&setup.dictionary, cost, Some(&*library), config)?;
        for e in 0..m {
            episodes.push(planner.run_episode(&setup.start, training_seed(master_seed, stage, e))?);
        }
    }
    for (e, result) in episodes.iter().enumerate() {
        let episode_id = (stage * m + e) as u64;
        library.stage_episode(
            episode_id,
            result.selections(),
            result.total_cost,
            result.reached_destination,
        )?;
    }
    let commit = if library.staged().is_empty() {
        CommitSummary::default()
    } else {
        library.commit_stage()
    };
    Ok(StageReport {
        stage,
        beta: beta.value(),
        episodes,
        commit,
    })
}

/// Read-only evaluation episodes at a fixed beta.
pub fn evaluate(
    setup: &Setup,
    cost: &CostModel<'_>,
    library: Option<&PriorLibrary>,
    beta: Beta,
    episodes: usize,
    master_seed: u64,
) -> Result<Vec<EpisodeResult>, ExperimentError> {
    let config = crate::planner::PlannerConfig {
        beta,
        ..setup.config
    };
    let planner = Planner::new(&setup.dictionary, cost, library, config)?;
    (0..episodes)
        .map(|e| {
            planner
                .run_episode(&setup.start, evaluation_seed(master_seed, e))
                .map_err(Into::into)
        })
        .collect()
}
