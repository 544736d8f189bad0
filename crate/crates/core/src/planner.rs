//! Receding-horizon loop: sample N primitives, score them, execute the first
//! action of the cheapest, repeat.

use crate::costing::{CostError, CostModel, Rollout};
use crate::dynamics::{step, VehicleState};
use crate::primitives::PrimitiveDictionary;
use crate::prior_library::{sample_indices, Beta, PriorLibrary};
use crate::seed::{self, tag};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("samples per step N = {n} must lie in [1, K = {k}]")]
    InvalidSamples { n: usize, k: usize },
    #[error("horizon H = {planner} does not match the dictionary horizon {dictionary}")]
    HorizonMismatch { planner: usize, dictionary: usize },
    #[error("max_steps must be >= 1")]
    InvalidMaxSteps,
    #[error("goal_radius must be finite and > 0, got {0}")]
    InvalidGoalRadius(f64),
    #[error("start state ({x}, {y}) is inside an obstacle")]
    StartInObstacle { x: f64, y: f64 },
    #[error(transparent)]
    Cost(#[from] CostError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub horizon: usize,
    /// Candidates sampled per step (with replacement).
    pub samples: usize,
    pub max_steps: usize,
    pub goal_radius: f64,
    pub beta: Beta,
}

impl PlannerConfig {
    pub fn validate(&self, dict: &PrimitiveDictionary) -> Result<(), PlannerError> {
        if self.samples == 0 || self.samples > dict.len() {
            return Err(PlannerError::InvalidSamples {
                n: self.samples,
                k: dict.len(),
            });
        }
        if self.horizon != dict.horizon() {
            return Err(PlannerError::HorizonMismatch {
                planner: self.horizon,
                dictionary: dict.horizon(),
            });
        }
        if self.max_steps == 0 {
            return Err(PlannerError::InvalidMaxSteps);
        }
        if !(self.goal_radius.is_finite() && self.goal_radius > 0.0) {
            return Err(PlannerError::InvalidGoalRadius(self.goal_radius));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub chosen: Rollout,
    pub candidates: Vec<Rollout>,
    /// Every candidate collided.
    pub blind_spot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStep {
    pub state: VehicleState,
    pub primitive: usize,
    pub cost: f64,
    pub blind_spot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Reached,
    Collided,
    LeftMap,
    StepBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub trajectory: Vec<EpisodeStep>,
    pub final_state: VehicleState,
    pub total_cost: f64,
    pub reached_destination: bool,
    pub termination: Termination,
}

impl EpisodeResult {
    pub fn steps(&self) -> usize {
        self.trajectory.len()
    }

    pub fn blind_spot(&self) -> bool {
        self.trajectory.iter().any(|s| s.blind_spot)
    }

    pub fn blind_spot_count(&self) -> usize {
        self.trajectory.iter().filter(|s| s.blind_spot).count()
    }

    /// (state, primitive) pairs in the shape the prior library stages.
    pub fn selections(&self) -> Vec<(VehicleState, usize)> {
        self.trajectory
            .iter()
            .map(|s| (s.state, s.primitive))
            .collect()
    }
}

/// Lowest cost wins; equal costs go to the lower primitive index.
pub fn argmin_rollout(candidates: &[Rollout]) -> Option<&Rollout> {
    candidates.iter().min_by(|a, b| {
        a.cost
            .total_cmp(&b.cost)
            .then(a.primitive.cmp(&b.primitive))
    })
}

pub struct Planner<'a> {
    pub dictionary: &'a PrimitiveDictionary,
    pub cost: &'a CostModel<'a>,
    pub library: Option<&'a PriorLibrary>,
    pub config: PlannerConfig,
}

impl<'a> Planner<'a> {
    pub fn new(
        dictionary: &'a PrimitiveDictionary,
        cost: &'a CostModel<'a>,
        library: Option<&'a PriorLibrary>,
        config: PlannerConfig,
    ) -> Result<Self, PlannerError> {
        config.validate(dictionary)?;
        if cost.horizon != config.horizon {
            return Err(PlannerError::HorizonMismatch {
                planner: config.horizon,
                dictionary: cost.horizon,
            });
        }
        Ok(Self {
            dictionary,
            cost,
            library,
            config,
        })
    }

    /// Indices to evaluate at `s`. With N = K the whole dictionary is
    /// enumerated, which makes the step an exact argmin over it.
    pub fn candidate_indices<R: Rng + ?Sized>(&self, s: &VehicleState, rng: &mut R) -> Vec<usize> {
        let k = self.dictionary.len();
        if self.config.samples == k {
            return (0..k).collect();
        }
        sample_indices(
            self.library,
            k,
            s,
            self.config.beta,
            self.config.samples,
            rng,
        )
    }

    pub fn plan_step<R: Rng + ?Sized>(
        &self,
        s: &VehicleState,
        rng: &mut R,
    ) -> Result<StepOutcome, PlannerError> {
        let candidates = self
            .candidate_indices(s, rng)
            .into_iter()
            .map(|i| self.cost.evaluate(s, &self.dictionary[i]))
            .collect::<Result<Vec<_>, _>>()?;
        let chosen = argmin_rollout(&candidates)
            .expect("at least one candidate")
            .clone();
        let blind_spot = candidates.iter().all(|r| r.collided);
        Ok(StepOutcome {
            chosen,
            candidates,
            blind_spot,
        })
    }

    /// One episode from `start`. Step `t` draws from its own stream
    /// derived from `episode_seed`, so paired runs see identical randomness.
    pub fn run_episode(
        &self,
        start: &VehicleState,
        episode_seed: u64,
    ) -> Result<EpisodeResult, PlannerError> {
        let map = self.cost.map;
        if map.point_in_obstacle(start.position()) {
            return Err(PlannerError::StartInObstacle {
                x: start.x,
                y: start.y,
            });
        }
        let dest = map.destination();
        let mut state = *start;
        let mut trajectory = Vec::new();
        let mut total_cost = 0.0;

        let termination = loop {
            if state.position().distance(dest) <= self.config.goal_radius {
                break Termination::Reached;
            }
            if trajectory.len() >= self.config.max_steps {
                break Termination::StepBudget;
            }
            let mut rng = seed::stream(episode_seed, &[tag::STEP, trajectory.len() as u64]);
            let outcome = self.plan_step(&state, &mut rng)?;
            let action = self.dictionary[outcome.chosen.primitive]
                .first_action()
                .expect("primitives have H >= 1 actions");
            trajectory.push(EpisodeStep {
                state,
                primitive: outcome.chosen.primitive,
                cost: outcome.chosen.cost,
                blind_spot: outcome.blind_spot,
            });
            total_cost += outcome.chosen.cost;
            state = step(&state, action, &self.cost.dynamics);

            if map.point_in_obstacle(state.position()) {
                break Termination::Collided;
            }
            if !map.bounds().contains(state.position()) {
                break Termination::LeftMap;
            }
        };

        Ok(EpisodeResult {
            trajectory,
            final_state: state,
            total_cost,
            reached_destination: termination == Termination::Reached,
            termination,
        })
    }
}
