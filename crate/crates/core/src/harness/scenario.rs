//! Scenario files: JSON, meters and radians throughout. Unknown fields are
//! rejected; omitted optional sections take the documented defaults.

use crate::costing::{CostError, CostModel, CostParams, Weights};
use crate::dynamics::{DynamicsParams, VehicleState};
use crate::geometry::Point2;
use crate::planner::PlannerConfig;
use crate::primitives::PrimitiveDictionary;
use crate::prior_library::{AnchorGrid, Beta, LibraryError, PriorLibrary, TrimPolicy};
use crate::world::{Bounds, WorldMap};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl ToString) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub min: Point2,
    pub max: Point2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub obstacles: Vec<Vec<Point2>>,
    #[serde(default)]
    pub regions: Vec<Vec<Point2>>,
    pub destination: Point2,
    /// Defaults to the straight segment from the start to the destination.
    #[serde(default)]
    pub reference_path: Option<Vec<Point2>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSpec {
    pub speed: f64,
    pub steer_max: f64,
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        Self {
            speed: 0.5,
            steer_max: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DictionarySpec {
    pub k: usize,
    /// Defaults to `dynamics.steer_max`.
    pub steer_max: Option<f64>,
}

impl Default for DictionarySpec {
    fn default() -> Self {
        Self {
            k: 21,
            steer_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSpec {
    pub horizon: usize,
    pub samples: usize,
    pub max_steps: usize,
    /// Defaults to 1.5 x speed.
    pub goal_radius: Option<f64>,
    pub episodes_per_stage: usize,
    /// One beta per stage; the last value repeats for later stages.
    pub beta_schedule: Vec<f64>,
}

impl Default for PlannerSpec {
    fn default() -> Self {
        Self {
            horizon: 10,
            samples: 4,
            max_steps: 500,
            goal_radius: None,
            episodes_per_stage: 10,
            beta_schedule: vec![0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSpec {
    /// Defaults to the primitive arc length, speed x horizon.
    pub cell_size: Option<f64>,
    pub n_heading_bins: u32,
    pub trim_high: f64,
    pub trim_low: f64,
    pub store_best_episode_only: bool,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            cell_size: None,
            n_heading_bins: 8,
            trim_high: 0.1,
            trim_low: 0.1,
            store_best_episode_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub world: WorldSpec,
    pub start: StartPose,
    #[serde(default)]
    pub dynamics: DynamicsSpec,
    #[serde(default)]
    pub dictionary: DictionarySpec,
    #[serde(default)]
    pub planner: PlannerSpec,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default)]
    pub costing: CostParams,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub edge_assist: bool,
}

impl Scenario {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scenario.build()?;
        Ok(scenario)
    }

    pub fn beta_for_stage(&self, stage: usize) -> f64 {
        let schedule = &self.planner.beta_schedule;
        schedule
            .get(stage)
            .or(schedule.last())
            .copied()
            .unwrap_or(0.0)
    }

    /// Validates every section and builds the runtime objects.
    pub fn build(&self) -> Result<Setup, ScenarioError> {
        let dynamics = DynamicsParams::new(self.dynamics.speed, self.dynamics.steer_max)
            .map_err(|e| invalid("dynamics", e))?;

        let start = VehicleState::new(self.start.x, self.start.y, self.start.heading, 0);
        if !(start.x.is_finite() && start.y.is_finite() && self.start.heading.is_finite()) {
            return Err(invalid("start", "pose must be finite"));
        }
        let reference_path = self
            .world
            .reference_path
            .clone()
            .unwrap_or_else(|| vec![start.position(), self.world.destination]);
        let bounds = Bounds::new(self.world.bounds.min, self.world.bounds.max);
        let map = WorldMap::new(
            bounds,
            self.world.obstacles.clone(),
            self.world.regions.clone(),
            self.world.destination,
            reference_path,
        )
        .map_err(|e| invalid("world", e))?;
        if !bounds.contains(start.position()) {
            return Err(invalid("start", "start lies outside world.bounds"));
        }
        if map.point_in_obstacle(start.position()) {
            return Err(invalid("start", "start lies inside an obstacle"));
        }

        let steer_max = self.dictionary.steer_max.unwrap_or(dynamics.steer_max);
        if steer_max > dynamics.steer_max {
            return Err(invalid(
                "dictionary.steer_max",
                format!(
                    "{steer_max} exceeds dynamics.steer_max ({})",
                    dynamics.steer_max
                ),
            ));
        }
        let horizon = self.planner.horizon;
        let dictionary = PrimitiveDictionary::constant_arcs(self.dictionary.k, horizon, steer_max)
            .map_err(|e| invalid("dictionary", e))?;

        let k = dictionary.len();
        if self.planner.samples > k {
            return Err(invalid(
                "planner.samples",
                format!(
                    "N = {} exceeds dictionary.k (K = {k})",
                    self.planner.samples
                ),
            ));
        }
        if self.planner.episodes_per_stage == 0 {
            return Err(invalid("planner.episodes_per_stage", "must be >= 1"));
        }
        for &b in &self.planner.beta_schedule {
            Beta::new(b).map_err(|e| invalid("planner.beta_schedule", e))?;
        }
        let config = PlannerConfig {
            horizon,
            samples: self.planner.samples,
            max_steps: self.planner.max_steps,
            goal_radius: self.planner.goal_radius.unwrap_or(1.5 * dynamics.speed),
            beta: Beta::ZERO,
        };
        config
            .validate(&dictionary)
            .map_err(|e| invalid("planner", e))?;

        let cell_size = self
            .prior
            .cell_size
            .unwrap_or(dynamics.speed * horizon as f64);
        let grid = AnchorGrid::new(bounds, cell_size, self.prior.n_heading_bins)
            .map_err(|e| invalid("prior", e))?;
        let policy = TrimPolicy {
            trim_low: self.prior.trim_low,
            trim_high: self.prior.trim_high,
            store_best_episode_only: self.prior.store_best_episode_only,
        };
        // validates the trim fractions
        PriorLibrary::new(grid, k, policy).map_err(|e| invalid("prior", e))?;

        let setup = Setup {
            seed: self.seed,
            map,
            dynamics,
            dictionary,
            weights: self.weights,
            cost_params: self.costing,
            edge_assist: self.edge_assist,
            config,
            grid,
            policy,
            start,
            episodes_per_stage: self.planner.episodes_per_stage,
        };
        setup.cost_model().map_err(|e| invalid("weights", e))?;
        Ok(setup)
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_json(&text, path)
}

/// Validated runtime objects built from a scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    pub seed: u64,
    pub map: WorldMap,
    pub dynamics: DynamicsParams,
    pub dictionary: PrimitiveDictionary,
    pub weights: Weights,
    pub cost_params: CostParams,
    pub edge_assist: bool,
    /// Base planner configuration; beta is set per stage or sweep point.
    pub config: PlannerConfig,
    pub grid: AnchorGrid,
    pub policy: TrimPolicy,
    pub start: VehicleState,
    pub episodes_per_stage: usize,
}

impl Setup {
    pub fn cost_model(&self) -> Result<CostModel<'_>, CostError> {
        CostModel::new(
            &self.map,
            self.dynamics,
            self.weights,
            self.cost_params,
            self.config.horizon,
            self.edge_assist,
        )
    }

    pub fn empty_library(&self) -> PriorLibrary {
        PriorLibrary::new(self.grid, self.dictionary.len(), self.policy)
            .expect("validated when the setup was built")
    }

    /// Loads a library file and checks it matches this scenario.
    pub fn load_library(&self, path: &Path) -> Result<PriorLibrary, LibraryError> {
        let file = std::fs::File::open(path)?;
        let mut lib = PriorLibrary::load(std::io::BufReader::new(file))?;
        lib.check_compatible(&self.grid, self.dictionary.len())?;
        lib.set_policy(self.policy)?;
        Ok(lib)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "seed": 3,
        "world": { "bounds": { "min": [0, 0], "max": [10, 10] }, "destination": [9, 9] },
        "start": { "x": 1, "y": 1 }
    }"#;

    fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        Scenario::from_json(text, Path::new("test.json"))
    }

    #[test]
    fn minimal_scenario_gets_defaults() {
        let s = parse(MINIMAL).unwrap();
        assert_eq!(s.dynamics, DynamicsSpec::default());
        assert_eq!(s.weights, Weights::default());
        assert_eq!(s.prior, PriorSpec::default());
        assert!(!s.edge_assist);
        let setup = s.build().unwrap();
        assert_eq!(setup.dictionary.len(), 21);
        assert_eq!(setup.config.goal_radius, 0.75);
        assert_eq!(setup.grid.cell_size, 5.0);
        assert_eq!(
            setup.map.reference_path(),
            &[Point2::new(1.0, 1.0), Point2::new(9.0, 9.0)]
        );
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace("\"seed\": 3,", "\"seed\": 3, \"colour\": 1,");
        let err = parse(&text).unwrap_err();
        match err {
            ScenarioError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("colour"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn samples_above_k_names_both_fields() {
        let text = MINIMAL.replace(
            "\"seed\": 3,",
            "\"seed\": 3, \"dictionary\": {\"k\": 3}, \"planner\": {\"samples\": 5},",
        );
        let msg = parse(&text).unwrap_err().to_string();
        assert!(msg.contains("planner.samples"), "{msg}");
        assert!(msg.contains("dictionary.k"), "{msg}");
    }

    #[test]
    fn missing_seed_is_rejected() {
        let text = MINIMAL.replace("\"seed\": 3,", "");
        assert!(matches!(parse(&text), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn bad_beta_schedule() {
        let text = MINIMAL.replace(
            "\"seed\": 3,",
            "\"seed\": 3, \"planner\": {\"beta_schedule\": [0.2, 1.5]},",
        );
        let msg = parse(&text).unwrap_err().to_string();
        assert!(msg.contains("beta_schedule"), "{msg}");
    }

    #[test]
    fn beta_schedule_repeats_last() {
        let text = MINIMAL.replace(
            "\"seed\": 3,",
            "\"seed\": 3, \"planner\": {\"beta_schedule\": [0.0, 0.5]},",
        );
        let s = parse(&text).unwrap();
        assert_eq!(s.beta_for_stage(0), 0.0);
        assert_eq!(s.beta_for_stage(1), 0.5);
        assert_eq!(s.beta_for_stage(7), 0.5);
    }

    #[test]
    fn start_in_obstacle_is_rejected() {
        let text = MINIMAL.replace(
            "\"destination\"",
            "\"obstacles\": [[[0.5,0.5],[2,0.5],[2,2],[0.5,2]]], \"destination\"",
        );
        let msg = parse(&text).unwrap_err().to_string();
        assert!(msg.contains("start"), "{msg}");
    }
}
