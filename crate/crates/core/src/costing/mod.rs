//! Trajectory cost `C(alpha | s) = w . F(rollout)`.
//!
//! Every feature aggregates over the whole predicted trajectory, so the
//! horizon sum is already inside each feature and the primitive cost is a
//! single dot product. "Predicted states" below means the H states after
//! the current one; the Fréchet feature additionally includes the current
//! state so a rollout lying on the reference path scores zero.

mod frechet;

pub use frechet::{discrete_frechet, EmptyPolyline};

use crate::dynamics::{rollout, DynamicsError, DynamicsParams, VehicleState};
use crate::geometry::Point2;
use crate::primitives::MotionPrimitive;
use crate::world::WorldMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DIST_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Frechet(#[from] EmptyPolyline),
    #[error("weight `{0}` must be finite and >= 0")]
    InvalidWeight(&'static str),
    #[error("dist_epsilon must be finite and > 0")]
    InvalidEpsilon,
    #[error("window_len must be >= 1")]
    InvalidWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector {
    pub frechet: f64,
    pub steering_magnitude: f64,
    pub dist_destination: f64,
    pub dist_obstacle: f64,
    pub collision: f64,
    pub disturbance: f64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.frechet,
            self.steering_magnitude,
            self.dist_destination,
            self.dist_obstacle,
            self.collision,
            self.disturbance,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    pub frechet: f64,
    pub steering: f64,
    pub destination: f64,
    pub obstacle: f64,
    pub collision: f64,
    pub disturbance: f64,
    /// Destination feature value when the goal is out of sight. `None`
    /// resolves to the map diagonal.
    pub los_max_distance: Option<f64>,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            frechet: 1.0,
            steering: 0.5,
            destination: 0.2,
            obstacle: 5.0,
            collision: 1e6,
            disturbance: 1e3,
            los_max_distance: None,
        }
    }
}

impl Weights {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.frechet,
            self.steering,
            self.destination,
            self.obstacle,
            self.collision,
            self.disturbance,
        ]
    }

    pub fn dot(&self, f: &FeatureVector) -> f64 {
        self.as_array()
            .iter()
            .zip(f.as_array())
            .map(|(w, x)| w * x)
            .sum()
    }

    /// Every weight multiplied by `c`; `los_max_distance` is a feature
    /// value, not a weight, and is left alone.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            frechet: self.frechet * c,
            steering: self.steering * c,
            destination: self.destination * c,
            obstacle: self.obstacle * c,
            collision: self.collision * c,
            disturbance: self.disturbance * c,
            los_max_distance: self.los_max_distance,
        }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        let names = [
            "frechet",
            "steering",
            "destination",
            "obstacle",
            "collision",
            "disturbance",
        ];
        for (name, w) in names.iter().zip(self.as_array()) {
            if !(w.is_finite() && w >= 0.0) {
                return Err(CostError::InvalidWeight(name));
            }
        }
        if let Some(d) = self.los_max_distance {
            if !(d.is_finite() && d >= 0.0) {
                return Err(CostError::InvalidWeight("los_max_distance"));
            }
        }
        Ok(())
    }
}

/// A primitive rolled out from a state, with its features and cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub primitive: usize,
    pub states: Vec<VehicleState>,
    pub features: FeatureVector,
    pub cost: f64,
    pub collided: bool,
}

fn predicted(states: &[VehicleState]) -> &[VehicleState] {
    if states.len() > 1 {
        &states[1..]
    } else {
        &[]
    }
}

/// Reference-path window: from the vertex closest to `start` (lowest index on
/// ties) through `closest + window_len`, clipped to the path end.
pub fn reference_window(map: &WorldMap, start: Point2, window_len: usize) -> &[Point2] {
    let path = map.reference_path();
    let closest = path
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.distance(start)))
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        )
        .0;
    let end = (closest + window_len).min(path.len() - 1);
    &path[closest..=end]
}

pub fn feature_frechet(
    states: &[VehicleState],
    map: &WorldMap,
    window_len: usize,
) -> Result<f64, EmptyPolyline> {
    let first = states.first().ok_or(EmptyPolyline)?;
    let window = reference_window(map, first.position(), window_len);
    let curve: Vec<Point2> = states.iter().map(VehicleState::position).collect();
    discrete_frechet(&curve, window)
}

/// Sum of absolute steering changes between consecutive actions.
pub fn feature_steering(primitive: &MotionPrimitive) -> f64 {
    primitive
        .actions()
        .windows(2)
        .map(|w| (w[1].steering - w[0].steering).abs())
        .sum()
}

/// Mean distance of the predicted states to the destination when the
/// current state sees it; `los_max_distance` otherwise.
pub fn feature_destination(states: &[VehicleState], map: &WorldMap, los_max_distance: f64) -> f64 {
    let Some(start) = states.first() else {
        return los_max_distance;
    };
    let dest = map.destination();
    if !map.line_of_sight(start.position(), dest) {
        return los_max_distance;
    }
    let ahead = predicted(states);
    if ahead.is_empty() {
        return start.position().distance(dest);
    }
    ahead
        .iter()
        .map(|s| s.position().distance(dest))
        .sum::<f64>()
        / ahead.len() as f64
}

/// Reciprocal of the summed state-to-obstacle distances, clamped at
/// `1 / dist_epsilon`. Zero when the map has no obstacles.
pub fn feature_obstacle(states: &[VehicleState], map: &WorldMap, dist_epsilon: f64) -> f64 {
    if map.obstacles().is_empty() {
        return 0.0;
    }
    let total: f64 = predicted(states)
        .iter()
        .flat_map(|s| map.min_obstacle_distance(s.position()))
        .sum();
    if total <= dist_epsilon {
        1.0 / dist_epsilon
    } else {
        1.0 / total
    }
}

/// (predicted state, obstacle) incidence count.
pub fn feature_collision(states: &[VehicleState], map: &WorldMap) -> usize {
    predicted(states)
        .iter()
        .map(|s| map.obstacle_incidences(s.position()))
        .sum()
}

/// Region incidence count if the map oracle is available, otherwise the
/// pessimistic bound of every predicted state in every region.
pub fn feature_disturbance(states: &[VehicleState], map: &WorldMap, edge_assist: bool) -> usize {
    let ahead = predicted(states);
    if edge_assist {
        ahead
            .iter()
            .map(|s| map.region_incidences(s.position()))
            .sum()
    } else {
        ahead.len() * map.regions().len()
    }
}

/// Tunables of the cost function besides the weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    /// Reference window length in vertices; `None` means `2 * H`.
    pub window_len: Option<usize>,
    pub dist_epsilon: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            window_len: None,
            dist_epsilon: DEFAULT_DIST_EPSILON,
        }
    }
}

/// Everything needed to score a primitive from a state.
#[derive(Debug, Clone)]
pub struct CostModel<'a> {
    pub map: &'a WorldMap,
    pub dynamics: DynamicsParams,
    pub weights: Weights,
    pub horizon: usize,
    pub window_len: usize,
    pub dist_epsilon: f64,
    pub los_max_distance: f64,
    pub edge_assist: bool,
}

impl<'a> CostModel<'a> {
    pub fn new(
        map: &'a WorldMap,
        dynamics: DynamicsParams,
        weights: Weights,
        params: CostParams,
        horizon: usize,
        edge_assist: bool,
    ) -> Result<Self, CostError> {
        weights.validate()?;
        if !(params.dist_epsilon.is_finite() && params.dist_epsilon > 0.0) {
            return Err(CostError::InvalidEpsilon);
        }
        let window_len = params.window_len.unwrap_or(2 * horizon);
        if window_len == 0 {
            return Err(CostError::InvalidWindow);
        }
        Ok(Self {
            map,
            dynamics,
            weights,
            horizon,
            window_len,
            dist_epsilon: params.dist_epsilon,
            los_max_distance: weights
                .los_max_distance
                .unwrap_or_else(|| map.bounds().diagonal()),
            edge_assist,
        })
    }

    pub fn features(
        &self,
        states: &[VehicleState],
        primitive: &MotionPrimitive,
    ) -> Result<FeatureVector, CostError> {
        Ok(FeatureVector {
            frechet: feature_frechet(states, self.map, self.window_len)?,
            steering_magnitude: feature_steering(primitive),
            dist_destination: feature_destination(states, self.map, self.los_max_distance),
            dist_obstacle: feature_obstacle(states, self.map, self.dist_epsilon),
            collision: feature_collision(states, self.map) as f64,
            disturbance: feature_disturbance(states, self.map, self.edge_assist) as f64,
        })
    }

    pub fn evaluate(
        &self,
        s: &VehicleState,
        primitive: &MotionPrimitive,
    ) -> Result<Rollout, CostError> {
        let states = rollout(s, primitive, &self.dynamics, self.horizon)?;
        let features = self.features(&states, primitive)?;
        Ok(Rollout {
            primitive: primitive.index(),
            cost: self.weights.dot(&features),
            collided: features.collision > 0.0,
            features,
            states,
        })
    }
}
