//! Deterministic constant-speed unicycle model.

use crate::geometry::Point2;
use crate::primitives::MotionPrimitive;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("speed must be finite and > 0, got {0}")]
    InvalidSpeed(f64),
    #[error("steer_max must lie in (0, pi/2], got {0}")]
    InvalidSteerMax(f64),
    #[error("primitive has {got} actions but the horizon is {expected}")]
    HorizonMismatch { expected: usize, got: usize },
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    #[serde(default)]
    pub t: u32,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, heading: f64, t: u32) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
            t,
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Per-step heading increment in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Action {
    pub steering: f64,
}

impl Action {
    pub fn new(steering: f64) -> Self {
        Self { steering }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsParams {
    /// Meters travelled per step.
    pub speed: f64,
    pub steer_max: f64,
}

impl DynamicsParams {
    pub fn new(speed: f64, steer_max: f64) -> Result<Self, DynamicsError> {
        let params = Self { speed, steer_max };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(DynamicsError::InvalidSpeed(self.speed));
        }
        if !(self.steer_max > 0.0 && self.steer_max <= FRAC_PI_2) {
            return Err(DynamicsError::InvalidSteerMax(self.steer_max));
        }
        Ok(())
    }
}

/// Turn first, then translate along the new heading.
pub fn step(s: &VehicleState, a: Action, params: &DynamicsParams) -> VehicleState {
    let steering = a.steering.clamp(-params.steer_max, params.steer_max);
    let heading = normalize_angle(s.heading + steering);
    VehicleState {
        x: s.x + params.speed * heading.cos(),
        y: s.y + params.speed * heading.sin(),
        heading,
        t: s.t + 1,
    }
}

/// Predicted states `[s, step(s, a1), ...]`, length `horizon + 1`.
pub fn rollout(
    s: &VehicleState,
    primitive: &MotionPrimitive,
    params: &DynamicsParams,
    horizon: usize,
) -> Result<Vec<VehicleState>, DynamicsError> {
    let actions = primitive.actions();
    if actions.len() != horizon {
        return Err(DynamicsError::HorizonMismatch {
            expected: horizon,
            got: actions.len(),
        });
    }
    let mut states = Vec::with_capacity(horizon + 1);
    states.push(*s);
    let mut current = *s;
    for &a in actions {
        current = step(&current, a, params);
        states.push(current);
    }
    Ok(states)
}
