//! Sampling-based model predictive control over a motion-primitive
//! dictionary, with a persistent prior library that biases primitive
//! sampling at revisited anchor states.
//!
//! The pieces, bottom up:
//!
//! - [`geometry`] and [`world`]: convex obstacles and disturbance regions,
//!   destination, reference path.
//! - [`dynamics`]: a deterministic constant-speed unicycle.
//! - [`primitives`]: the fixed dictionary of constant-steering arcs.
//! - [`costing`]: the six trajectory features and their weighted sum.
//! - [`prior_library`]: anchor mapping, trimmed episode storage, empirical
//!   and blended sampling PMFs, binary persistence.
//! - [`planner`]: the receding-horizon argmin loop.
//! - [`analysis`]: closed-form and Monte Carlo probabilities of drawing a
//!   below-mean primitive.
//! - [`harness`]: scenario files and the `run`, `sweep-beta` and `validate`
//!   commands.

pub mod analysis;
pub mod costing;
pub mod dynamics;
pub mod geometry;
pub mod harness;
pub mod planner;
pub mod primitives;
pub mod prior_library;
pub mod seed;
pub mod world;

pub use costing::{CostModel, Rollout, Weights};
pub use dynamics::{Action, DynamicsParams, VehicleState};
pub use geometry::Point2;
pub use planner::{EpisodeResult, Planner, PlannerConfig};
pub use primitives::{MotionPrimitive, PrimitiveDictionary};
pub use prior_library::{AnchorKey, Beta, PriorLibrary};
pub use world::WorldMap;
