//! Static environment: obstacles, disturbance regions, destination and the
//! global reference path, plus the geometric queries the cost features use.
//!
//! A `WorldMap` is immutable once built, so it can be shared freely between
//! threads.

use crate::geometry::{ConvexPolygon, Point2, PolygonError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("map bounds must have positive area")]
    EmptyBounds,
    #[error("{kind} {index}: {source}")]
    Polygon {
        kind: &'static str,
        index: usize,
        #[source]
        source: PolygonError,
    },
    #[error("{kind} {index} has a vertex outside the map bounds")]
    OutOfBounds { kind: &'static str, index: usize },
    #[error("reference path needs at least 2 points, got {0}")]
    ShortReferencePath(usize),
    #[error("reference path must start inside the map bounds")]
    ReferenceStartOutside,
    #[error("reference path must end at the destination (off by {0} m)")]
    ReferenceEndMismatch(f64),
    #[error("destination lies outside the map bounds")]
    DestinationOutside,
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point2,
    pub max: Point2,
}

impl Bounds {
    pub fn new(min: Point2, max: Point2) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    bounds: Bounds,
    obstacles: Vec<ConvexPolygon>,
    regions: Vec<ConvexPolygon>,
    destination: Point2,
    reference_path: Vec<Point2>,
}

const DESTINATION_TOLERANCE: f64 = 1e-9;

fn build_polygons(
    kind: &'static str,
    raw: Vec<Vec<Point2>>,
    bounds: &Bounds,
) -> Result<Vec<ConvexPolygon>, WorldError> {
    raw.into_iter()
        .enumerate()
        .map(|(index, vertices)| {
            let poly = ConvexPolygon::new(vertices).map_err(|source| WorldError::Polygon {
                kind,
                index,
                source,
            })?;
            if poly.vertices().iter().any(|&v| !bounds.contains(v)) {
                return Err(WorldError::OutOfBounds { kind, index });
            }
            Ok(poly)
        })
        .collect()
}

impl WorldMap {
    pub fn new(
        bounds: Bounds,
        obstacles: Vec<Vec<Point2>>,
        regions: Vec<Vec<Point2>>,
        destination: Point2,
        reference_path: Vec<Point2>,
    ) -> Result<Self, WorldError> {
        if !bounds.min.is_finite() || !bounds.max.is_finite() {
            return Err(WorldError::NonFinite("bounds"));
        }
        if !(bounds.width() > 0.0 && bounds.height() > 0.0) {
            return Err(WorldError::EmptyBounds);
        }
        if !destination.is_finite() {
            return Err(WorldError::NonFinite("destination"));
        }
        if !bounds.contains(destination) {
            return Err(WorldError::DestinationOutside);
        }
        if reference_path.iter().any(|p| !p.is_finite()) {
            return Err(WorldError::NonFinite("reference_path"));
        }
        if reference_path.len() < 2 {
            return Err(WorldError::ShortReferencePath(reference_path.len()));
        }
        if !bounds.contains(reference_path[0]) {
            return Err(WorldError::ReferenceStartOutside);
        }
        let end_gap = reference_path[reference_path.len() - 1].distance(destination);
        if end_gap > DESTINATION_TOLERANCE {
            return Err(WorldError::ReferenceEndMismatch(end_gap));
        }
        let obstacles = build_polygons("obstacle", obstacles, &bounds)?;
        let regions = build_polygons("region", regions, &bounds)?;
        Ok(Self {
            bounds,
            obstacles,
            regions,
            destination,
            reference_path,
        })
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn obstacles(&self) -> &[ConvexPolygon] {
        &self.obstacles
    }

    pub fn regions(&self) -> &[ConvexPolygon] {
        &self.regions
    }

    pub fn destination(&self) -> Point2 {
        self.destination
    }

    pub fn reference_path(&self) -> &[Point2] {
        &self.reference_path
    }

    /// Copy of this map with an extra obstacle appended (bounds unchecked
    /// beyond the usual validation).
    pub fn with_obstacle(&self, vertices: Vec<Point2>) -> Result<Self, WorldError> {
        let mut obstacles: Vec<Vec<Point2>> = self
            .obstacles
            .iter()
            .map(|o| o.vertices().to_vec())
            .collect();
        obstacles.push(vertices);
        Self::new(
            self.bounds,
            obstacles,
            self.regions.iter().map(|r| r.vertices().to_vec()).collect(),
            self.destination,
            self.reference_path.clone(),
        )
    }

    pub fn point_in_obstacle(&self, p: Point2) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn point_in_region(&self, p: Point2) -> bool {
        self.regions.iter().any(|r| r.contains(p))
    }

    /// Number of obstacles containing `p`.
    pub fn obstacle_incidences(&self, p: Point2) -> usize {
        self.obstacles.iter().filter(|o| o.contains(p)).count()
    }

    /// Number of disturbance regions containing `p`.
    pub fn region_incidences(&self, p: Point2) -> usize {
        self.regions.iter().filter(|r| r.contains(p)).count()
    }

    /// Boundary contact blocks the line of sight.
    pub fn line_of_sight(&self, p: Point2, q: Point2) -> bool {
        !self.obstacles.iter().any(|o| o.intersects_segment(p, q))
    }

    /// Per-obstacle boundary distance, in obstacle order.
    pub fn min_obstacle_distance(&self, p: Point2) -> Vec<f64> {
        self.obstacles.iter().map(|o| o.distance_to(p)).collect()
    }
}
