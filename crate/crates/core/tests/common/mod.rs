#![allow(dead_code)]

use prior_mpc::geometry::Point2;
use prior_mpc::harness::{load_scenario, Scenario};
use prior_mpc::prior_library::{AnchorGrid, AnchorKey, PriorEntry, PriorLibrary, TrimPolicy};
use prior_mpc::world::Bounds;
use rand::Rng;
use std::path::PathBuf;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

pub fn acceptance() -> Scenario {
    load_scenario(&scenario_path("acceptance.json")).expect("acceptance scenario loads")
}

pub fn minimal() -> Scenario {
    load_scenario(&scenario_path("minimal.json")).expect("minimal scenario loads")
}

/// Exhaustive discrete Fréchet distance: the minimum over every monotone
/// coupling of the maximum coupled distance.
pub fn frechet_by_enumeration(p: &[Point2], q: &[Point2]) -> f64 {
    fn walk(p: &[Point2], q: &[Point2], i: usize, j: usize, worst: f64, best: &mut f64) {
        let worst = worst.max(p[i].distance(q[j]));
        if i + 1 == p.len() && j + 1 == q.len() {
            *best = best.min(worst);
            return;
        }
        if i + 1 < p.len() {
            walk(p, q, i + 1, j, worst, best);
        }
        if j + 1 < q.len() {
            walk(p, q, i, j + 1, worst, best);
        }
        if i + 1 < p.len() && j + 1 < q.len() {
            walk(p, q, i + 1, j + 1, worst, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(p, q, 0, 0, f64::NEG_INFINITY, &mut best);
    best
}

pub fn random_polyline<R: Rng>(rng: &mut R, max_len: usize) -> Vec<Point2> {
    let n = rng.gen_range(1..=max_len);
    (0..n)
        .map(|_| Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)))
        .collect()
}

pub fn grid(width: f64, height: f64, cell: f64, bins: u32) -> AnchorGrid {
    AnchorGrid::new(
        Bounds::new(Point2::new(0.0, 0.0), Point2::new(width, height)),
        cell,
        bins,
    )
    .unwrap()
}

/// A library with `entries` random entries spread over the grid.
pub fn random_library<R: Rng>(
    rng: &mut R,
    grid: AnchorGrid,
    k: usize,
    entries: usize,
) -> PriorLibrary {
    let mut lib = PriorLibrary::new(grid, k, TrimPolicy::default()).unwrap();
    for _ in 0..entries {
        let key = AnchorKey {
            gx: rng.gen_range(0..grid.columns()),
            gy: rng.gen_range(0..grid.rows()),
            gh: rng.gen_range(0..grid.n_heading_bins),
        };
        let entry = PriorEntry {
            primitive_index: rng.gen_range(0..k),
            episode_id: rng.gen(),
            trajectory_cost: rng.gen_range(0.0..1e6),
        };
        lib.insert(key, entry).unwrap();
    }
    lib
}
