//! Cost-optimal prior trajectory library.
//!
//! States are discretized into anchors (grid cell plus heading bin). Each
//! anchor stores the primitives chosen there by earlier successful
//! episodes; the normalized occurrence counts form an empirical PMF that is
//! blended with the uniform PMF to bias primitive sampling.
//!
//! Writes (`stage_episode`, `commit_stage`) take `&mut self` and happen
//! between episodes; every read takes `&self`, so a library can be shared by
//! any number of planners while an episode runs.

mod codec;

pub use codec::{FORMAT_VERSION, MAGIC};

use crate::dynamics::VehicleState;
use crate::primitives::uniform_indices;
use crate::world::Bounds;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("state ({x}, {y}) lies outside the anchor grid")]
    OutOfGrid { x: f64, y: f64 },
    #[error("anchor {0:?} has no stored priors")]
    KeyAbsent(AnchorKey),
    #[error("beta must lie in [0, 1], got {0}")]
    InvalidBeta(f64),
    #[error("primitive index {index} out of range for K = {k}")]
    IndexOutOfRange { index: usize, k: usize },
    #[error("invalid library configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("not a prior library file (bad magic)")]
    BadMagic,
    #[error("unsupported library format version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt library payload: {0}")]
    Corrupt(String),
    #[error("library {field} mismatch: scenario has {expected}, file has {found}")]
    Mismatch {
        field: &'static str,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Trust level in the prior library, in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Beta(f64);

impl Beta {
    pub const ZERO: Beta = Beta(0.0);

    pub fn new(beta: f64) -> Result<Self, LibraryError> {
        if (0.0..=1.0).contains(&beta) {
            Ok(Self(beta))
        } else {
            Err(LibraryError::InvalidBeta(beta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnchorKey {
    pub gx: u32,
    pub gy: u32,
    pub gh: u32,
}

/// Discretization behind the anchor mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorGrid {
    pub bounds: Bounds,
    pub cell_size: f64,
    pub n_heading_bins: u32,
}

impl AnchorGrid {
    pub fn new(bounds: Bounds, cell_size: f64, n_heading_bins: u32) -> Result<Self, LibraryError> {
        let grid = Self {
            bounds,
            cell_size,
            n_heading_bins,
        };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<(), LibraryError> {
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return Err(LibraryError::InvalidConfig(
                "cell_size must be finite and > 0",
            ));
        }
        if self.n_heading_bins == 0 {
            return Err(LibraryError::InvalidConfig("n_heading_bins must be >= 1"));
        }
        let b = &self.bounds;
        if !(b.min.is_finite() && b.max.is_finite() && b.width() > 0.0 && b.height() > 0.0) {
            return Err(LibraryError::InvalidConfig(
                "bounds must be finite with positive area",
            ));
        }
        Ok(())
    }

    pub fn columns(&self) -> u32 {
        ((self.bounds.width() / self.cell_size).ceil() as u32).max(1)
    }

    pub fn rows(&self) -> u32 {
        ((self.bounds.height() / self.cell_size).ceil() as u32).max(1)
    }

    pub fn contains_key(&self, key: &AnchorKey) -> bool {
        key.gx < self.columns() && key.gy < self.rows() && key.gh < self.n_heading_bins
    }

    /// The anchor mapping: grid cell of the position plus heading bin over
    /// [0, 2pi).
    pub fn map_state(&self, s: &VehicleState) -> Result<AnchorKey, LibraryError> {
        let p = s.position();
        if !p.is_finite() || !self.bounds.contains(p) {
            return Err(LibraryError::OutOfGrid { x: s.x, y: s.y });
        }
        let cell = |v: f64, lo: f64, count: u32| {
            (((v - lo) / self.cell_size).floor() as u32).min(count - 1)
        };
        let bin_width = TAU / self.n_heading_bins as f64;
        let gh =
            ((s.heading.rem_euclid(TAU) / bin_width).floor() as u32).min(self.n_heading_bins - 1);
        Ok(AnchorKey {
            gx: cell(s.x, self.bounds.min.x, self.columns()),
            gy: cell(s.y, self.bounds.min.y, self.rows()),
            gh,
        })
    }
}

/// How a finished stage is pruned before it reaches the library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimPolicy {
    /// Fraction of lowest-cost episodes dropped.
    pub trim_low: f64,
    /// Fraction of highest-cost episodes dropped.
    pub trim_high: f64,
    /// Keep only the cheapest surviving episode.
    pub store_best_episode_only: bool,
}

impl Default for TrimPolicy {
    fn default() -> Self {
        Self {
            trim_low: 0.1,
            trim_high: 0.1,
            store_best_episode_only: false,
        }
    }
}

impl TrimPolicy {
    fn validate(&self) -> Result<(), LibraryError> {
        if !(0.0..=1.0).contains(&self.trim_low) || !(0.0..=1.0).contains(&self.trim_high) {
            return Err(LibraryError::InvalidConfig(
                "trim fractions must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// `ceil(fraction * n)`, tolerant of representation error such as
/// `0.1 * 30 = 3.0000000000000004`.
pub fn trim_count(fraction: f64, n: usize) -> usize {
    let raw = fraction * n as f64;
    let nearest = raw.round();
    let count = if (raw - nearest).abs() <= 1e-9 * raw.abs().max(1.0) {
        nearest
    } else {
        raw.ceil()
    };
    (count.max(0.0) as usize).min(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorEntry {
    pub primitive_index: usize,
    pub episode_id: u64,
    /// Full-episode cost of the trajectory that produced this entry.
    pub trajectory_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagedEpisode {
    pub episode_id: u64,
    pub cost: f64,
    pub steps: Vec<(VehicleState, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommitSummary {
    pub staged: usize,
    pub episodes_committed: usize,
    pub entries_committed: usize,
}

#[derive(Debug, Clone)]
pub struct PriorLibrary {
    grid: AnchorGrid,
    k: usize,
    policy: TrimPolicy,
    entries: BTreeMap<AnchorKey, Vec<PriorEntry>>,
    staged: Vec<StagedEpisode>,
    pmf_cache: HashMap<AnchorKey, Vec<f64>>,
}

/// Equality covers the persisted parts: grid, K and entries. Staging and
/// the trim policy are run-time state.
impl PartialEq for PriorLibrary {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.k == other.k && self.entries == other.entries
    }
}

fn pmf_from_entries(entries: &[PriorEntry], k: usize) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    for e in entries {
        counts[e.primitive_index] += 1;
    }
    let total = entries.len() as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}

impl PriorLibrary {
    pub fn new(grid: AnchorGrid, k: usize, policy: TrimPolicy) -> Result<Self, LibraryError> {
        grid.validate()?;
        policy.validate()?;
        if k == 0 || k > u32::MAX as usize {
            return Err(LibraryError::InvalidConfig("K must be in [1, u32::MAX]"));
        }
        Ok(Self {
            grid,
            k,
            policy,
            entries: BTreeMap::new(),
            staged: Vec::new(),
            pmf_cache: HashMap::new(),
        })
    }

    pub fn grid(&self) -> &AnchorGrid {
        &self.grid
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn policy(&self) -> &TrimPolicy {
        &self.policy
    }

    pub fn set_policy(&mut self, policy: TrimPolicy) -> Result<(), LibraryError> {
        policy.validate()?;
        self.policy = policy;
        Ok(())
    }

    pub fn entries(&self) -> &BTreeMap<AnchorKey, Vec<PriorEntry>> {
        &self.entries
    }

    pub fn entries_at(&self, key: &AnchorKey) -> &[PriorEntry] {
        self.entries.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn total_entries(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn staged(&self) -> &[StagedEpisode] {
        &self.staged
    }

    pub fn map_state(&self, s: &VehicleState) -> Result<AnchorKey, LibraryError> {
        self.grid.map_state(s)
    }

    pub fn contains_state(&self, s: &VehicleState) -> bool {
        self.map_state(s)
            .map(|k| self.entries.contains_key(&k))
            .unwrap_or(false)
    }

    /// Inserts a single entry directly, bypassing staging and trimming.
    pub fn insert(&mut self, key: AnchorKey, entry: PriorEntry) -> Result<(), LibraryError> {
        self.check_entry(&key, &entry)?;
        self.entries.entry(key).or_default().push(entry);
        self.refresh_pmf(key);
        Ok(())
    }

    fn check_entry(&self, key: &AnchorKey, entry: &PriorEntry) -> Result<(), LibraryError> {
        if entry.primitive_index >= self.k {
            return Err(LibraryError::IndexOutOfRange {
                index: entry.primitive_index,
                k: self.k,
            });
        }
        if !self.grid.contains_key(key) {
            return Err(LibraryError::Corrupt(format!(
                "anchor {key:?} outside the grid"
            )));
        }
        if !entry.trajectory_cost.is_finite() {
            return Err(LibraryError::Corrupt("non-finite trajectory cost".into()));
        }
        Ok(())
    }

    fn refresh_pmf(&mut self, key: AnchorKey) {
        if let Some(list) = self.entries.get(&key) {
            self.pmf_cache.insert(key, pmf_from_entries(list, self.k));
        }
    }

    /// Queues a finished episode for the next commit. Only successful,
    /// nonempty episodes are accepted; returns whether it was staged.
    pub fn stage_episode(
        &mut self,
        episode_id: u64,
        trajectory: Vec<(VehicleState, usize)>,
        episode_cost: f64,
        reached_destination: bool,
    ) -> Result<bool, LibraryError> {
        if !reached_destination || trajectory.is_empty() {
            return Ok(false);
        }
        if !episode_cost.is_finite() {
            return Err(LibraryError::Corrupt("non-finite episode cost".into()));
        }
        if let Some(&(_, index)) = trajectory.iter().find(|(_, i)| *i >= self.k) {
            return Err(LibraryError::IndexOutOfRange { index, k: self.k });
        }
        self.staged.push(StagedEpisode {
            episode_id,
            cost: episode_cost,
            steps: trajectory,
        });
        Ok(true)
    }

    /// Trims the staged episodes by cost and stores the survivors'
    /// (state, primitive) pairs at their anchors. Staging is cleared.
    pub fn commit_stage(&mut self) -> CommitSummary {
        let mut staged = std::mem::take(&mut self.staged);
        let n = staged.len();
        staged.sort_by(|a, b| {
            a.cost
                .total_cmp(&b.cost)
                .then(a.episode_id.cmp(&b.episode_id))
        });

        let low = trim_count(self.policy.trim_low, n);
        let high = trim_count(self.policy.trim_high, n);
        let mut survivors: Vec<StagedEpisode> = if low + high >= n {
            Vec::new()
        } else {
            staged.drain(low..n - high).collect()
        };
        if self.policy.store_best_episode_only {
            survivors.truncate(1);
        }

        let mut summary = CommitSummary {
            staged: n,
            episodes_committed: survivors.len(),
            entries_committed: 0,
        };
        let mut touched = Vec::new();
        for episode in survivors {
            for (state, primitive_index) in episode.steps {
                // Out-of-grid states have no anchor to store under.
                let Ok(key) = self.grid.map_state(&state) else {
                    continue;
                };
                self.entries.entry(key).or_default().push(PriorEntry {
                    primitive_index,
                    episode_id: episode.episode_id,
                    trajectory_cost: episode.cost,
                });
                touched.push(key);
                summary.entries_committed += 1;
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for key in touched {
            self.refresh_pmf(key);
        }
        summary
    }

    /// Occurrence frequencies of each primitive at `key`.
    pub fn empirical_pmf(&self, key: &AnchorKey) -> Result<&[f64], LibraryError> {
        self.pmf_cache
            .get(key)
            .map(Vec::as_slice)
            .ok_or(LibraryError::KeyAbsent(*key))
    }

    /// Uniform if the state's anchor holds no priors, otherwise
    /// `(1 - beta) / K + beta * empirical`.
    pub fn sampling_pmf(&self, s: &VehicleState, beta: Beta) -> Vec<f64> {
        let uniform = 1.0 / self.k as f64;
        match self.anchor_pmf(s) {
            Some(emp) => emp
                .iter()
                .map(|e| (1.0 - beta.0) * uniform + beta.0 * e)
                .collect(),
            None => vec![uniform; self.k],
        }
    }

    fn anchor_pmf(&self, s: &VehicleState) -> Option<&[f64]> {
        let key = self.map_state(s).ok()?;
        self.pmf_cache.get(&key).map(Vec::as_slice)
    }

    /// `n` i.i.d. draws from `sampling_pmf`. Whenever that PMF is exactly
    /// uniform the draws consume the generator the same way as
    /// `PrimitiveDictionary::uniform_sample`.
    pub fn sample_primitive<R: Rng + ?Sized>(
        &self,
        s: &VehicleState,
        beta: Beta,
        n: usize,
        rng: &mut R,
    ) -> Vec<usize> {
        if beta.0 == 0.0 || self.anchor_pmf(s).is_none() {
            return uniform_indices(self.k, n, rng);
        }
        let pmf = self.sampling_pmf(s, beta);
        let dist = WeightedIndex::new(&pmf).expect("mixture PMF has positive mass");
        (0..n).map(|_| dist.sample(rng)).collect()
    }
}

/// Sampling entry point used by the planner, tolerant of a missing library.
pub fn sample_indices<R: Rng + ?Sized>(
    library: Option<&PriorLibrary>,
    k: usize,
    s: &VehicleState,
    beta: Beta,
    n: usize,
    rng: &mut R,
) -> Vec<usize> {
    match library {
        Some(lib) => lib.sample_primitive(s, beta, n, rng),
        None => uniform_indices(k, n, rng),
    }
}
