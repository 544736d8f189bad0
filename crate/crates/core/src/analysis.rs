//! Probability of beating the dictionary-mean cost with N samples, in
//! closed form and by Monte Carlo.
//!
//! With `p` the chance that a single draw costs at most the mean `mu`, at
//! least one of `N` independent draws does so with probability
//! `1 - (1 - p)^N`. Under uniform sampling `p = |D-| / |D|` (`delta1`); under
//! the empirical prior PMF `p = m- / m` (`delta2`).

use crate::costing::{CostError, CostModel};
use crate::dynamics::VehicleState;
use crate::primitives::PrimitiveDictionary;
use crate::prior_library::{AnchorKey, PriorLibrary};
use crate::seed::{self, tag};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

pub const MIN_TRIALS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("delta2 needs m >= 1 stored entries")]
    NoEntries,
    #[error("m_minus = {m_minus} exceeds m = {m}")]
    TooManyBelowMean { m_minus: usize, m: usize },
    #[error("validation needs at least {MIN_TRIALS} trials, got {0}")]
    TooFewTrials(usize),
    #[error("sample count N must be >= 1")]
    NoSamples,
    #[error("PMF has {got} entries, expected {expected}")]
    PmfLength { expected: usize, got: usize },
    #[error("PMF has no positive mass")]
    EmptyPmf,
    #[error(transparent)]
    Cost(#[from] CostError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorStats {
    pub mu: f64,
    /// Fraction of the dictionary with cost <= mu.
    pub p_minus: f64,
    pub m: usize,
    pub m_minus: usize,
}

/// How the N candidates are drawn in a validation trial.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    Uniform,
    Pmf(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaReport {
    pub empirical: f64,
    pub analytic: f64,
    pub z: f64,
    pub trials: usize,
}

pub fn delta1(p_minus: f64, n: usize) -> f64 {
    1.0 - (1.0 - p_minus).powi(n as i32)
}

pub fn delta2(m_minus: usize, m: usize, n: usize) -> Result<f64, AnalysisError> {
    if m == 0 {
        return Err(AnalysisError::NoEntries);
    }
    if m_minus > m {
        return Err(AnalysisError::TooManyBelowMean { m_minus, m });
    }
    Ok(delta1(m_minus as f64 / m as f64, n))
}

/// Mean cost over the whole dictionary at `s`, with the per-primitive costs.
pub fn anchor_mean(
    s: &VehicleState,
    dict: &PrimitiveDictionary,
    cost: &CostModel<'_>,
) -> Result<(f64, Vec<f64>), CostError> {
    let costs = dict
        .iter()
        .map(|p| cost.evaluate(s, p).map(|r| r.cost))
        .collect::<Result<Vec<_>, _>>()?;
    let mu = costs.iter().sum::<f64>() / costs.len() as f64;
    Ok((mu, costs))
}

/// Ties with the mean count as outperforming it.
pub fn fraction_below(costs: &[f64], mu: f64) -> f64 {
    costs.iter().filter(|&&c| c <= mu).count() as f64 / costs.len() as f64
}

pub fn anchor_stats(
    costs: &[f64],
    mu: f64,
    library: Option<&PriorLibrary>,
    key: Option<AnchorKey>,
) -> AnchorStats {
    let entries = match (library, key) {
        (Some(lib), Some(k)) => lib.entries_at(&k),
        _ => &[],
    };
    AnchorStats {
        mu,
        p_minus: fraction_below(costs, mu),
        m: entries.len(),
        m_minus: entries
            .iter()
            .filter(|e| costs[e.primitive_index] <= mu)
            .count(),
    }
}

/// Binomial z-score of an observed frequency against `analytic`. A
/// degenerate (0 or 1) analytic value gives 0 on exact agreement and an
/// infinite score otherwise.
pub fn z_score(empirical: f64, analytic: f64, trials: usize) -> f64 {
    let se = (analytic * (1.0 - analytic) / trials as f64).sqrt();
    if se > 0.0 {
        (empirical - analytic) / se
    } else if empirical == analytic {
        0.0
    } else {
        (empirical - analytic).signum() * f64::INFINITY
    }
}

fn draw<R: Rng>(sampler: &Option<WeightedIndex<f64>>, k: usize, rng: &mut R) -> usize {
    match sampler {
        Some(w) => w.sample(rng),
        None => rng.gen_range(0..k),
    }
}

/// Fraction of `trials` in which the cheapest of `n` sampled primitives
/// costs at most `mu`. Trial `i` uses its own stream derived from
/// `(seed, i)`, so the result does not depend on thread scheduling.
pub fn monte_carlo_delta(
    costs: &[f64],
    mu: f64,
    sampling: &Sampling,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<f64, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::NoSamples);
    }
    let k = costs.len();
    let sampler = match sampling {
        Sampling::Uniform => None,
        Sampling::Pmf(p) => {
            if p.len() != k {
                return Err(AnalysisError::PmfLength {
                    expected: k,
                    got: p.len(),
                });
            }
            Some(WeightedIndex::new(p).map_err(|_| AnalysisError::EmptyPmf)?)
        }
    };
    let hits = (0..trials as u64)
        .into_par_iter()
        .filter(|&trial| {
            let mut rng = seed::stream(seed, &[tag::VALIDATE, trial]);
            let best = (0..n)
                .map(|_| costs[draw(&sampler, k, &mut rng)])
                .fold(f64::INFINITY, f64::min);
            best <= mu
        })
        .count();
    Ok(hits as f64 / trials as f64)
}

/// Closed-form success probability for `sampling`: the mass it places on
/// primitives with cost <= mu, compounded over `n` draws.
pub fn analytic_delta(costs: &[f64], mu: f64, sampling: &Sampling, n: usize) -> f64 {
    let q = match sampling {
        Sampling::Uniform => fraction_below(costs, mu),
        Sampling::Pmf(p) => {
            let total: f64 = p.iter().sum();
            p.iter()
                .zip(costs)
                .filter(|(_, &c)| c <= mu)
                .map(|(w, _)| w / total)
                .sum::<f64>()
                .min(1.0)
        }
    };
    delta1(q, n)
}

/// Monte Carlo estimate vs closed form for one state and distribution.
pub fn validate_delta(
    s: &VehicleState,
    dict: &PrimitiveDictionary,
    cost: &CostModel<'_>,
    sampling: &Sampling,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<DeltaReport, AnalysisError> {
    let (mu, costs) = anchor_mean(s, dict, cost)?;
    validate_costs(&costs, mu, sampling, n, trials, seed)
}

pub fn validate_costs(
    costs: &[f64],
    mu: f64,
    sampling: &Sampling,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<DeltaReport, AnalysisError> {
    if trials < MIN_TRIALS {
        return Err(AnalysisError::TooFewTrials(trials));
    }
    let empirical = monte_carlo_delta(costs, mu, sampling, n, trials, seed)?;
    let analytic = analytic_delta(costs, mu, sampling, n);
    Ok(DeltaReport {
        empirical,
        analytic,
        z: z_score(empirical, analytic, trials),
        trials,
    })
}

/// Both validations at one anchor state: uniform sampling against `delta1`
/// and, when the anchor has stored priors, the empirical PMF against
/// `delta2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorValidation {
    pub state: VehicleState,
    pub key: Option<AnchorKey>,
    pub stats: AnchorStats,
    pub delta1: f64,
    pub uniform: DeltaReport,
    pub delta2: Option<f64>,
    pub prior: Option<DeltaReport>,
}

pub fn validate_anchor(
    s: &VehicleState,
    dict: &PrimitiveDictionary,
    cost: &CostModel<'_>,
    library: Option<&PriorLibrary>,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<AnchorValidation, AnalysisError> {
    let (mu, costs) = anchor_mean(s, dict, cost)?;
    let key = library.and_then(|lib| lib.map_state(s).ok());
    let stats = anchor_stats(&costs, mu, library, key);
    let uniform = validate_costs(&costs, mu, &Sampling::Uniform, n, trials, seed)?;
    let (delta2_value, prior) = match (library, key) {
        (Some(lib), Some(k)) if stats.m > 0 => {
            let pmf = lib.empirical_pmf(&k).expect("anchor has entries").to_vec();
            let report = validate_costs(&costs, mu, &Sampling::Pmf(pmf), n, trials, seed ^ 0x5eed)?;
            (Some(delta2(stats.m_minus, stats.m, n)?), Some(report))
        }
        _ => (None, None),
    };
    Ok(AnchorValidation {
        state: *s,
        key,
        stats,
        delta1: delta1(stats.p_minus, n),
        uniform,
        delta2: delta2_value,
        prior,
    })
}
