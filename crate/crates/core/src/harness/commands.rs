use super::experiment::{evaluate, run_stage, BatchStats, StageReport};
use super::scenario::{Scenario, Setup};
use super::HarnessError;
use crate::analysis::{validate_anchor, AnchorValidation};
use crate::dynamics::VehicleState;
use crate::planner::EpisodeResult;
use crate::prior_library::Beta;
use crate::seed::{derive_seed, tag};
use std::fs;
use std::path::{Path, PathBuf};

pub const EPISODES_CSV: &str = "episodes.csv";
pub const LIBRARY_FILE: &str = "library.bin";
pub const TRAJECTORY_DIR: &str = "trajectories";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const VALIDATE_CSV: &str = "validate.csv";

/// Any |z| at or above this fails `validate`.
pub const Z_FAIL: f64 = 5.0;

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, HarnessError> {
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn prepare_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stages: Vec<StageReport>,
    pub episodes_csv: PathBuf,
    pub library_file: PathBuf,
}

fn write_trajectory(path: &Path, result: &EpisodeResult) -> Result<(), HarnessError> {
    let mut w = writer(path)?;
    w.write_record(["t", "x", "y", "heading", "chosen_primitive", "step_cost"])?;
    for s in &result.trajectory {
        w.write_record([
            s.state.t.to_string(),
            num(s.state.x),
            num(s.state.y),
            num(s.state.heading),
            s.primitive.to_string(),
            num(s.cost),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// `stages` data-collection stages sharing one library; writes the
/// per-episode CSV, one trajectory CSV per episode and the final library.
pub fn cmd_run(
    scenario: &Scenario,
    stages: usize,
    out_dir: &Path,
) -> Result<RunOutput, HarnessError> {
    let setup = scenario.build()?;
    let cost = setup.cost_model().map_err(HarnessError::from_cost)?;
    prepare_dir(out_dir)?;
    let traj_dir = out_dir.join(TRAJECTORY_DIR);
    prepare_dir(&traj_dir)?;

    let mut library = setup.empty_library();
    let mut reports = Vec::with_capacity(stages);
    for stage in 0..stages {
        let beta = Beta::new(scenario.beta_for_stage(stage))?;
        reports.push(run_stage(
            &setup,
            &cost,
            &mut library,
            stage,
            beta,
            setup.seed,
        )?);
    }

    let episodes_csv = out_dir.join(EPISODES_CSV);
    let mut w = writer(&episodes_csv)?;
    w.write_record([
        "stage",
        "episode",
        "steps",
        "total_cost",
        "reached",
        "blind_spot_count",
    ])?;
    for report in &reports {
        for (e, result) in report.episodes.iter().enumerate() {
            w.write_record([
                report.stage.to_string(),
                e.to_string(),
                result.steps().to_string(),
                num(result.total_cost),
                result.reached_destination.to_string(),
                result.blind_spot_count().to_string(),
            ])?;
            let name = format!("stage{:03}_episode{:03}.csv", report.stage, e);
            write_trajectory(&traj_dir.join(name), result)?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(&episodes_csv, e))?;

    let library_file = out_dir.join(LIBRARY_FILE);
    let file = fs::File::create(&library_file).map_err(|e| HarnessError::io(&library_file, e))?;
    library.save(std::io::BufWriter::new(file))?;

    Ok(RunOutput {
        stages: reports,
        episodes_csv,
        library_file,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub stats: BatchStats,
}

/// Evaluation-only episodes at each beta against a fixed library. Episode
/// `i` uses the same seed at every beta.
pub fn cmd_sweep_beta(
    scenario: &Scenario,
    betas: &[f64],
    episodes_per_beta: usize,
    library_path: &Path,
    out_dir: &Path,
) -> Result<Vec<SweepRow>, HarnessError> {
    let setup = scenario.build()?;
    let betas = betas
        .iter()
        .map(|&b| Beta::new(b))
        .collect::<Result<Vec<_>, _>>()?;
    if !library_path.exists() {
        return Err(HarnessError::MissingLibrary(library_path.to_path_buf()));
    }
    let library = setup.load_library(library_path)?;
    let cost = setup.cost_model().map_err(HarnessError::from_cost)?;
    prepare_dir(out_dir)?;

    let mut rows = Vec::with_capacity(betas.len());
    for beta in betas {
        let results = evaluate(
            &setup,
            &cost,
            Some(&library),
            beta,
            episodes_per_beta,
            setup.seed,
        )?;
        rows.push(SweepRow {
            beta: beta.value(),
            stats: BatchStats::from_results(&results),
        });
    }

    let path = out_dir.join(SWEEP_CSV);
    let mut w = writer(&path)?;
    w.write_record([
        "beta",
        "mean_cost",
        "success_rate",
        "episodes",
        "mean_cost_all",
    ])?;
    for row in &rows {
        w.write_record([
            num(row.beta),
            opt(row.stats.mean_success_cost),
            num(row.stats.success_rate()),
            row.stats.episodes.to_string(),
            num(row.stats.mean_cost),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;
    Ok(rows)
}

/// `count` states spread evenly over the reference path vertices, heading
/// along the path.
pub fn anchor_states(setup: &Setup, count: usize) -> Vec<VehicleState> {
    let path = setup.map.reference_path();
    let last = path.len() - 2;
    (0..count)
        .map(|j| {
            let i = if count <= 1 {
                0
            } else {
                ((j as f64 * last as f64) / (count - 1) as f64).round() as usize
            };
            let d = path[i + 1] - path[i];
            VehicleState::new(path[i].x, path[i].y, d.y.atan2(d.x), 0)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ValidateOutput {
    pub anchors: Vec<AnchorValidation>,
    pub max_abs_z: f64,
}

impl ValidateOutput {
    pub fn passed(&self) -> bool {
        self.max_abs_z < Z_FAIL
    }
}

/// Monte Carlo check of delta1 (uniform sampling) and, where the library
/// holds priors, delta2 (empirical sampling) at anchor states along the
/// reference path.
pub fn cmd_validate(
    scenario: &Scenario,
    anchors: usize,
    trials: usize,
    library_path: Option<&Path>,
    out_dir: &Path,
) -> Result<ValidateOutput, HarnessError> {
    let setup = scenario.build()?;
    let library = match library_path {
        Some(p) => setup.load_library(p)?,
        None => setup.empty_library(),
    };
    let cost = setup.cost_model().map_err(HarnessError::from_cost)?;
    prepare_dir(out_dir)?;

    let mut results = Vec::with_capacity(anchors);
    for (j, state) in anchor_states(&setup, anchors).iter().enumerate() {
        let seed = derive_seed(setup.seed, &[tag::VALIDATE, j as u64]);
        results.push(validate_anchor(
            state,
            &setup.dictionary,
            &cost,
            Some(&library),
            setup.config.samples,
            trials,
            seed,
        )?);
    }

    let path = out_dir.join(VALIDATE_CSV);
    let mut w = writer(&path)?;
    w.write_record([
        "anchor_gx",
        "anchor_gy",
        "anchor_gh",
        "x",
        "y",
        "heading",
        "mu",
        "p_minus",
        "m",
        "m_minus",
        "delta1",
        "delta2",
        "empirical_delta1",
        "empirical_delta2",
        "z_delta1",
        "z_delta2",
    ])?;
    let mut max_abs_z: f64 = 0.0;
    for a in &results {
        let key = |f: fn(&crate::prior_library::AnchorKey) -> u32| {
            a.key.as_ref().map(|k| f(k).to_string()).unwrap_or_default()
        };
        max_abs_z = max_abs_z.max(a.uniform.z.abs());
        if let Some(p) = &a.prior {
            max_abs_z = max_abs_z.max(p.z.abs());
        }
        w.write_record([
            key(|k| k.gx),
            key(|k| k.gy),
            key(|k| k.gh),
            num(a.state.x),
            num(a.state.y),
            num(a.state.heading),
            num(a.stats.mu),
            num(a.stats.p_minus),
            a.stats.m.to_string(),
            a.stats.m_minus.to_string(),
            num(a.delta1),
            opt(a.delta2),
            num(a.uniform.empirical),
            opt(a.prior.map(|p| p.empirical)),
            num(a.uniform.z),
            opt(a.prior.map(|p| p.z)),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;

    Ok(ValidateOutput {
        anchors: results,
        max_abs_z,
    })
}
