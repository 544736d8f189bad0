use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use prior_mpc::harness::{self, Scenario};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "prior-mpc",
    version,
    about = "Primitive-sampling MPC with a prior trajectory library"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run data-collection stages and write episode metrics, trajectories and the library.
    Run {
        #[command(flatten)]
        common: Common,
        /// Number of stages; defaults to the length of the beta schedule.
        #[arg(long)]
        stages: Option<usize>,
    },
    /// Evaluate a fixed library at several beta values.
    SweepBeta {
        #[command(flatten)]
        common: Common,
        /// Comma-separated beta values, e.g. 0,0.5,1
        #[arg(long, value_delimiter = ',', required = true)]
        betas: Vec<f64>,
        /// Trained library file.
        #[arg(long)]
        library: PathBuf,
        /// Evaluation episodes per beta; defaults to planner.episodes_per_stage.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Monte Carlo check of the below-mean sampling probabilities.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Anchor states sampled along the reference path.
        #[arg(long, default_value_t = 10)]
        anchors: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        /// Optional library; without it only the uniform columns are filled.
        #[arg(long)]
        library: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<Scenario> {
    let mut scenario = harness::load_scenario(&common.scenario)?;
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    Ok(scenario)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { common, stages } => {
            let scenario = load(&common)?;
            let stages = stages.unwrap_or(scenario.planner.beta_schedule.len().max(1));
            let out = harness::cmd_run(&scenario, stages, &common.out)?;
            for report in &out.stages {
                let stats = report.stats();
                println!(
                    "stage {} beta={} success={}/{} mean_success_cost={} committed={} entries",
                    report.stage,
                    report.beta,
                    stats.successes,
                    stats.episodes,
                    stats
                        .mean_success_cost
                        .map(|c| format!("{c:.3}"))
                        .unwrap_or("-".into()),
                    report.commit.entries_committed,
                );
            }
            println!("wrote {}", common.out.display());
        }
        Command::SweepBeta {
            common,
            betas,
            library,
            episodes,
        } => {
            let scenario = load(&common)?;
            let episodes = episodes.unwrap_or(scenario.planner.episodes_per_stage);
            let rows = harness::cmd_sweep_beta(&scenario, &betas, episodes, &library, &common.out)?;
            for row in rows {
                println!(
                    "beta={} success_rate={:.3} mean_cost={}",
                    row.beta,
                    row.stats.success_rate(),
                    row.stats
                        .mean_success_cost
                        .map(|c| format!("{c:.3}"))
                        .unwrap_or("-".into()),
                );
            }
        }
        Command::Validate {
            common,
            anchors,
            trials,
            library,
        } => {
            if trials < prior_mpc::analysis::MIN_TRIALS {
                bail!(
                    "--trials must be at least {}",
                    prior_mpc::analysis::MIN_TRIALS
                );
            }
            let scenario = load(&common)?;
            let out =
                harness::cmd_validate(&scenario, anchors, trials, library.as_deref(), &common.out)
                    .context("validation failed")?;
            println!(
                "{} anchors, max |z| = {:.3}",
                out.anchors.len(),
                out.max_abs_z
            );
            if !out.passed() {
                eprintln!("|z| >= {} at some anchor", harness::Z_FAIL);
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
