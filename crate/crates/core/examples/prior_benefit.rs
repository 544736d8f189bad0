//! Trains a prior library on a scenario, then compares paired evaluation
//! batches at two trust levels.
//!
//!     cargo run --release --example prior_benefit -- crates/core/scenarios/acceptance.json

use prior_mpc::harness::{evaluate, load_scenario, run_stage, BatchStats};
use prior_mpc::Beta;
use std::path::PathBuf;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(
        args.next()
            .unwrap_or("crates/core/scenarios/acceptance.json".into()),
    );
    let eval_episodes: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(50);
    let eval_beta: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.9);

    let scenario = load_scenario(&path)?;
    let setup = scenario.build()?;
    let cost = setup.cost_model()?;
    let mut library = setup.empty_library();
    for stage in 0..scenario.planner.beta_schedule.len() {
        let beta = Beta::new(scenario.beta_for_stage(stage))?;
        let report = run_stage(&setup, &cost, &mut library, stage, beta, setup.seed)?;
        let s = report.stats();
        println!(
            "train stage {stage} beta={:.2}: {}/{} reached, mean cost {:?}, +{} entries",
            beta.value(),
            s.successes,
            s.episodes,
            s.mean_success_cost,
            report.commit.entries_committed
        );
    }
    println!(
        "library: {} anchors, {} entries",
        library.entries().len(),
        library.total_entries()
    );

    for beta in [0.0, eval_beta] {
        let results = evaluate(
            &setup,
            &cost,
            Some(&library),
            Beta::new(beta)?,
            eval_episodes,
            setup.seed,
        )?;
        let s = BatchStats::from_results(&results);
        let mut reasons = std::collections::BTreeMap::new();
        for r in &results {
            *reasons.entry(format!("{:?}", r.termination)).or_insert(0) += 1;
        }
        println!("  terminations {reasons:?}");
        println!(
            "eval beta={beta:.2}: success rate {:.3}, mean success cost {:?}, mean cost {:.3}",
            s.success_rate(),
            s.mean_success_cost,
            s.mean_cost
        );
    }
    Ok(())
}
