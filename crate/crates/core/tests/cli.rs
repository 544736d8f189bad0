mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prior-mpc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_scenario(dir: &Path, json: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.json");
    fs::write(&path, json).unwrap();
    path
}

const ONE_EPISODE: &str = r#"{
  "seed": 5,
  "world": { "bounds": { "min": [0, 0], "max": [10, 10] }, "destination": [6, 5] },
  "start": { "x": 4, "y": 5 },
  "planner": { "episodes_per_stage": 1 }
}"#;

#[test]
fn run_writes_one_row_per_episode() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), ONE_EPISODE);
    let out = dir.path().join("out");
    let res = cli(&[
        "run",
        "--scenario",
        path_str(&scenario),
        "--out",
        path_str(&out),
        "--stages",
        "1",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = fs::read_to_string(out.join("episodes.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "stage,episode,steps,total_cost,reached,blind_spot_count"
    );
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').nth(4), Some("true"));
    assert!(out.join("trajectories/stage000_episode000.csv").is_file());
    assert!(out.join("library.bin").is_file());
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = common::scenario_path("minimal.json");
    let outputs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let res = cli(&[
                "run",
                "--scenario",
                path_str(&scenario),
                "--out",
                path_str(&out),
                "--stages",
                "2",
            ]);
            assert!(res.status.success());
            out
        })
        .collect();
    for file in [
        "episodes.csv",
        "library.bin",
        "trajectories/stage001_episode009.csv",
    ] {
        assert_eq!(
            fs::read(outputs[0].join(file)).unwrap(),
            fs::read(outputs[1].join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn seed_flag_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = common::scenario_path("minimal.json");
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let res = cli(&[
            "run",
            "--scenario",
            path_str(&scenario),
            "--out",
            path_str(&out),
            "--seed",
            seed,
        ]);
        assert!(res.status.success());
        fs::read(out.join("episodes.csv")).unwrap()
    };
    assert_ne!(run("1", "a"), run("2", "b"));
}

#[test]
fn sweep_needs_an_existing_library() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = common::scenario_path("minimal.json");
    let res = cli(&[
        "sweep-beta",
        "--scenario",
        path_str(&scenario),
        "--out",
        path_str(dir.path()),
        "--betas",
        "0,1",
        "--library",
        path_str(&dir.path().join("missing.bin")),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("missing.bin"));
}

#[test]
fn sweep_writes_a_row_per_beta_including_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = common::scenario_path("minimal.json");
    let train = dir.path().join("train");
    assert!(cli(&[
        "run",
        "--scenario",
        path_str(&scenario),
        "--out",
        path_str(&train)
    ])
    .status
    .success());
    let out = dir.path().join("sweep");
    let res = cli(&[
        "sweep-beta",
        "--scenario",
        path_str(&scenario),
        "--out",
        path_str(&out),
        "--betas",
        "0,1,1",
        "--library",
        path_str(&train.join("library.bin")),
        "--episodes",
        "3",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "beta,mean_cost,success_rate,episodes,mean_cost_all"
    );
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[2], lines[3]);
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn validate_without_library_leaves_prior_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = common::scenario_path("minimal.json");
    let res = cli(&[
        "validate",
        "--scenario",
        path_str(&scenario),
        "--out",
        path_str(dir.path()),
        "--anchors",
        "3",
        "--trials",
        "10000",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let mut reader = csv::Reader::from_path(dir.path().join("validate.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        for name in ["delta2", "empirical_delta2", "z_delta2"] {
            assert_eq!(&row[col(name)], "");
        }
        for name in ["delta1", "empirical_delta1", "z_delta1"] {
            assert!(row[col(name)].parse::<f64>().is_ok());
        }
    }
}

#[test]
fn validate_rejects_too_few_trials() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = common::scenario_path("minimal.json");
    let res = cli(&[
        "validate",
        "--scenario",
        path_str(&scenario),
        "--out",
        path_str(dir.path()),
        "--trials",
        "100",
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn invalid_scenario_reports_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        r#"{ "seed": 1,
             "world": { "bounds": { "min": [0, 0], "max": [10, 10] }, "destination": [6, 5] },
             "start": { "x": 4, "y": 5 },
             "dictionary": { "k": 3 },
             "planner": { "samples": 5 } }"#,
    );
    let res = cli(&[
        "run",
        "--scenario",
        path_str(&scenario),
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(
        err.contains("planner.samples") && err.contains("dictionary.k"),
        "{err}"
    );
}
