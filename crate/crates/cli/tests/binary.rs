use std::path::Path;
use std::process::{Command, Output};

use stable_exit_cli::ExperimentReport;

fn stable_exit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stable-exit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, x0: &str) -> String {
    let path = dir.join(name);
    let json = format!(
        r#"{{"alpha": 1.5, "r": 1.0, "x0": {x0},
            "mu": {{"d": 1, "type": "discrete", "atoms": [{{"z": [1], "m": 2}}, {{"z": [-1], "m": 2}}]}},
            "sampler": {{"kind": "exact"}}, "h": 1e-4, "n_paths": 3000, "seed": 5}}"#
    );
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn passing_sweep_exits_zero() {
    let out = stable_exit(&["closed-form", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let report = ExperimentReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.command, "closed-form");
    assert!(report.wall_time.is_none());
}

#[test]
fn failing_rows_exit_one() {
    let out = stable_exit(&[
        "mass-equivalence",
        "--seed",
        "1",
        "--n-paths",
        "2000",
        "--h-factor",
        "0.005",
        "--masses",
        "4,4,8",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = ExperimentReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(report.wall_time.is_some());
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let outside = write_config(dir.path(), "outside.json", "[1.0]");
    assert_eq!(
        stable_exit(&["estimate", "--config", &outside])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        stable_exit(&["estimate", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        stable_exit(&["verify-getoor", "--u", "0.5,1.2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        stable_exit(&["verify-lemma"]).status.code(),
        Some(2),
        "seed is required"
    );
    assert_eq!(
        stable_exit(&["mass-equivalence"]).status.code(),
        Some(2),
        "seed is required"
    );
    assert_eq!(
        stable_exit(&["closed-form", "--threads", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn repeated_estimate_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", "[0.2]");
    let run = |threads: &str, format: &str, name: &str| {
        let out = dir.path().join(name);
        let status = stable_exit(&[
            "estimate",
            "--config",
            &config,
            "--no-timing",
            "--threads",
            threads,
            "--format",
            format,
            "--out",
            out.to_str().unwrap(),
        ])
        .status;
        assert_eq!(status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    let first = run("1", "json", "a.json");
    assert_eq!(first, run("1", "json", "b.json"));
    assert_eq!(first, run("3", "json", "c.json"));
    let csv = run("2", "csv", "a.csv");
    assert_eq!(csv, run("1", "csv", "b.csv"));
    let text = String::from_utf8(csv).unwrap();
    assert!(text
        .starts_with("x0_norm,alpha,mu_total,expected,observed,stderr,n_truncated,pass,label\n"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn generator_accepts_measure_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mu.json");
    std::fs::write(
        &path,
        r#"{"d": 2, "type": "discrete", "atoms": [{"z": [0.6, 0.8], "m": 1.5}, {"z": [-0.6, -0.8], "m": 1.5}]}"#,
    )
    .unwrap();
    let out = stable_exit(&[
        "verify-generator",
        "--alphas",
        "0.7,1.3",
        "--measure",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = ExperimentReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(report
        .rows
        .iter()
        .any(|r| r.label.starts_with("supplied alpha=1.3")));

    std::fs::write(
        &path,
        r#"{"d": 2, "type": "discrete", "atoms": [{"z": [0.6, 0.7], "m": 1.5}]}"#,
    )
    .unwrap();
    let out = stable_exit(&["verify-generator", "--measure", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
