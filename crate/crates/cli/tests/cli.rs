use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn qcpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcpd")).args(args).env_remove("QCPD_OUT_DIR").output().expect("run qcpd")
}

fn ok(args: &[&str]) -> Output {
    let out = qcpd(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn trial_matrix_starts_uniform() {
    let dir = TempDir::new().unwrap();
    ok(&["trial", "--n", "20", "--c2", "0.604", "--k", "5", "--seed", "7", "--out", s(dir.path())]);
    let rows = csv_rows(&dir.path().join("trial.csv"));
    assert_eq!(rows.len(), 22, "header plus n + 1 steps");
    assert_eq!(rows[0][3], "eta_1");
    assert!(rows[1][3..23].iter().all(|v| v.parse::<f64>().unwrap() == 0.05));
    assert!(dir.path().join("trial.manifest.json").exists());
}

#[test]
fn orthogonal_trial_ends_on_a_delta() {
    let dir = TempDir::new().unwrap();
    let out = ok(&["trial", "--n", "10", "--c2", "0", "--k", "4", "--out", s(dir.path())]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("outcomes 0001111111"));
    let rows = csv_rows(&dir.path().join("trial.csv"));
    let last = rows.last().unwrap();
    let eta: Vec<f64> = last[3..13].iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(eta[3], 1.0);
    assert_eq!(eta.iter().sum::<f64>(), 1.0);
    assert_eq!(last[13], "4");
}

#[test]
fn bad_parameters_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["sweep-k", "--trials", "0"],
        vec!["sweep-overlap", "--grid", "0.2,1.5"],
        vec!["trial", "--c2", "-0.1"],
        vec!["trial", "--n", "5", "--k", "6"],
        vec!["sweep-k", "--strategies", "XY"],
    ] {
        let mut full = args.clone();
        full.extend(["--out", s(dir.path())]);
        assert_eq!(qcpd(&full).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = qcpd(&["trial", "--out", s(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn thread_count_does_not_change_sweeps() {
    let dirs: Vec<TempDir> = (0..3).map(|_| TempDir::new().unwrap()).collect();
    for (dir, threads) in dirs.iter().zip(["1", "2", "4"]) {
        ok(&[
            "sweep-k",
            "--n",
            "8",
            "--c2",
            "0.5",
            "--trials",
            "1500",
            "--epsilon",
            "0.01",
            "--threads",
            threads,
            "--out",
            s(dir.path()),
        ]);
    }
    let files: Vec<Vec<u8>> = dirs.iter().map(|d| fs::read(d.path().join("sweep-k.csv")).unwrap()).collect();
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn manifest_replay_reproduces_data_bitwise() {
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    ok(&[
        "sweep-overlap",
        "--n",
        "10",
        "--grid",
        "0.1,0.6,0.9",
        "--trials",
        "2000",
        "--seed",
        "11",
        "--threads",
        "1",
        "--format",
        "json",
        "--out",
        s(first.path()),
    ]);
    let manifest = first.path().join("sweep-overlap.manifest.json");
    let text = fs::read_to_string(&manifest).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["master_seed"], 11);
    assert_eq!(m["subcommand"], "sweep-overlap");
    assert!(m["duration_secs"].as_f64().unwrap() >= 0.0);

    ok(&["replay", s(&manifest), "--threads", "3", "--out", s(second.path())]);
    assert_eq!(
        fs::read(first.path().join("sweep-overlap.json")).unwrap(),
        fs::read(second.path().join("sweep-overlap.json")).unwrap()
    );
}

#[test]
fn other_sweeps_write_their_tables() {
    let dir = TempDir::new().unwrap();
    ok(&["sweep-n", "--n", "4,8", "--c2", "0.883", "--trials", "500", "--out", s(dir.path())]);
    ok(&["distances", "--n", "6", "--grid", "0.3,0.7", "--trials", "500", "--out", s(dir.path())]);
    let n_rows = csv_rows(&dir.path().join("sweep-n.csv"));
    assert_eq!(n_rows[0], ["axis", "strategy", "mean", "std_error", "trials", "epsilon", "seed"]);
    assert!(n_rows.iter().any(|r| r[0] == "8" && r[1] == "BI_minus_BL"));
    let d_rows = csv_rows(&dir.path().join("distances.csv"));
    assert!(d_rows.iter().any(|r| r[0] == "0.7" && r[1] == "SRM_minus_BI"));
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qcpd"))
        .args(["trial", "--n", "4", "--k", "2"])
        .env("QCPD_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("trial.csv").exists());
}

#[test]
fn generate_then_postselect_recovers_planted_outcomes() {
    let dir = TempDir::new().unwrap();
    let out = ok(&[
        "pipeline",
        "generate",
        "--n",
        "12",
        "--c2",
        "0",
        "--k",
        "5",
        "--frames",
        "3",
        "--out",
        s(dir.path()),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("planted 000011111111"));
    let events = dir.path().join("events.csv");
    let out = ok(&["pipeline", "postselect", s(&events), "--n", "12", "--out", s(dir.path())]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.matches("000011111111").count(), 3, "{text}");
}

#[test]
fn postselect_golden_file() {
    let dir = TempDir::new().unwrap();
    ok(&["pipeline", "postselect", s(&golden("golden_events.csv")), "--n", "4", "--out", s(dir.path())]);
    assert_eq!(
        fs::read_to_string(dir.path().join("outcomes.csv")).unwrap(),
        fs::read_to_string(golden("golden_outcomes.csv")).unwrap()
    );
}

#[test]
fn malformed_event_file_names_the_line() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("events.csv");
    fs::write(&path, "channel,timestamp_ns\nTRIG,0\nIDLER,40\nH,41\nV,30\n").unwrap();
    let out = qcpd(&["pipeline", "postselect", s(&path), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));

    fs::write(&path, "channel,timestamp_ns\nTRIG,0\nQ,4\n").unwrap();
    let out = qcpd(&["pipeline", "postselect", s(&path), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn stream_run_reports_each_strategy() {
    let dir = TempDir::new().unwrap();
    ok(&[
        "pipeline",
        "run",
        "--n",
        "6",
        "--c2",
        "0.4",
        "--trials",
        "300",
        "--format",
        "json",
        "--out",
        s(dir.path()),
    ]);
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("pipeline-run.json")).unwrap()).unwrap();
    let tags: Vec<&str> = rows.as_array().unwrap().iter().map(|r| r["strategy"].as_str().unwrap()).collect();
    assert_eq!(tags, ["BL", "BI"]);
    assert_eq!(rows[0]["invalid"], 0);
}
