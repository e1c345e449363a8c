use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsenet")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn learn_dlist_recovers_single_relu() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("relu.json");
    fs::write(&net, r#"{"n":2,"s":1,"k":1,"u":[1.0],"w":[[1.0,1.0]],"b":[1.0]}"#).unwrap();
    let text = stdout(&["learn-dlist", "--net", path(&net), "--full-cube", "--s", "1", "--grid-m", "1"]);
    let report: Value = serde_json::from_str(&text).unwrap();
    assert!(report["train_max_residual"].as_f64().unwrap() <= 1e-6);
    assert!(report["train"]["mse"].as_f64().unwrap() <= 1e-12);
    assert_eq!(report["train"]["count"], 4);
    assert!(report["model"]["nodes"].as_array().unwrap().len() <= 2);
}

#[test]
fn dataset_files_drive_the_learners() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.csv");
    // y = x1·x2 on the full 2-cube.
    fs::write(&data, "x1,x2,y\n1,1,1\n-1,1,-1\n1,-1,-1\n-1,-1,1\n").unwrap();
    let low: Value = serde_json::from_str(&stdout(&["learn-low-degree", "--data", path(&data), "--d", "1", "--ridge", "0"])).unwrap();
    assert!((low["train"]["mse"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let full: Value = serde_json::from_str(&stdout(&["learn-low-degree", "--data", path(&data), "--d", "2", "--ridge", "0"])).unwrap();
    assert!(full["train"]["mse"].as_f64().unwrap() < 1e-20);
    assert_eq!(code(&["learn-dlist", "--data", path(&data), "--s", "2"]), 0);
}

#[test]
fn outputs_go_to_the_requested_file() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("index.json");
    assert_eq!(code(&["construct", "index", "--b", "2", "--out", path(&net)]), 0);
    let spectrum = dir.path().join("spectrum.csv");
    assert_eq!(code(&["transform", "--net", path(&net), "--out", path(&spectrum)]), 0);
    let text = fs::read_to_string(&spectrum).unwrap();
    assert_eq!(text.lines().next(), Some("bitmask,coefficient"));
    assert_eq!(text.lines().count(), 1 + (1 << 6));
}

#[test]
fn bounds_table_emits_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    fs::write(&grid, r#"[{"n": 8, "s": 4, "W": 1, "B": 1, "m": 64, "measured": {"rademacher": 0.1}}, {"n": 1}]"#).unwrap();
    let text = stdout(&["bounds-table", "--grid", path(&grid)]);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(&rows[0][col("measured_rademacher")], "0.1");
    assert_eq!(&rows[1][col("measured_rademacher")], "");
    // n = 1 is outside the log terms' domain.
    assert_eq!(&rows[1][col("as_bound")], "");
    let bound: f64 = rows[0][col("rademacher")].parse().unwrap();
    let (r, m): (f64, f64) = (8f64.sqrt(), 64.0);
    let want = (r + 1.0) * (4.0 * 8.0 * (m * (r + 1.0)).ln()).sqrt() / m.sqrt();
    assert!((bound - want).abs() <= 1e-12 * want);
}

#[test]
fn verify_reports_every_check() {
    let text = stdout(&["verify", "--all", "--n-max", "8"]);
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
    let one = stdout(&["verify", "--check", "fourier,gamma", "--n-max", "5"]);
    assert_eq!(one.lines().count(), 2);
}

#[test]
fn argument_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    fs::write(&net, r#"{"n":2,"s":1,"k":1,"u":[1.0],"w":[[1.0,1.0]],"b":[1.0]}"#).unwrap();
    let bad_net = dir.path().join("bad.json");
    fs::write(&bad_net, r#"{"n":3,"s":1,"k":1,"u":[1.0],"w":[[1.0,1.0]],"b":[1.0]}"#).unwrap();
    let n = path(&net);
    for args in [
        vec!["frobnicate"],
        vec!["transform"],
        vec!["transform", "--net", n, "--unknown"],
        vec!["transform", "--net", "/does/not/exist.json"],
        vec!["transform", "--net", path(&bad_net)],
        vec!["sensitivity", "--net", n, "--trials", "100"],
        vec!["sensitivity", "--net", n, "--rho", "1.5"],
        vec!["learn-low-degree", "--net", n, "--samples", "10", "--d", "1"],
        vec!["learn-low-degree", "--net", n, "--d", "1"],
        vec!["rademacher", "--n", "4", "--s", "2", "--m-grid", "8"],
        vec!["rademacher", "--n", "4", "--s", "2", "--m-grid", "8,4", "--seed", "1"],
        vec!["construct", "junta", "--n", "3", "--relevant", "1"],
        vec!["construct", "parity", "--m", "3", "--set", "4"],
        vec!["verify", "--all", "--n-max", "40"],
        vec!["--threads", "0", "verify", "--all"],
    ] {
        assert_eq!(code(&args), 2, "{args:?}");
    }
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn runtime_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.csv");
    // No grid halfspace covers half of 4-bit parity with an affine piece.
    let mut text = String::from("x1,x2,x3,x4,y\n");
    for idx in 0..16u32 {
        let signs: Vec<i32> = (0..4).map(|i| if idx >> i & 1 == 1 { -1 } else { 1 }).collect();
        let y: i32 = signs.iter().product();
        let row: Vec<String> = signs.iter().chain([&y]).map(i32::to_string).collect();
        text.push_str(&(row.join(",") + "\n"));
    }
    fs::write(&data, text).unwrap();
    let out = run(&["learn-dlist", "--data", path(&data), "--s", "1", "--grid-m", "1"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    assert_eq!(code(&["construct", "index", "--b", "11"]), 1);
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = ["rademacher", "--n", "6", "--s", "4", "--pool-size", "8", "--m-grid", "8,32", "--trials", "2000", "--seed", "3"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    assert_eq!(a.lines().next(), Some("m,estimate,stderr,bound,ratio"));
    let other = stdout(&["rademacher", "--n", "6", "--s", "4", "--pool-size", "8", "--m-grid", "8,32", "--trials", "2000", "--seed", "4"]);
    assert_ne!(a, other);
}
