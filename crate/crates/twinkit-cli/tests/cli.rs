//! End-to-end tests driving the `twinkit` binary: golden traces, report
//! schemas, exit codes, and file outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn twinkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twinkit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to run twinkit")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process terminated by signal")
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("stdout is not a single JSON value")
}

fn write_toy_csv(dir: &Path) {
    fs::write(dir.join("toy.csv"), "x\n0\n1\n2\n3\n4\n5\n").unwrap();
}

fn read_index_file(path: &Path) -> Vec<usize> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect()
}

#[test]
fn split_toy_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_csv(dir.path());
    let out = twinkit(
        dir.path(),
        &[
            "split", "--input", "toy.csv", "--r", "2", "--start", "index=0",
        ],
    );
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("test.csv")).unwrap(),
        "x\n0\n2\n4\n"
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("train.csv")).unwrap(),
        "x\n1\n3\n5\n"
    );
    let report = stdout_json(&out);
    assert_eq!(report["N"], 6);
    assert_eq!(report["d"], 1);
    assert_eq!(report["r"], 2);
    assert_eq!(report["n_test"], 3);
    assert!(report["energy_metric"].is_f64());
    assert!(report["wall_time_ms"].is_f64());
}

#[test]
fn split_emit_indices() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_csv(dir.path());
    let out = twinkit(
        dir.path(),
        &[
            "split",
            "--input",
            "toy.csv",
            "--r",
            "3",
            "--start",
            "index=0",
            "--emit-indices",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    assert_eq!(read_index_file(&dir.path().join("test.idx")), vec![0, 3]);
    assert_eq!(
        read_index_file(&dir.path().join("train.idx")),
        vec![1, 2, 4, 5]
    );
}

#[test]
fn split_rejects_r_below_two() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_csv(dir.path());
    let out = twinkit(dir.path(), &["split", "--input", "toy.csv", "--r", "1"]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("r must be"), "stderr: {stderr}");
    assert!(!dir.path().join("train.csv").exists());
    assert!(!dir.path().join("test.csv").exists());
}

#[test]
fn split_missing_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = twinkit(dir.path(), &["split", "--input", "nope.csv", "--r", "2"]);
    assert_eq!(exit_code(&out), 4);
}

#[test]
fn split_bad_cell_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "x,y\n1,2\n3,oops\n").unwrap();
    let out = twinkit(dir.path(), &["split", "--input", "bad.csv", "--r", "2"]);
    assert_eq!(exit_code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("row 1") && stderr.contains("\"y\""),
        "stderr: {stderr}"
    );
}

#[test]
fn split_leaves_no_partial_outputs_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_csv(dir.path());
    // train path lands in a directory that does not exist
    let out = twinkit(
        dir.path(),
        &[
            "split",
            "--input",
            "toy.csv",
            "--r",
            "2",
            "--test-out",
            "missing_dir/test.csv",
        ],
    );
    assert_eq!(exit_code(&out), 4);
    assert!(!dir.path().join("train.csv").exists());
    assert!(!dir.path().join("train.csv.tmp").exists());
}

#[test]
fn fold_s3_toy_trace() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_csv(dir.path());
    let out = twinkit(
        dir.path(),
        &[
            "fold",
            "--input",
            "toy.csv",
            "--k",
            "3",
            "--strategy",
            "s3",
            "--start",
            "index=0",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    assert_eq!(
        read_index_file(&dir.path().join("folds_fold1.idx")),
        vec![0, 3]
    );
    assert_eq!(
        read_index_file(&dir.path().join("folds_fold2.idx")),
        vec![1, 4]
    );
    assert_eq!(
        read_index_file(&dir.path().join("folds_fold3.idx")),
        vec![2, 5]
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["strategy"], "s3");
    assert_eq!(summary["k"], 3);
    assert_eq!(summary["fold_sizes"], serde_json::json!([2, 2, 2]));
    // summary file holds the same JSON
    let on_disk: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("folds_summary.json")).unwrap())
            .unwrap();
    assert_eq!(on_disk, summary);
}

#[test]
fn fold_s2_partition_and_power_of_two_rule() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("eight.csv"), "x\n0\n1\n2\n3\n4\n5\n6\n7\n").unwrap();
    let out = twinkit(
        dir.path(),
        &[
            "fold",
            "--input",
            "eight.csv",
            "--k",
            "4",
            "--strategy",
            "s2",
            "--prefix",
            "p",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    let mut seen = Vec::new();
    for i in 1..=4 {
        let fold = read_index_file(&dir.path().join(format!("p_fold{i}.idx")));
        assert_eq!(fold.len(), 2);
        seen.extend(fold);
    }
    seen.sort_unstable();
    assert_eq!(seen, (0..8).collect::<Vec<_>>());

    let out = twinkit(
        dir.path(),
        &[
            "fold",
            "--input",
            "eight.csv",
            "--k",
            "3",
            "--strategy",
            "s2",
        ],
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn energy_golden_values() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("line4.csv"), "x\n0\n1\n2\n3\n").unwrap();
    fs::write(dir.path().join("subset.idx"), "0\n2\n").unwrap();
    let out = twinkit(
        dir.path(),
        &[
            "energy",
            "--input",
            "line4.csv",
            "--indices",
            "subset.idx",
            "--no-standardize",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    assert!((report["energy_full"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((report["energy_between"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((report["energy_plot_metric"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!(report["prop1_relative_gap"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn energy_rejects_degenerate_subsets() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("line4.csv"), "x\n0\n1\n2\n3\n").unwrap();
    fs::write(dir.path().join("all.idx"), "0\n1\n2\n3\n").unwrap();
    fs::write(dir.path().join("empty.idx"), "").unwrap();
    fs::write(dir.path().join("oor.idx"), "9\n").unwrap();
    fs::write(dir.path().join("junk.idx"), "abc\n").unwrap();
    for (file, label) in [
        ("all.idx", "whole dataset"),
        ("empty.idx", "empty"),
        ("oor.idx", "out of range"),
        ("junk.idx", "junk"),
    ] {
        let out = twinkit(
            dir.path(),
            &["energy", "--input", "line4.csv", "--indices", file],
        );
        assert_eq!(exit_code(&out), 3, "{label} should be a data error");
    }
}

#[test]
fn bench_record_count_and_direction() {
    let dir = tempfile::tempdir().unwrap();
    let out = twinkit(
        dir.path(),
        &[
            "bench", "--n", "1000", "--d", "4", "--r", "5", "--reps", "50", "--seed", "7",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let records: Vec<Value> = stdout
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 100, "50 twinning + 50 random records");
    let mean = |method: &str| -> f64 {
        let vals: Vec<f64> = records
            .iter()
            .filter(|r| r["method"] == method)
            .map(|r| r["energy_metric"].as_f64().unwrap())
            .collect();
        assert_eq!(vals.len(), 50);
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    assert!(
        mean("twinning") < mean("random"),
        "twinning should beat random splitting on average"
    );
    for record in &records {
        assert_eq!(record["N"], 1000);
        assert_eq!(record["d"], 4);
        assert_eq!(record["r"], 5);
        assert!(record["rep"].is_u64());
        assert!(record["wall_time_ms"].is_f64());
    }
}

#[test]
fn start_random_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_csv(dir.path());
    let out = twinkit(
        dir.path(),
        &[
            "split", "--input", "toy.csv", "--r", "2", "--start", "random",
        ],
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn seed_with_deterministic_start_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_csv(dir.path());
    for start in ["farthest", "index=0"] {
        let out = twinkit(
            dir.path(),
            &[
                "split", "--input", "toy.csv", "--r", "2", "--start", start, "--seed", "5",
            ],
        );
        assert_eq!(exit_code(&out), 2, "--start {start} with --seed");
    }
}

#[test]
fn column_selection_and_constant_columns() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("mixed.csv"),
        "a,b,c\n1,5,0\n2,5,1\n3,5,2\n4,5,3\n",
    )
    .unwrap();
    // selecting the constant column under the default policy is a data error
    let out = twinkit(
        dir.path(),
        &[
            "split",
            "--input",
            "mixed.csv",
            "--columns",
            "a,b",
            "--r",
            "2",
        ],
    );
    assert_eq!(exit_code(&out), 3);
    // zero policy accepts it
    let out = twinkit(
        dir.path(),
        &[
            "split",
            "--input",
            "mixed.csv",
            "--columns",
            "a,b",
            "--r",
            "2",
            "--constant-columns",
            "zero",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    // written files keep only the selected columns, raw values
    let test = fs::read_to_string(dir.path().join("test.csv")).unwrap();
    assert!(test.starts_with("a,b\n"), "test.csv: {test}");
}
