//! The `fama-lnn` binary end to end: outputs, flags, snapshots and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use fama_lnn::curves::{read_curve_csv, CurveRow};
use fama_lnn::selection::PolicyKind;

const SMALL: &[&str] = &[
    "--set", "channel.n_ports=20",
    "--set", "channel.aperture=2",
    "--set", "dataset.size=300",
    "--set", "dataset.m_observed=5",
    "--set", "train.epochs=2",
    "--set", "train.architecture={\"ltc_units\":4,\"dense_layers\":[8]}",
];

fn fama(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fama-lnn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) {
    let o = fama(out, args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
}

fn single_row(path: &Path) -> CurveRow {
    let rows = read_curve_csv(path).unwrap();
    assert_eq!(rows.len(), 1);
    rows.into_iter().next().unwrap()
}

#[test]
fn infinite_thresholds_pin_the_outage() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["eval-op", "--trials", "200", "--gamma-th-db", "-inf"]);
    let row = single_row(&dir.path().join("eval_op.csv"));
    assert_eq!(row.op, 0.0);
    assert_eq!(row.gamma_th_db, f64::NEG_INFINITY);

    ok(dir.path(), &["eval-op", "--trials", "200", "--gamma-th-db", "inf"]);
    assert_eq!(single_row(&dir.path().join("eval_op.csv")).op, 1.0);
}

#[test]
fn flags_reach_the_outputs_and_snapshots_replay() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    ok(&first, &["eval-op", "--seed", "42", "--trials", "3000", "--gamma-th-db", "6", "--set", "eval.policy=\"reference\""]);
    let row = single_row(&first.join("eval_op.csv"));
    assert_eq!(row.trials, 3000);
    assert_eq!(row.policy, PolicyKind::Reference);
    assert!(row.op > 0.0 && row.op < 1.0);

    let snapshot = first.join("eval-op.config.json");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&snapshot).unwrap()).unwrap();
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["eval"]["trials"], 3000);

    let replay = dir.path().join("replay");
    ok(&replay, &["eval-op", "--config", snapshot.to_str().unwrap()]);
    assert_eq!(
        std::fs::read(first.join("eval_op.csv")).unwrap(),
        std::fs::read(replay.join("eval_op.csv")).unwrap()
    );

    // another seed gives another estimate
    let other = dir.path().join("other");
    ok(&other, &["eval-op", "--config", snapshot.to_str().unwrap(), "--seed", "43"]);
    assert_ne!(single_row(&other.join("eval_op.csv")).seed, row.seed);
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["eval-op", "--trials", "2000", "--gamma-th-db", "6"];
    ok(&dir.path().join("one"), &[&args[..], &["--workers", "1"]].concat());
    ok(&dir.path().join("three"), &[&args[..], &["--workers", "3"]].concat());
    assert_eq!(
        std::fs::read(dir.path().join("one/eval_op.csv")).unwrap(),
        std::fs::read(dir.path().join("three/eval_op.csv")).unwrap()
    );
}

#[test]
fn data_train_and_model_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(out, &[&["generate-data"], SMALL, &["--set", "dataset.export_csv=true"]].concat());
    assert!(out.join("dataset.bin").exists());
    let csv = std::fs::read_to_string(out.join("dataset.csv")).unwrap();
    assert_eq!(csv.lines().count(), 301);

    let data = out.join("dataset.bin");
    let data_arg = format!("dataset.path=\"{}\"", data.display());
    ok(out, &[&["train"], SMALL, &["--set", &data_arg]].concat());
    assert!(out.join("model.bin").exists());
    let history: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("train_history.json")).unwrap()).unwrap();
    assert!(history.to_string().contains("validation"));

    let model_arg = format!("eval.model=\"{}\"", out.join("model.bin").display());
    ok(
        out,
        &[&["eval-op"], SMALL, &["--trials", "500", "--set", "eval.policy=\"model\"", "--set", "eval.lookup_budget=2", "--set", &model_arg]].concat(),
    );
    let row = single_row(&out.join("eval_op.csv"));
    assert_eq!((row.policy, row.j_budget, row.trials), (PolicyKind::ModelAssisted, 2, 500));
}

#[test]
fn curve_observed_has_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[&["curve-observed"], SMALL, &[
            "--trials", "400",
            "--set", "eval.model_selection=\"fixed\"",
            "--set", "eval.m_values=[4,8]",
            "--set", "eval.j_values=[1,2]",
        ]]
        .concat(),
    );
    let rows = read_curve_csv(&dir.path().join("curve_observed.csv")).unwrap();
    for m in [4, 8] {
        let count = |kind| rows.iter().filter(|r| r.m_observed == m && r.policy == kind).count();
        assert_eq!(count(PolicyKind::Ideal), 1);
        assert_eq!(count(PolicyKind::Reference), 1);
        assert_eq!(count(PolicyKind::ModelAssisted), 2);
    }
    assert_eq!(rows.len(), 8);
    // models are cached for reuse by the other curve commands
    assert_eq!(std::fs::read_dir(dir.path().join("models")).unwrap().count(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| fama(dir.path(), args).status.code();

    assert_eq!(code(&["no-such-command"]), Some(2));
    assert_eq!(code(&["eval-op", "--set", "eval.no_such_key=1"]), Some(2));
    assert_eq!(code(&["eval-op", "--set", "channel.n_ports=1"]), Some(2));
    assert_eq!(code(&["eval-op", "--set", "eval.policy=\"model\""]), Some(2));

    assert_eq!(code(&["eval-op", "--config", "/nonexistent/run.json"]), Some(3));
    let garbage = dir.path().join("model.bin");
    std::fs::write(&garbage, b"not a model").unwrap();
    let model_arg = format!("eval.model=\"{}\"", garbage.display());
    assert_eq!(code(&["eval-op", "--set", "eval.policy=\"model\"", "--set", &model_arg]), Some(3));
}
