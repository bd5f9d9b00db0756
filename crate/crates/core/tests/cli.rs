use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use retroloop::cli::RunManifest;
use serde_json::Value;

fn retroloop(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retroloop"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) {
    let o = retroloop(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn report(path: &Path) -> Value {
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v["report"].clone()
}

#[test]
fn epr_is_byte_identical_across_runs() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    let args = [
        "epr",
        "--pairs",
        "10000",
        "--coupling",
        "0.1",
        "--noise",
        "1.0",
        "--seed",
        "7",
    ];
    ok(&a, &args);
    ok(&b, &args);
    for f in ["records.jsonl", "epr_report.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let first = fs::read_to_string(a.join("records.jsonl")).unwrap();
    let m = RunManifest::from_output_text(&first).unwrap();
    assert_eq!(m.subcommand, "epr");
    assert_eq!(m.seed, 7);
    assert_eq!(m.outputs, ["records.jsonl", "epr_report.json"]);
    assert_eq!(first.lines().count(), 10_001);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| retroloop(d.path(), args).status.code().unwrap();
    assert_eq!(code(&["epr", "--pairs", "0"]), 2);
    assert_eq!(code(&["epr", "--pairs", "20", "--predict", "exhaustive"]), 2);
    assert_eq!(code(&["epr", "--pairs", "3", "--coupling", "-1"]), 2);
    assert_eq!(code(&["loops", "--a", "012"]), 2);
    assert_eq!(code(&["fisher", "--deltas", "1,-2"]), 2);
    assert_eq!(code(&["bb84", "--qubits", "8"]), 2);
    assert_eq!(code(&["prophecy", "--trials", "10"]), 2);
    assert_eq!(code(&["--format", "csv", "prophecy"]), 2);
    assert_eq!(code(&["nonsense"]), 2);
    let missing = d.path().join("missing.jsonl");
    assert_eq!(
        code(&[
            "slice",
            "--records",
            missing.to_str().unwrap(),
            "--orientation",
            "0",
            "--outcome",
            "1"
        ]),
        1
    );
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn exhaustive_prediction_covers_every_balanced_slicing() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["epr", "--pairs", "12", "--predict", "exhaustive", "--seed", "3"],
    );
    let r = report(&d.path().join("epr_report.json"));
    assert_eq!(r["prediction"]["compared"], 924);
    assert_eq!(r["slicing_count"]["exact"], "924");
    assert_eq!(r["slices"].as_array().unwrap().len(), 6);
}

#[test]
fn slice_and_predict_read_record_files() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["epr", "--pairs", "2000", "--seed", "5", "--coupling", "0.4"],
    );
    let rec = d.path().join("records.jsonl");
    let rec = rec.to_str().unwrap();
    ok(
        d.path(),
        &[
            "slice",
            "--records",
            rec,
            "--orientation",
            "1",
            "--side",
            "b",
            "--outcome",
            "-1",
        ],
    );
    let s = report(&d.path().join("slice.json"));
    assert_eq!(s["slice"]["orientation"], 1);
    assert!((s["slice"]["retrodicted_mean"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    ok(
        d.path(),
        &[
            "--format",
            "csv",
            "slice",
            "--records",
            rec,
            "--orientation",
            "0",
            "--outcome",
            "1",
            "--co-condition",
            "0:-1",
        ],
    );
    let csv = fs::read_to_string(d.path().join("slice.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("orientation,"));
    ok(
        d.path(),
        &["predict", "--records", rec, "--search", "sampled", "--samples", "500"],
    );
    let p = report(&d.path().join("predict.json"));
    assert_eq!(p["prediction"]["compared"], 500);
}

#[test]
fn loops_reports_the_paradox() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["loops", "--a", "01", "--b", "10"]);
    let r = report(&d.path().join("loops.json"));
    assert_eq!(r["fixed_points"], serde_json::json!([]));
    assert_eq!(r["paradox"], true);
    assert!((r["stationary"]["p0"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    ok(
        d.path(),
        &["loops", "--a", "10", "--b", "10", "--policy", "cooperative"],
    );
    let r = report(&d.path().join("loops.json"));
    assert_eq!(r["fixed_points"], serde_json::json!([0, 1]));
    assert_eq!(r["histories"][0]["fluctuations"], serde_json::json!([]));
}

#[test]
fn fisher_emits_flat_product_column() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["fisher", "--family", "gaussian", "--theta", "1", "--deltas", "0.1,1,10"],
    );
    let csv = fs::read_to_string(d.path().join("fisher.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# manifest "));
    assert_eq!(lines[1], "delta,fisher,fisher_times_delta");
    assert_eq!(lines.len(), 5);
    let products: Vec<f64> = lines[2..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    for p in &products {
        assert!((p / products[0] - 1.0).abs() < 1e-6);
    }
}

#[test]
fn bb84_with_eve_shows_quarter_error_rate() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["bb84", "--qubits", "10000", "--eve"]);
    let q = report(&d.path().join("bb84.json"))["qber_estimate"].as_f64().unwrap();
    assert!((q - 0.25).abs() < 0.03, "{q}");
    ok(d.path(), &["bb84", "--qubits", "10000"]);
    assert_eq!(report(&d.path().join("bb84.json"))["qber_estimate"], 0.0);
}

#[test]
fn prophecy_transcript_fields() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["prophecy", "--bits", "8", "--trials", "200"]);
    let r = report(&d.path().join("prophecy.json"));
    for k in ["ciphertext", "qber", "n_sifted", "verified", "advantage_stats"] {
        assert!(r.get(k).is_some(), "{k}");
    }
    assert_eq!(r["verified"], "match");
    assert_eq!(r["advantage_stats"]["post_reveal"], 0.5);
}

#[test]
fn replay_reproduces_every_format() {
    let d = tempfile::tempdir().unwrap();
    let first = d.path().join("first");
    ok(
        &first,
        &["epr", "--pairs", "50", "--seed", "11", "--pattern", "0:0,1:2"],
    );
    ok(&first, &["--format", "csv", "loops", "--policy", "paradox"]);
    ok(&first, &["--seed", "4", "prophecy", "--trials", "100"]);
    let again = d.path().join("again");
    for f in ["records.jsonl", "loops_histories.csv", "prophecy.json"] {
        ok(&again, &["replay", first.join(f).to_str().unwrap()]);
        assert_eq!(
            fs::read(first.join(f)).unwrap(),
            fs::read(again.join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(
        fs::read(first.join("epr_report.json")).unwrap(),
        fs::read(again.join("epr_report.json")).unwrap()
    );
}
