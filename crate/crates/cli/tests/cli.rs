//! End-to-end tests of the binary: schemas, determinism, and exit codes.

use std::process::{Command, Output};

fn matchlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matchlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8")
}

#[test]
fn estimate_is_deterministic_and_worker_independent() {
    let base = [
        "estimate",
        "--model",
        "words",
        "--n",
        "128",
        "--k",
        "8",
        "--trials",
        "40",
        "--seed",
        "7",
        "--deterministic",
    ];
    let a = matchlab(&base);
    assert!(a.status.success());
    let b = matchlab(&base);
    assert_eq!(a.stdout, b.stdout, "identical flags must reproduce bytes");

    let mut with_workers = base.to_vec();
    with_workers.extend(["--workers", "8"]);
    let c = matchlab(&with_workers);
    assert_eq!(a.stdout, c.stdout, "worker count must not change the summary");
}

#[test]
fn estimate_summary_schema() {
    let out = matchlab(&[
        "estimate",
        "--model",
        "binomial",
        "--n",
        "64",
        "--p",
        "0.05",
        "--trials",
        "10",
        "--seed",
        "1",
        "--deterministic",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    for key in [
        "config",
        "statistic",
        "trials",
        "mean",
        "variance",
        "std_error",
        "median",
        "min",
        "max",
        "center",
        "normalized",
        "tails",
    ] {
        assert!(v.get(key).is_some(), "missing key {key}");
    }
    assert!(v.get("timestamp").is_none(), "deterministic mode has no timestamp");
    assert_eq!(v["config"]["model"], "binomial");
    assert_eq!(v["statistic"], "L");

    let out = matchlab(&[
        "estimate", "--model", "permutation", "--n", "100", "--trials", "5", "--seed", "1",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert!(v.get("timestamp").is_some(), "timestamp present by default");
}

#[test]
fn estimate_exit_codes() {
    let out = matchlab(&[
        "estimate", "--model", "words", "--n", "10", "--k", "0", "--trials", "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).expect("structured error");
    assert_eq!(err["kind"], "invalid_request");

    let out = matchlab(&[
        "estimate", "--model", "odb", "--n", "50000", "--p", "0.5", "--trials", "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).expect("structured error");
    assert_eq!(err["kind"], "resource_guard");

    let out = matchlab(&["estimate", "--model", "words", "--n", "10", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(2), "clap usage errors exit 2");
}

#[test]
fn estimate_config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.json");
    std::fs::write(
        &config_path,
        r#"{"model": "words", "n": 64, "k": 4, "trials": 12, "seed": 5}"#,
    )
    .unwrap();

    let from_file = matchlab(&[
        "estimate",
        "--config",
        config_path.to_str().unwrap(),
        "--deterministic",
    ]);
    assert!(from_file.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&from_file)).unwrap();
    assert_eq!(v["trials"], 12);
    assert_eq!(v["config"]["k"], 4);

    // Flags win over the file.
    let overridden = matchlab(&[
        "estimate",
        "--config",
        config_path.to_str().unwrap(),
        "--trials",
        "3",
        "--deterministic",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&overridden)).unwrap();
    assert_eq!(v["trials"], 3);
}

#[test]
fn retained_trials_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let jsonl_path = dir.path().join("trials.jsonl");
    let out = matchlab(&[
        "estimate",
        "--model",
        "permutation",
        "--n",
        "50",
        "--trials",
        "9",
        "--seed",
        "2",
        "--deterministic",
        "--retain-trials",
        jsonl_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let contents = std::fs::read_to_string(&jsonl_path).unwrap();
    assert_eq!(contents.lines().count(), 9);
    for (i, line) in contents.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["trial"], i as u64);
        assert!(v["value"].is_u64());
    }
    // The emitted summary itself omits the per-trial list.
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v.get("per_trial").is_none());
}

#[test]
fn env_var_sets_default_workers_without_changing_results() {
    let base = [
        "estimate", "--model", "words", "--n", "64", "--k", "4", "--trials", "30", "--seed", "9",
        "--deterministic",
    ];
    let plain = matchlab(&base);
    let with_env = Command::new(env!("CARGO_BIN_EXE_matchlab"))
        .args(base)
        .env("MATCHLAB_WORKERS", "6")
        .output()
        .expect("binary runs");
    assert!(with_env.status.success());
    assert_eq!(plain.stdout, with_env.stdout);
}

#[test]
fn sweep_schema_and_derived_sizes() {
    let out = matchlab(&[
        "sweep", "--k-list", "64,256,1024", "--ratio", "512", "--trials", "5", "--seed", "7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(
        lines[0],
        "k,n,trials,mean,se,normalized,tail_0.05,tail_0.1,tail_0.2"
    );
    let ns: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(ns, vec!["4096", "8192", "16384"]);

    // A p-sweep derives n = ratio / sqrt(p) and labels the first column p.
    let out = matchlab(&[
        "sweep", "--p-list", "0.25", "--ratio", "50", "--trials", "4", "--seed", "7",
    ]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("p,n,"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("0.25,100,4,"));

    let out = matchlab(&["sweep", "--ratio", "512", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(2), "one of k-list/p-list required");
}

#[test]
fn single_point_sweep_matches_estimate() {
    let sweep = matchlab(&[
        "sweep", "--k-list", "256", "--ratio", "32", "--trials", "25", "--seed", "11",
    ]);
    let text = stdout(&sweep);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[1], "512"); // n = 32 * 16

    let est = matchlab(&[
        "estimate",
        "--model",
        "words",
        "--n",
        "512",
        "--k",
        "256",
        "--trials",
        "25",
        "--seed",
        "11",
        "--deterministic",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&est)).unwrap();
    let sweep_mean: f64 = fields[3].parse().unwrap();
    let sweep_norm: f64 = fields[5].parse().unwrap();
    assert!((sweep_mean - v["mean"].as_f64().unwrap()).abs() < 1e-9);
    assert!((sweep_norm - v["normalized"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn bounds_values() {
    let out = matchlab(&[
        "bounds", "m-upper", "--r", "5000", "--s", "5000", "--k", "1000000", "--delta", "0.5",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"], 15.0);

    let out = matchlab(&["bounds", "johansson", "--p", "0.5"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 5.82842712475).abs() < 1e-11);

    // A failing regime check names the violated condition.
    let out = matchlab(&[
        "bounds",
        "sandwich-regime",
        "--r",
        "10000",
        "--s",
        "10000",
        "--k",
        "1000000",
        "--delta",
        "0.5",
        "--c",
        "25",
        "--which",
        "upper",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["holds"], false);
    assert!(v["failed"][0].as_str().unwrap().contains("spread"));

    let out = matchlab(&["bounds", "johansson", "--p", "1.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = matchlab(&["bounds", "odb-limit", "--p", "0.3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.916515138991).abs() < 1e-10);
    assert_eq!(v["in_window"], true);
}

#[test]
fn blocks_command_reports_invariants() {
    let out = matchlab(&["blocks", "--n", "50", "--k", "4", "--seed", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (header, body) = text.split_once("\n\n").expect("json header + partition");
    let v: serde_json::Value = serde_json::from_str(header).unwrap();
    assert_eq!(v["invariants_ok"], true);
    assert_eq!(v["type_tuple_len"], v["q"].as_u64().unwrap() * 5);
    // e_max in the header equals the derived block parameter.
    let bp = matchlab(&[
        "bounds", "block-params", "--n", "50", "--k", "4", "--delta", "0.5", "--epsilon", "0.1",
        "--alpha", "0.6",
    ]);
    let bpv: serde_json::Value = serde_json::from_str(&stdout(&bp)).unwrap();
    assert_eq!(v["e_max"], bpv["e_max"]);
    // Partition lines carry 8 fields.
    assert!(body.lines().all(|l| l.split_whitespace().count() == 8));

    let out = matchlab(&["blocks", "--n", "50", "--k", "4", "--delta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}
