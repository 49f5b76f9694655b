use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_nisqbound");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value(report: &str, name: &str) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(report).unwrap();
    v["values"].as_array().unwrap().iter().find(|q| q["name"] == name).unwrap()["value"].clone()
}

fn write_instance(dir: &Path, args: &[&str]) -> String {
    let path = dir.join("inst.json");
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    let out = run(&full);
    assert_eq!(out.status.code(), Some(0));
    fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_is_byte_identical_per_seed() {
    let a = run(&["gen", "--type", "sk", "--n", "10", "--seed", "7"]);
    let b = run(&["gen", "--type", "sk", "--n", "10", "--seed", "7"]);
    let c = run(&["gen", "--type", "sk", "--n", "10", "--seed", "8"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["n"], 10);
    assert_eq!(v["family"], "sk");
}

#[test]
fn depth_bound_default_rates() {
    let out = run(&["depth-bound", "--eps", "0.1", "--p1", "1.6e-3", "--p2", "6.2e-3", "--f1", "0.5", "--f2", "0.5", "--log-term", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let d = value(&stdout(&out), "dmax").as_f64().unwrap();
    assert!((d - 295.2032170505).abs() < 1e-6, "{d}");
}

#[test]
fn noiseless_ceiling_is_unbounded() {
    let out = run(&["depth-bound", "--eps", "0.1", "--p1", "0", "--p2", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(value(&stdout(&out), "dmax"), "unbounded");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["depth-bound"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["depth-bound", "--eps", "0.1", "--alpha", "0.2"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &["--type", "regular", "--n", "8", "--seed", "1"]);
    let out = run(&["depth-bound", "--eps", "0.1", "--log-term", "0", "--instance", &inst]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_inputs_exit_with_one() {
    assert_eq!(run(&["depth-bound", "--eps", "0.1", "--p1", "1.5"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &["--type", "regular", "--n", "8", "--seed", "1"]);
    // below the ground energy: nothing can certify it
    let out = run(&["lower-bound", "--instance", &inst, "--ec", "-100"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("ground"));
    assert_eq!(run(&["lower-bound", "--instance", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn digest_ignores_file_formatting() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &["--type", "random", "--n", "6", "--seed", "3", "--field-std", "0.5"]);
    let pretty = dir.path().join("pretty.json");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&inst).unwrap()).unwrap();
    fs::write(&pretty, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let a = run(&["lower-bound", "--instance", &inst, "--budget", "2"]);
    let b = run(&["lower-bound", "--instance", pretty.to_str().unwrap(), "--budget", "2"]);
    let da: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let db: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    assert!(da["input_digest"].as_str().unwrap().starts_with("sha256:"));
    assert_eq!(da["input_digest"], db["input_digest"]);
    assert_eq!(value(&stdout(&a), "lower_bound"), value(&stdout(&b), "lower_bound"));
}

#[test]
fn lower_bound_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &["--type", "regular", "--n", "10", "--seed", "2"]);
    let csv = dir.path().join("curve.csv");
    let out = run(&["lower-bound", "--instance", &inst, "--depth", "50", "--ec", "-8", "--csv", csv.to_str().unwrap(), "--beta-points", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout(&out);
    let bound = value(&report, "lower_bound").as_f64().unwrap();
    let ground = value(&report, "ground_energy").as_f64().unwrap();
    assert!(bound >= ground - 1e-9);
    let text = fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("beta,logZ_nats,mean_energy"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn gibbs_sample_dump_has_certified_flag() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &["--type", "regular", "--n", "10", "--seed", "2"]);
    let csv = dir.path().join("samples.csv");
    let out = run(&["gibbs-sample", "--instance", &inst, "--beta", "0.2", "--seed", "4", "--sweeps", "30", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(value(&stdout(&out), "certified"), "yes");
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("config,energy,certified\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",1") && l.len() > 12));
    // reruns are identical
    let again = run(&["gibbs-sample", "--instance", &inst, "--beta", "0.2", "--seed", "4", "--sweeps", "30"]);
    assert_eq!(value(&stdout(&out), "mean_energy"), value(&stdout(&again), "mean_energy"));
}

#[test]
fn uncertified_sampling_needs_burn_in() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &["--type", "regular", "--n", "8", "--seed", "2"]);
    let out = run(&["gibbs-sample", "--instance", &inst, "--beta", "2", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["gibbs-sample", "--instance", &inst, "--beta", "2", "--seed", "4", "--burn-in", "10", "--sweeps", "20"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(value(&stdout(&out), "certified"), "no");
}

#[test]
fn baselines_respect_the_ground_energy() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &["--type", "regular", "--n", "12", "--seed", "5"]);
    let lb = stdout(&run(&["lower-bound", "--instance", &inst]));
    let ground = value(&lb, "ground_energy").as_f64().unwrap();
    for method in ["sa", "sdp"] {
        let out = run(&["baseline", "--instance", &inst, "--method", method, "--seed", "1"]);
        assert_eq!(out.status.code(), Some(0), "{method}");
        let best = value(&stdout(&out), "best_energy").as_f64().unwrap();
        assert!(best >= ground - 1e-9, "{method}");
    }
}

#[test]
fn anneal_bound_reports_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("realm.csv");
    let out = run(&[
        "anneal-bound", "--r1", "0.1", "--r3", "0.2", "--n", "4", "--time", "5", "--eps", "0.01", "--a-norm", "1",
        "--h-norm", "4", "--t-points", "10", "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout(&out);
    assert!((value(&report, "alpha").as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert!((value(&report, "poly_threshold").as_f64().unwrap() - 0.04).abs() < 1e-15);
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("T,budget_bits_per_qubit,poly_threshold,classical\n"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn anneal_bound_reads_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("schedule.json");
    fs::write(&path, r#"{"total_time": 4.0, "modulation": "linear", "transverse": [1.0, 1.0, 1.0]}"#).unwrap();
    let common = ["anneal-bound", "--r1", "0.1", "--r2", "0.05", "--r3", "0.2", "--n", "3", "--time", "4"];
    let mut args = common.to_vec();
    args.extend(["--schedule", path.to_str().unwrap()]);
    let report = stdout(&run(&args));
    let closed = value(&report, "linear_path_budget").as_f64().unwrap();
    let quad = value(&report, "schedule_budget").as_f64().unwrap();
    assert!((closed - quad).abs() < 1e-6 * closed);
    let out = run(&["anneal-bound", "--r1", "0.1", "--r3", "0.2", "--n", "5", "--schedule", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_reports_cases() {
    let out = run(&["verify", "--suite", "lemma1", "--n", "4", "--seeds", "5", "--seed", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let cases = v["data"]["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 5);
    assert_eq!(cases[0]["seed"], 10);
    for c in cases {
        for key in ["seed", "n", "D", "p", "bound", "measured", "margin"] {
            assert!(c.get(key).is_some(), "{key}");
        }
    }
    assert_eq!(run(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
}

#[test]
fn figure_csv_on_stdout_report_on_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = run(&["figure", "--out", report.to_str().unwrap(), "annealer", "--t-points", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    assert!(csv.starts_with("T,budget_bits_per_qubit,poly_threshold,classical\n"));
    assert_eq!(csv.lines().count(), 21);
    let t = value(&fs::read_to_string(report).unwrap(), "classical_realm_time").as_f64().unwrap();
    assert!((t - 71.734).abs() < 1e-2, "{t}");
}
