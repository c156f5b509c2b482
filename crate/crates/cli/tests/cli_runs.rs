use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sdht-lab"));
    c.env_remove("SDHT_LAB_THREADS");
    c
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = bin().arg("--config").arg(config).arg("--out").arg(out).args(extra).status().unwrap();
    status.code().unwrap()
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const SWEEP: &str = r#"{
  "command": "sweep-n",
  "params": {
    "h0": [[0.7, 0.3], [0.3, 0.7]],
    "h1": [[0.5, 0.5]],
    "ns": [8, 16, 24, 32, 48, 64],
    "scheme": { "kind": "onebit" }
  }
}"#;

#[test]
fn sweep_writes_exact_columns_and_zero_delta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.json", SWEEP);
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), 0);
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(!csv.contains('\r') && !csv.contains('"'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,epsilon,delta,comm_bits,key_bits"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    let mut prev = f64::INFINITY;
    for r in &rows {
        assert!(r[2] <= 1e-12);
        assert_eq!((r[3], r[4]), (r[0], 1.0));
        assert!(r[1] < prev);
        prev = r[1];
    }
    let svg = std::fs::read_to_string(out.join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    assert!(!out.join("error.json").exists());
}

#[test]
fn hellinger_sup_stays_below_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sup.json",
        r#"{"command":"hellinger-sup","params":{"thetas":[0.5],"resolution":400}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), 0);
    let s = read_json(out.join("summary.json"));
    let max = s["max"].as_f64().unwrap();
    assert!(max <= 5.828427 + 1e-6 && max <= 3.0 + 2.0 * 2f64.sqrt() + 1e-9);
    assert!(out.join("plot.svg").exists());
}

#[test]
fn missing_channel_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "reduce.json",
        r#"{"command":"reduce-channel","params":{"theta":0.5,"channel_file":"nowhere.json"}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), 2);
    let e = read_json(out.join("error.json"));
    assert_eq!(e["exit_code"], 2);
    assert_eq!(e["kind"], "validation");
    assert!(e["message"].as_str().unwrap().contains("nowhere.json"));
    assert!(!out.join("results.csv").exists());
}

#[test]
fn malformed_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        r#"{"command":"sweep-n","params":{"h0":[[0.5,0.5]],"h1":[[0.2,0.8]],"ns":[8],"scheme":{"kind":"onebit"}}}"#,
        r#"{"command":"hellinger-sup","params":{"thetas":[0.5],"resolution":400,"typo":1}}"#,
        r#"{"command":"hellinger-sup","params":{"thetas":[1.5],"resolution":400}}"#,
        r#"{"command":"tradeoff-audit","params":{"theta":0.5,"ns":[4]}}"#,
        r#"{"command":"evaluate-scheme","params":{"h0":[[0.5,0.6]],"h1":[[0.2,0.8]],"n":4,"scheme":{"kind":"onebit"}}}"#,
        "not json",
    ];
    for (i, body) in bad.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), body);
        let out = dir.path().join(format!("out{i}"));
        assert_eq!(run(&cfg, &out, &[]), 2, "{body}");
        assert!(out.join("error.json").exists());
    }
    let out = dir.path().join("missing");
    assert_eq!(run(&dir.path().join("no_config.json"), &out, &[]), 2);
    assert!(out.join("error.json").exists());
}

#[test]
fn violated_bound_exits_3_and_keeps_results() {
    let dir = tempfile::tempdir().unwrap();
    let body =
        SWEEP.replace(r#""scheme": { "kind": "onebit" }"#, r#""scheme": { "kind": "onebit" }, "max_epsilon": 0.01"#);
    let cfg = write_config(dir.path(), "tight.json", &body);
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), 3);
    assert_eq!(read_json(out.join("error.json"))["kind"], "bound_violated");
    assert!(out.join("results.csv").exists());

    // The same directory is cleaned of error.json by a passing run.
    let cfg = write_config(dir.path(), "loose.json", SWEEP);
    assert_eq!(run(&cfg, &out, &[]), 0);
    assert!(!out.join("error.json").exists());
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"command":"evaluate-scheme","params":{"h0":[[0.7,0.3]],"h1":[[0.4,0.6]],"n":9,"trials":4000,
        "scheme":{"kind":"keyless","channel":[[1,0],[0,1]],"detector":{"name":"majority"}}},"seed":1}"#;
    let cfg = write_config(dir.path(), "eval.json", body);
    let a = dir.path().join("a");
    assert_eq!(run(&cfg, &a, &["--mode", "mc", "--seed", "5"]), 0);
    let s = read_json(a.join("summary.json"));
    assert_eq!(s["seed"], 5);
    assert_eq!(s["report"]["method"], "monte_carlo");
    assert_eq!(s["report"]["trials"], 4000);
    let b = dir.path().join("b");
    assert_eq!(run(&cfg, &b, &[]), 0);
    assert_eq!(read_json(b.join("summary.json"))["report"]["method"], "exact");
}

#[test]
fn thread_count_does_not_change_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"command":"tradeoff-audit","params":{"theta":0.5,"ns":[1,3,6],"random":{"count":12,"outputs":3}},"seed":9}"#;
    let cfg = write_config(dir.path(), "audit.json", body);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let status =
            bin().env("SDHT_LAB_THREADS", threads).arg("--config").arg(&cfg).arg("--out").arg(&out).status().unwrap();
        assert_eq!(status.code(), Some(0));
        outputs
            .push((std::fs::read(out.join("results.csv")).unwrap(), std::fs::read(out.join("summary.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn verify_psm_flags_sampled_mode() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"command":"verify-psm","params":{"protocols":[{"kind":"majority_barrington"}],"trials":2000,
        "sdht":{"h0":[[0.9,0.1]],"h1":[[0.1,0.9]]}}}"#;
    let cfg = write_config(dir.path(), "psm.json", body);
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out, &["--mode", "mc"]), 0);
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..4], &["majority_barrington", "sampled", "true", "true"]);
    assert!((row[7].parse::<f64>().unwrap() - 0.028).abs() < 1e-15);
}

#[test]
fn relative_output_resolves_against_config_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("w.json"), "[[0.5,0.3,0.2],[0.1,0.3,0.6]]").unwrap();
    let cfg = write_config(
        dir.path(),
        "reduce.json",
        r#"{"command":"reduce-channel","params":{"theta":0.5,"channel_file":"w.json"},"output":"res"}"#,
    );
    let status = bin().arg("--config").arg(&cfg).current_dir(std::env::temp_dir()).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let s = read_json(dir.path().join("res/summary.json"));
    assert!(s["final_ratio"].as_f64().unwrap() >= s["initial_ratio"].as_f64().unwrap() - 1e-9);
    assert_eq!(s["final_channel"][0].as_array().unwrap().len(), 2);
}
