use std::fs;
use std::path::Path;
use std::process::Command;

use clockspec::cli::{run, EXIT_CONFIG, EXIT_GATE_FAILED, EXIT_OK};
use serde_json::Value;

const MARKOV: &str = r#"{
  "model": {
    "alpha": 0.75,
    "amplitudes": {"kind": "markov_chain", "transition": [[0.8, 0.2], [0.2, 0.8]], "values": [1, -1], "initial": [0.5, 0.5]}
  },
  "experiment": {"realizations": 40, "sequence_length": 2000, "max_lag": 12, "gates": {"decay_rate": 0.5108256237659907}},
  "run": {"seed": 11}
}"#;

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn only_file(dir: &Path, ext: &str) -> std::path::PathBuf {
    let files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    assert_eq!(files.len(), 1, "{files:?}");
    files[0].clone()
}

fn clockspec(args: &[&str]) -> i32 {
    let mut argv = vec!["clockspec"];
    argv.extend_from_slice(args);
    run(argv)
}

#[test]
fn free_clock_exits_zero_with_gaps_pi() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "free.json",
        r#"{"experiment": {"n_values": [100, 300], "realizations": 3}}"#,
    );
    let out = dir.path().join("out");
    let code = clockspec(&[
        "clock",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code, EXIT_OK);
    let csv = fs::read_to_string(only_file(&out, "csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|&c| c == "max_abs_dev").unwrap();
    for line in lines {
        let dev: f64 = line.split(',').nth(col).unwrap().parse().unwrap();
        assert!(dev < 1e-9);
    }
    assert!(!csv.contains('\r'));
}

#[test]
fn corr_writes_curve_and_fitted_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "markov.json", MARKOV);
    let out = dir.path().join("out");
    let code = clockspec(&[
        "corr",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code, EXIT_OK);
    let csv = fs::read_to_string(only_file(&out, "csv")).unwrap();
    assert!(csv.starts_with("lag,corr,stderr\n0,"));
    assert_eq!(csv.lines().count(), 14);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(only_file(&out, "json")).unwrap()).unwrap();
    let fit = report["fits"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["name"] == "decay_rate")
        .unwrap();
    let rate = fit["value"].as_f64().unwrap();
    assert!((rate - 0.5108).abs() < 0.05, "{rate}");
    assert!(fit["stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn report_embeds_effective_config_and_file_name_uses_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "markov.json", MARKOV);
    let out = dir.path().join("out");
    clockspec(&[
        "corr",
        "--config",
        &cfg,
        "--seed",
        "5",
        "--workers",
        "2",
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ]);
    let json_path = only_file(&out, "json");
    let report: Value = serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    let config = &report["config"];
    assert_eq!(config["run"], serde_json::json!({"seed": 5}));
    assert_eq!(config["model"]["alpha"], 0.75);
    assert_eq!(config["model"]["profile"]["kind"], "indicator");
    assert_eq!(config["experiment"]["max_lag"], 12);
    assert_eq!(config["experiment"]["kappa0"], 1.0);
    let hash = report["config_hash"].as_str().unwrap();
    assert_eq!(
        json_path.file_stem().unwrap().to_str().unwrap(),
        format!("corr_{}", &hash[..16])
    );
}

#[test]
fn unknown_keys_are_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for (i, body) in [
        r#"{"experiment": {"realisations": 10}}"#,
        r#"{"extra": {}}"#,
        r#"{"run": {"threads": 2}}"#,
        r#"{"model": {"alpha": 0.75, "amplitudes": {"kind": "zero"}, "decay": 1}}"#,
        r#"{"model": {"alpha": 0.4, "amplitudes": {"kind": "iid_uniform"}}}"#,
        "not json",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), body);
        let code = clockspec(&[
            "clock",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ]);
        assert_eq!(code, EXIT_CONFIG, "{body}");
    }
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(clockspec(&["bogus"]), EXIT_CONFIG);
    assert_eq!(clockspec(&["clock", "--frobnicate"]), EXIT_CONFIG);
    assert_eq!(clockspec(&[]), EXIT_CONFIG);
    assert_eq!(
        clockspec(&["clock", "--config", "/nonexistent/cfg.json"]),
        EXIT_CONFIG
    );
    assert_eq!(clockspec(&["clock", "--workers", "0"]), EXIT_CONFIG);
    assert_eq!(clockspec(&["--help"]), EXIT_OK);
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(dir.path(), "markov.json", MARKOV);
    let out = blocker.join("out");
    assert_eq!(
        clockspec(&[
            "corr",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--quiet"
        ]),
        EXIT_CONFIG
    );
}

#[test]
fn failed_gate_exits_one_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "wrong.json",
        &MARKOV.replace("0.5108256237659907", "2.0"),
    );
    let out = dir.path().join("out");
    assert_eq!(
        clockspec(&[
            "corr",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--quiet"
        ]),
        EXIT_GATE_FAILED
    );
    let report: Value =
        serde_json::from_str(&fs::read_to_string(only_file(&out, "json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn binary_uses_env_output_fallback_and_worker_count_is_irrelevant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "markov.json", MARKOV);
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("w{workers}"));
        let status = Command::new(env!("CARGO_BIN_EXE_clockspec"))
            .args(["corr", "--config", &cfg, "--workers", workers, "--quiet"])
            .env("CLOCKSPEC_OUT", &out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(EXIT_OK));
        outputs.push((
            fs::read(only_file(&out, "json")).unwrap(),
            fs::read(only_file(&out, "csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}
