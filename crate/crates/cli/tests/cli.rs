use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const LONG_RANGE: &str = r#"{"family": "wdrcm", "profile": {"kind": "long_range", "p": 1, "delta": 3},
    "kernel": {"gamma": 0, "gamma_prime": 0}, "beta": 1}"#;

fn perc_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perc-lab")).args(args).output().unwrap()
}

fn run_in(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{sub}-config.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    perc_lab(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn sweep_config(lambda: f64) -> String {
    format!(
        r#"{{"model": {LONG_RANGE}, "dimension": 2, "seed": 3,
            "sweep": {{"event": {{"event": "g", "alpha": 4}}, "alpha_grid": [4, 8, 16], "lambda": {lambda}, "n_reps": 40, "trials": true}}}}"#
    )
}

#[test]
fn sweep_at_zero_intensity_gives_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "sweep", &sweep_config(0.0), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("alpha,p_hat,ci_lo,ci_hi,n_reps"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
    }
    let trials = fs::read_to_string(dir.path().join("out/trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 3 * 40);
}

#[test]
fn deff_of_mark_free_model_is_delta() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "deff", &format!(r#"{{"model": {LONG_RANGE}, "dimension": 2}}"#), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/deff.json")).unwrap()).unwrap();
    let deff = report["deff_hat"].as_f64().unwrap();
    assert!((deff - 3.0).abs() < 0.05, "{deff}");
    assert!(report["analytic"]["deff_gt2"].as_bool().unwrap());
}

#[test]
fn malformed_config_exits_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        "{not json".to_string(),
        sweep_config(0.1).replacen('{', r#"{"unknown_key": 1, "#, 1),
        sweep_config(-1.0),
        format!(r#"{{"model": {LONG_RANGE}, "dimension": 2}}"#),
    ] {
        let o = run_in(dir.path(), "sweep", &bad, &[]);
        assert_eq!(o.status.code(), Some(1), "{bad}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
        assert!(!dir.path().join("out").exists());
    }
}

#[test]
fn unknown_subcommand_is_a_config_error() {
    assert_eq!(perc_lab(&["simulate", "--config", "x.json"]).status.code(), Some(1));
}

#[test]
fn runtime_failure_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    // The certificate needs a pair (α, 100α) that this grid lacks.
    let cfg = format!(
        r#"{{"model": {LONG_RANGE}, "dimension": 2,
            "certify": {{"alpha_grid": [4, 8], "lambda": 0.1, "n_reps": 10, "decay_exp": 2}}}}"#
    );
    let o = run_in(dir.path(), "certify", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "sweep", &sweep_config(0.3), &["--seed", "17"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = dir.path().join("out");
    let manifest: Value = serde_json::from_str(&fs::read_to_string(first.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 17);
    assert_eq!(manifest["subcommand"], "sweep");
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);

    let second = dir.path().join("again");
    let m = first.join("manifest.json");
    let o = perc_lab(&["sweep", "--config", m.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["series.csv", "series.json", "trials.csv"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
    // A manifest only replays the subcommand that wrote it.
    let o = perc_lab(&["deff", "--config", m.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"model": {LONG_RANGE}, "dimension": 2, "seed": 5,
            "sample": {{"window": {{"kind": "ball", "center": [0, 0], "radius": 12}}, "lambda": 1.5, "palm": true}},
            "sweep": {{"event": {{"event": "f", "alpha": 2}}, "alpha_grid": [2, 4, 8], "lambda": 0.5, "n_reps": 30}}}}"#
    );
    let mut runs = Vec::new();
    for threads in ["1", "4"] {
        let mut files = Vec::new();
        for (sub, names) in [("sample", &["vertices.csv", "edges.csv"][..]), ("sweep", &["series.csv"][..])] {
            let o = run_in(dir.path(), sub, &cfg, &["--threads", threads]);
            assert!(o.status.success(), "{}", stderr(&o));
            for name in names {
                files.push(fs::read(dir.path().join("out").join(name)).unwrap());
            }
            fs::remove_dir_all(dir.path().join("out")).unwrap();
        }
        runs.push(files);
    }
    assert_eq!(runs[0].len(), 3);
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn phase_writes_grid_and_picture() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"model": {LONG_RANGE}, "dimension": 2,
            "phase": {{"x_axis": {{"param": "gamma", "start": 0.05, "stop": 0.95, "steps": 4}},
                       "y_axis": {{"param": "delta", "start": 1.5, "stop": 4.5, "steps": 3}}}}}}"#
    );
    let o = run_in(dir.path(), "phase", &cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/phase.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 12);
    assert!(fs::read_to_string(dir.path().join("out/phase.svg")).unwrap().starts_with("<svg"));
}
