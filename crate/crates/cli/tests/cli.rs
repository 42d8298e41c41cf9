use std::path::PathBuf;
use std::process::{Command, Output};

fn cylsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn constants_reports_disk_values() {
    let o = cylsim(&["constants", "--config", &data("poisson_disk.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let c2 = v["C2"].as_f64().unwrap();
    assert!((c2 - 8.0 / 3.0).abs() < 1e-6 * 8.0 / 3.0);
    assert!((v["C1"].as_f64().unwrap() - 16.0 / 3.0).abs() < 1e-6);
    assert!((v["sigma_sq"].as_f64().unwrap() - 4.0 / 3.0 * (-1.0f64).exp()).abs() < 1e-6);
    for key in ["term1", "term2", "lln_limit"] {
        assert!(v[key].is_number(), "{key}");
    }
}

#[test]
fn missing_config_exits_with_2() {
    let o = cylsim(&["constants", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read config"));
}

#[test]
fn invalid_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(data("poisson_disk.json"))
        .unwrap()
        .replace("\"lambda\": 1.0", "\"lambda\": -3.0");
    std::fs::write(&bad, text).unwrap();
    let o = cylsim(&["constants", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ground.lambda"));
    let o = cylsim(&["run", "--config", &data("poisson_disk.json"), "--out", "/dev/null", "--rho", "3,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho_grid"));
}

#[test]
fn lln_smoke_run_writes_one_record_and_replays_from_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = cylsim(&["run", "--config", &data("poisson_disk.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# schema: 1"));
    assert!(lines[1].starts_with("# config: "));
    assert_eq!(
        lines[2],
        "mode,rho,reps,mean_fraction,var_area,var_over_rho3,target,stderr,rel_err,quad_err_max,seed,wall_ms"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("lln,2,4,"));

    // Re-running from the output header reproduces the record.
    let again = dir.path().join("again.csv");
    let o = cylsim(&["run", "--config", out.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let strip = |s: &str| s.rsplit_once(',').unwrap().0.to_string();
    let second = std::fs::read_to_string(&again).unwrap();
    assert_eq!(strip(lines[3]), strip(second.lines().nth(3).unwrap()));
    assert!(!dir.path().read_dir().unwrap().any(|e| e.unwrap().file_name().to_string_lossy().contains(".tmp")));
}

#[test]
fn json_output_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = cylsim(&[
        "run",
        "--config",
        &data("poisson_disk.json"),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
        "--seed",
        "5",
        "--reps",
        "6",
        "--rho",
        "1.5",
        "--rho",
        "3",
        "--threads",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["config"]["master_seed"], 5);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[1]["rho"], 3.0);
    assert_eq!(recs[0]["reps"], 6);
    assert!(recs[0]["mse"].is_number());
}

#[test]
fn gamma2_reports_estimate() {
    let o = cylsim(&["gamma2", "--config", &data("poisson_disk.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["gamma2_total"], 0.0);
    assert!(v["z"].as_f64().unwrap().abs() < 5.0);
    assert_eq!(v["underpowered"], false);
}

#[test]
fn version_reports_schema() {
    let o = cylsim(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains(&format!("schema {}", cylsim_core::SCHEMA_VERSION)), "{s}");
}
