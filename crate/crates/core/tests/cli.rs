use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_kirchhoff-mp");

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], out: &Path) -> (i32, Value) {
    let status = Command::new(BIN)
        .args(args)
        .arg("--output")
        .arg(out)
        .env("THREADS", "2")
        .env("RUST_LOG", "warn")
        .status()
        .unwrap();
    let report = std::fs::read_to_string(out.join("report.json"))
        .ok()
        .map(|t| serde_json::from_str(&t).unwrap())
        .unwrap_or(Value::Null);
    (status.code().unwrap(), report)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_passes_for_the_example_on_positive_u() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("kirchhoff-example.json");
    let (code, report) = run(&["check", "--config", c.to_str().unwrap()], dir.path());
    assert_eq!(code, 0);
    let verdicts: Vec<&str> = report["hypotheses"].as_array().unwrap().iter().map(|h| h["verdict"].as_str().unwrap()).collect();
    assert_eq!(verdicts, ["pass", "pass"]);
    assert!(report.get("geometry").is_none());
}

#[test]
fn check_fails_for_the_ar_violator() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("ar-violator.json");
    let (code, report) = run(&["check", "--config", c.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    let ar = &report["hypotheses"][0];
    assert_eq!(ar["condition"], "AR");
    assert!(!ar["counterexamples"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_and_invalid_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ \"problem\": ");
    assert_eq!(run(&["check", "--config", bad.to_str().unwrap()], dir.path()).0, 1);
    let c = config("kirchhoff-example.json");
    let c = c.to_str().unwrap();
    assert_eq!(run(&["geometry", "--config", c, "--set", "grid.n=4"], dir.path()).0, 1);
    assert_eq!(run(&["geometry", "--config", c, "--set", "grid.unknown=1"], dir.path()).0, 1);
    assert_eq!(run(&["geometry", "--config", "/nonexistent.json"], dir.path()).0, 1);
}

#[test]
fn geometry_holds_for_the_example_and_fails_without_nonlinearity() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("kirchhoff-example.json");
    let c = c.to_str().unwrap();
    let (code, report) = run(&["geometry", "--config", c], dir.path());
    assert_eq!(code, 0);
    assert!(report["geometry"]["eta"].as_f64().unwrap() > 0.0);
    let (code, _) = run(&["geometry", "--config", c, "--set", "problem.nonlinearity={\"kind\":\"zero\"}"], dir.path());
    assert_eq!(code, 5);
}

#[test]
fn solve_with_a_large_radius_fails_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("kirchhoff-example.json");
    let (code, report) = run(
        &["solve", "--config", c.to_str().unwrap(), "--set", "geometry.rho=1000", "--set", "checks.conditions=[]"],
        dir.path(),
    );
    assert_eq!(code, 5);
    assert!(report["geometry"]["eta"].as_f64().unwrap() <= 0.0);
}

#[test]
fn report_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("kirchhoff-example.json");
    let first = dir.path().join("first");
    let (code, report) = run(&["geometry", "--config", c.to_str().unwrap(), "--seed", "7"], &first);
    assert_eq!(code, 0);
    assert_eq!(report["config"]["seed"], 7);
    let echo = write(dir.path(), "echo.json", &report["config"].to_string());
    let second = dir.path().join("second");
    let (_, again) = run(&["geometry", "--config", echo.to_str().unwrap()], &second);
    assert_eq!(report["geometry"], again["geometry"]);
}

#[test]
fn shipped_schema_lists_every_config_key() {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/run-config.schema.json")).unwrap()).unwrap();
    let text = std::fs::read_to_string(config("composite.json")).unwrap();
    let effective = serde_json::to_value(kirchhoff_mp::cli::RunConfig::load(&text, &[]).unwrap()).unwrap();
    let props = &schema["properties"];
    for (section, value) in effective.as_object().unwrap() {
        assert!(props.get(section).is_some(), "schema lacks `{section}`");
        if section == "problem" {
            continue;
        }
        if let Some(obj) = value.as_object() {
            for key in obj.keys() {
                assert!(props[section]["properties"].get(key).is_some(), "schema lacks `{section}.{key}`");
            }
        }
    }
}

#[test]
fn solve_reports_the_truncation_check() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("composite.json");
    let args = ["solve", "--config", c.to_str().unwrap(), "--set", "grid.n=96", "--set", "checks.conditions=[]"];
    let (code, report) = run(&args, dir.path());
    assert_eq!(code, 0);
    let t = &report["truncation"];
    assert_eq!(t["radius"], 12.0);
    assert_eq!(t["n"], 144);
    // the local minimizer sits well inside the ball
    assert!(t["change_min"].as_f64().unwrap() < 1e-8);
    assert!(t["change_mp"].as_f64().is_some());
    for f in ["step1.csv", "step2.csv", "step1_trace.csv", "step2_trace.csv"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let (_, off) = run(&[&args[..], &["--set", "grid.truncation_check=false"]].concat(), &dir.path().join("off"));
    assert!(off.get("truncation").is_none());
}

#[test]
fn scheme_names_match_the_schema() {
    let text = std::fs::read_to_string(config("cubic.json")).unwrap();
    for scheme in ["staggered-2", "staggered-4"] {
        let c = kirchhoff_mp::cli::RunConfig::load(&text, &[format!("grid.scheme={scheme}")]).unwrap();
        assert_eq!(serde_json::to_value(&c).unwrap()["grid"]["scheme"], scheme);
    }
}
