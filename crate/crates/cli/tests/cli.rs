use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn renorm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renorm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn scalar_diagonalize_reports_closed_forms() {
    let tmp = TempDir::new().unwrap();
    let out = renorm(&["diagonalize", "--preset", "scalar"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(tmp.path());
    let s = &r["results"]["diagonalize"]["scalar"];
    let close = |v: &Value, want: f64| (v.as_f64().unwrap() - want).abs() < 1e-12;
    assert!(close(&s["xi"], 3.0));
    assert!(close(&s["u"], 2.0 / 3f64.sqrt()));
    assert!(close(&s["v"], -1.0 / 3f64.sqrt()));
    assert!(close(&s["energy"], -1.0));
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[pass] diagonalize/symplectic-residual"));
}

#[test]
fn injected_fault_exits_one() {
    let tmp = TempDir::new().unwrap();
    let out = renorm(&["identities", "--preset", "scalar", "--inject-fault"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[FAIL] identities/rank-one-resolvent-vs-dense"));
}

#[test]
fn reports_are_byte_stable() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        let out = renorm(&["all", "--preset", "fock", "--seed", "7"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    for file in ["report.json", "flow.csv", "probe.csv"] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs between runs");
    }
}

#[test]
fn flow_and_probe_csv_columns() {
    let tmp = TempDir::new().unwrap();
    let out = renorm(&["flow", "--preset", "charge-renorm", "--format", "csv"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(!tmp.path().join("report.json").exists());
    let flow = fs::read_to_string(tmp.path().join("flow.csv")).unwrap();
    let mut lines = flow.lines();
    assert_eq!(lines.next().unwrap(), "n,lambda_n,E_n,resolvent_gap,shale_n,status");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.ends_with(",pass")));

    let out = renorm(
        &["shale-scan", "--preset", "charge-renorm", "--format", "csv"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let probe = fs::read_to_string(tmp.path().join("probe.csv")).unwrap();
    assert!(probe.starts_with("alpha,lambda,tau_max,"));
    assert_eq!(probe.lines().count(), 7);
}

#[test]
fn config_file_round_trip() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("scenario.toml");
    fs::write(
        &path,
        r#"
name = "two-level"
omega = { kind = "table", values = [1.0, 2.0] }
f = { kind = "table", re = [0.5, 0.25] }

[grid]
points = [1.0, 2.0]

[flow]
lambda = 0.3
"#,
    )
    .unwrap();
    let out = renorm(&["diagonalize", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(tmp.path())["scenario"]["name"], "two-level");
}

#[test]
fn bad_config_exits_two() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("bad.toml");
    fs::write(
        &path,
        "omega = { kind = \"power\", exponent = 1.0 }\nf = { kind = \"nope\" }\n",
    )
    .unwrap();
    let out = renorm(&["flow", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = renorm(&["flow", "--preset", "missing"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}

#[test]
fn positive_coupling_with_charge_class_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("wrong-sign.toml");
    fs::write(
        &path,
        "omega = { kind = \"power\", exponent = 1.0 }\nf = { kind = \"power\", alpha = 0.25 }\n[flow]\nlambda = 0.5\n",
    )
    .unwrap();
    let out = renorm(&["flow", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn timing_is_opt_in() {
    let tmp = TempDir::new().unwrap();
    renorm(&["diagonalize", "--preset", "scalar"], tmp.path());
    assert!(report(tmp.path()).get("timing_ms").is_none());
    renorm(&["diagonalize", "--preset", "scalar", "--timing"], tmp.path());
    assert!(report(tmp.path())["timing_ms"]["diagonalize"].is_f64());
}
