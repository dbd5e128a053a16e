use std::path::{Path, PathBuf};
use std::process::Command;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mildflow")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

#[test]
fn linear_decay_csv_matches_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let (code, _, err) = run(&["solve", "--scenario", scenario("linear_decay.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,norm_x,x_1");
    let mut rows = 0;
    for l in lines {
        let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - (-v[0]).exp()).abs() <= 1e-10, "{l}");
        rows += 1;
    }
    assert!(rows > 10);
    let diag: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["status"]["kind"], "completed");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for o in [&a, &b] {
        let (code, ..) = run(&["burgers", "--scenario", scenario("burgers.json").to_str().unwrap(), "--out", o.to_str().unwrap(), "--quiet", "--modes", "16"]);
        assert_eq!(code, 0);
    }
    for f in ["trajectory.csv", "snapshots.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let snaps = std::fs::read_to_string(a.join("snapshots.csv")).unwrap();
    assert!(snaps.starts_with("z,x_at_0.5,x_at_1.0,x_at_2.0"));
}

#[test]
fn expected_brs_failure_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let (code, stdout, _) = run(&["props", "--scenario", scenario("blowup.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("expected failure"));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("props_report.json")).unwrap()).unwrap();
    assert_eq!(rep[0]["report"]["pass"], false);
    assert!(out.join("props_summary.txt").exists());
}

#[test]
fn unexpected_property_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("s.json");
    let text = std::fs::read_to_string(scenario("blowup.json")).unwrap().replace(r#""expect_fail": ["brs"]"#, r#""expect_fail": []"#);
    std::fs::write(&sc, text).unwrap();
    let (code, ..) = run(&["props", "--scenario", sc.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap(), "--quiet"]);
    assert_eq!(code, 2);
}

#[test]
fn missing_scenario_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let (code, _, err) = run(&["solve", "--scenario", dir.path().join("nope.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot read"));
    assert!(!out.exists());
}

#[test]
fn schema_error_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("s.json");
    std::fs::write(&sc, r#"{"bcs": {"builtin": "dirichlet_heat_0_pi", "u": [[0.0]], "tau": 1.0, "tolerence": 1}}"#).unwrap();
    let out = dir.path().join("o");
    let (code, _, err) = run(&["bcs", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("bcs") && err.contains("tolerence"), "{err}");
    assert!(!out.exists());
}

#[test]
fn admissibility_and_bcs_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("adm");
    let (code, stdout, _) = run(&["admissibility", "--scenario", scenario("dirichlet_admissibility.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("fitted exponent"));
    assert_eq!(std::fs::read_to_string(out.join("admissibility.csv")).unwrap().lines().count(), 14);

    let out = dir.path().join("bcs");
    let (code, stdout, _) = run(&["bcs", "--scenario", scenario("heat_bcs.json").to_str().unwrap(), "--out", out.to_str().unwrap(), "--modes", "64"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("PASS"));
}

#[test]
fn overrides_change_substeps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let (code, ..) = run(&["solve", "--scenario", scenario("linear_decay.json").to_str().unwrap(), "--out", out.to_str().unwrap(), "--substeps", "8", "--quiet"]);
    assert_eq!(code, 0);
    let rows = std::fs::read_to_string(out.join("trajectory.csv")).unwrap().lines().count();
    // header, t = 0, then four half-unit windows of 8 substeps
    assert_eq!(rows, 1 + 1 + 4 * 8);
}
