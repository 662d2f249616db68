use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn pslab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pslab"))
        .args(args)
        .current_dir(dir)
        .env("PSLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const HARMONIC_CFG: &str =
    r#"{"grid":{"lo":[-1,-1],"hi":[1,1],"n":[17,17]},"boundary":{"kind":"harmonic-trace","degree":1},"beta":0}"#;

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("cfg.json"), "{\"grid\": {\"lo\": [0,").unwrap();
    let out = pslab(dir.path(), &["solve2d", "--config", "cfg.json", "--out", "f.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("cfg.json") && err.contains("line"), "{err}");
}

#[test]
fn wrong_type_names_key_path() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"grid":{"lo":[-1,-1],"hi":[1,1],"n":[9,"nine"]},"boundary":{"kind":"harmonic-trace","degree":1}}"#,
    )
    .unwrap();
    let out = pslab(dir.path(), &["solve2d", "--config", "cfg.json", "--out", "f.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("grid.n"), "{}", stderr(&out));
}

#[test]
fn unknown_boundary_kind_is_config_error() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"grid":{"lo":[-1,-1],"hi":[1,1],"n":[9,9]},"boundary":{"kind":"periodic"}}"#,
    )
    .unwrap();
    let out = pslab(dir.path(), &["solve2d", "--config", "cfg.json", "--out", "f.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = pslab(dir.path(), &["solve2d", "--config", "nope.json", "--out", "f.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_then_diagnose_writes_reports_and_manifest() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    std::fs::write(p.join("cfg.json"), HARMONIC_CFG).unwrap();
    let out = pslab(p, &["solve2d", "--config", "cfg.json", "--out", "field.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "solve2d");
    assert_eq!(manifest["config"]["boundary"]["kind"], "harmonic-trace");
    assert!(manifest["inputs"]["cfg.json"].as_str().unwrap().len() == 64);
    let fp = manifest["fingerprint"].as_str().unwrap().to_string();

    let out = pslab(p, &["diagnose", "--field", "field.json", "--center", "0,0", "--radii", "0.2:0.6:3", "--out", "r.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(p.join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,H,E,N,J,ball_mass"));
    assert_eq!(lines.count(), 3);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.join("r.json")).unwrap()).unwrap();
    assert!(side["verdicts"].is_array());
    assert!(side["acf"]["fitted_c"].is_number());

    // same inputs, different worker count, same digest
    let again = Command::new(env!("CARGO_BIN_EXE_pslab"))
        .args(["solve2d", "--config", "cfg.json", "--out", "field2.json"])
        .current_dir(p)
        .env("PSLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(again.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["fingerprint"].as_str().unwrap(), fp);
}

#[test]
fn radius_beyond_box_exits_3_with_admissible_radius() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    std::fs::write(p.join("cfg.json"), HARMONIC_CFG).unwrap();
    assert!(pslab(p, &["solve2d", "--config", "cfg.json", "--out", "field.json"]).status.success());
    let out = pslab(p, &["diagnose", "--field", "field.json", "--center", "0,0", "--radii", "0.5:2:2", "--out", "r.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("max admissible radius"), "{}", stderr(&out));
}

#[test]
fn solve1d_profile_feeds_profile_lift() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let out = pslab(p, &["solve1d", "--L", "10", "--n", "1001", "--out", "profile.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let prof: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.join("profile.json")).unwrap()).unwrap();
    for key in ["slope", "t0", "residual_norm", "symmetry_defect"] {
        assert!(prof[key].is_number(), "missing {key}");
    }
    std::fs::write(
        p.join("cfg.json"),
        r#"{"grid":{"lo":[-4,-4],"hi":[4,4],"n":[33,33]},"boundary":{"kind":"profile-lift","profile_file":"profile.json"}}"#,
    )
    .unwrap();
    let out = pslab(p, &["solve2d", "--config", "cfg.json", "--out", "field.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = pslab(p, &["asymptotics", "--field", "field.json", "--ops", "planes,defect", "--out", "asym.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let asym: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.join("asym.json")).unwrap()).unwrap();
    assert!(asym["defect"].as_f64().unwrap() < 1e-6);
    let planes = std::fs::read_to_string(p.join("asym_planes.csv")).unwrap();
    assert!(planes.starts_with("lambda,max_violation_u,max_violation_v,coverage\n"));
}

#[test]
fn unknown_op_and_bad_center_are_argument_errors() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    std::fs::write(p.join("cfg.json"), HARMONIC_CFG).unwrap();
    assert!(pslab(p, &["solve2d", "--config", "cfg.json", "--out", "field.json"]).status.success());
    let out = pslab(p, &["asymptotics", "--field", "field.json", "--ops", "spectrum", "--out", "a.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pslab(p, &["blowdown", "--field", "field.json", "--center", "0,0,0", "--R-list", "1", "--out", "b.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn segregate_writes_table() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("cfg.json"),
        r#"{"grid":{"lo":[-1,-1],"hi":[1,1],"n":[33,33]},"boundary":{"kind":"harmonic-trace","degree":1},"omega":1.8}"#,
    )
    .unwrap();
    let out = pslab(p, &["segregate", "--config", "cfg.json", "--betas", "1,4,16", "--out", "seg.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(p.join("seg.csv")).unwrap();
    assert!(csv.starts_with("beta,sup_uv,interaction,harm_residual,holder,sweeps\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn bad_thread_count_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pslab"))
        .args(["verify", "--only", "9"])
        .current_dir(dir.path())
        .env("PSLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_single_criterion_prints_table() {
    let dir = TempDir::new().unwrap();
    let out = pslab(dir.path(), &["verify", "--only", "9", "--out", "v.json"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("criterion  9"), "{stdout}");
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(dir.path().join("manifest.json").exists());
}
