use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vbi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vbi")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vbi-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_outputs_deterministically() {
    let dir = scratch("sim");
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out in [&a, &b] {
        let o = vbi(&["simulate", "--seed", "9", "--noise", "0.05", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["channels.csv", "bridge.csv", "road.csv", "summary.json", "plots.gp"] {
        let x = fs::read(a.join(f)).unwrap();
        assert!(!x.is_empty(), "{f}");
        assert_eq!(x, fs::read(b.join(f)).unwrap(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["converged"], true);
}

#[test]
fn invalid_field_reports_its_path() {
    let dir = scratch("badfield");
    let cfg = write_config(&dir, r#"{"vehicle": {"m_s": -1.0}}"#);
    let o = vbi(&["simulate", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("vehicle"), "{}", stderr(&o));
}

#[test]
fn unknown_field_is_rejected() {
    let dir = scratch("unknown");
    let cfg = write_config(&dir, r#"{"nosie_pct": 0.1}"#);
    let o = vbi(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nosie_pct"), "{}", stderr(&o));
}

#[test]
fn too_short_duration_is_a_config_error() {
    let dir = scratch("short");
    let cfg = write_config(&dir, r#"{"sim": {"total_time": 1.0}}"#);
    let o = vbi(&["simulate", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sim"), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_with_config_error() {
    assert_eq!(vbi(&["simulate", "--scenario", "broken"]).status.code(), Some(1));
    assert_eq!(vbi(&["simulate", "--jobs", "0"]).status.code(), Some(1));
    assert_eq!(vbi(&["identify", "--runs", "0"]).status.code(), Some(1));
    assert_eq!(vbi(&["--help"]).status.code(), Some(0));
}

#[test]
fn identify_smoke() {
    let dir = scratch("identify");
    let cfg = write_config(&dir, r#"{"pso": {"samples": 3, "iterations": 1}}"#);
    let o = vbi(&[
        "identify", "--config", &cfg, "--runs", "2", "--samples", "4", "--scenario", "damaged", "--jobs", "1",
        "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let post = fs::read_to_string(dir.join("posterior.csv")).unwrap();
    assert_eq!(post.lines().count(), 1 + 2);
    assert!(post.lines().next().unwrap().starts_with("run,seed,j,d_1"));
    let prior = fs::read_to_string(dir.join("prior.csv")).unwrap();
    assert_eq!(prior.lines().count(), 1 + 2 * 4);
    for f in ["history.csv", "histograms.json", "road_front.csv", "road_rear.csv", "road_true.csv", "config.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
}

#[test]
fn generate_road_writes_profile() {
    let dir = scratch("road");
    let o = vbi(&["generate-road", "--seed", "3", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.join("road.csv")).unwrap();
    assert!(text.lines().count() > 1000);
}
