//! The `seqtunnel` binary end to end: exit codes, files and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn seqtunnel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqtunnel")).args(args).env("SEQTUNNEL_THREADS", "2").output().unwrap()
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn empty_stage_list_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "empty.toml", "[geometry]\nstages = []\n");
    let o = seqtunnel(&["solve", "--config", &c]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage list is empty"));
}

#[test]
fn unknown_keys_and_bad_values_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "typo.toml", "[material]\ngama = 20.0\n");
    assert_eq!(code(&seqtunnel(&["verify", "--config", &c])), 2);
    let c = config(tmp.path(), "nu.toml", "[material]\nnu = 0.5\n");
    assert_eq!(code(&seqtunnel(&["map-only", "--config", &c])), 2);
    let c = config(tmp.path(), "ok.toml", "");
    assert_eq!(code(&seqtunnel(&["solve", "--config", &c, "--stage", "9"])), 2);
    assert_eq!(code(&seqtunnel(&["solve"])), 2);
}

#[test]
fn solver_failure_is_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "short.toml", "[solver]\nmax_iter = 1\n");
    let out = tmp.path().join("out");
    let o = seqtunnel(&["solve", "--config", &c, "--stage", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn solve_is_deterministic_and_echoes_a_loadable_config() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "run.toml", "[output]\ncavity_points = 512\nground_points = 201\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = seqtunnel(&["solve", "--config", &c, "--stage", "1", "--out", dir.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["stage1/cavity_profile.csv", "stage1/ground_profile.csv", "stage1/coefficients.json", "effective_config.toml"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f} differs between runs");
    }
    let cavity = std::fs::read_to_string(a.join("stage1/cavity_profile.csv")).unwrap();
    assert_eq!(cavity.lines().next(), Some("theta,x,y,mises_kpa,sigma_rho_kpa,tau_rhotheta_kpa,u_m,v_m"));
    assert_eq!(cavity.lines().count(), 513);
    let echoed = a.join("effective_config.toml");
    let o = seqtunnel(&["map-only", "--config", echoed.to_str().unwrap(), "--stage", "1", "--out", tmp.path().join("c").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let grid = std::fs::read_to_string(tmp.path().join("c/stage1/grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + (20 + 72) * 200);
}

#[test]
fn verify_exit_status_follows_thresholds() {
    let tmp = tempfile::tempdir().unwrap();
    // without gravity every residual is exactly zero
    let c = config(tmp.path(), "null.toml", "[material]\ngamma = 0.0\n[output]\ncavity_points = 256\n");
    let o = seqtunnel(&["verify", "--config", &c, "--stage", "1", "--out", tmp.path().join("a").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("a/verification.json")).unwrap()).unwrap();
    assert_eq!(report["stages"][0]["residual_traction_max_kpa"], 0.0);
    // an impossible mapping threshold must fail
    let c = config(tmp.path(), "strict.toml", "[thresholds]\nepsilon_m = 1e-12\n[output]\ncavity_points = 256\n");
    let o = seqtunnel(&["verify", "--config", &c, "--stage", "1", "--out", tmp.path().join("b").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn threads_variable_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "ok.toml", "");
    let o = Command::new(env!("CARGO_BIN_EXE_seqtunnel")).args(["map-only", "--config", &c]).env("SEQTUNNEL_THREADS", "zero").output().unwrap();
    assert_eq!(code(&o), 2);
}
