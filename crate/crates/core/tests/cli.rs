use std::path::PathBuf;
use std::process::{Command, Output};

fn families() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../families")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_replikit"))
        .args(args)
        .env_remove("REPLIKIT_PREC")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn family(name: &str) -> String {
    families().join(name).to_string_lossy().into_owned()
}

#[test]
fn cosets_m1_of_six_has_eight_rows() {
    let o = run(&["cosets", "6", "--kind", "M1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 8);
}

#[test]
fn cosets_json() {
    let o = run(&["--json", "cosets", "4", "--kind", "M2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["reps"].as_array().unwrap().len(), 4);
    assert_eq!(v["kind"], "M2");
}

#[test]
fn unavailable_kind_is_usage_error() {
    assert_eq!(run(&["cosets", "5", "--kind", "M1"]).status.code(), Some(2));
    assert_eq!(run(&["cosets", "6", "--kind", "Q"]).status.code(), Some(2));
}

#[test]
fn expand_respects_env_precision() {
    let o = Command::new(env!("CARGO_BIN_EXE_replikit"))
        .args(["--json", "expand", "1A"])
        .env("REPLIKIT_PREC", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("196884"));
    assert!(text.contains("21493760"));
    assert!(!text.contains("864299970"));
    let bad = Command::new(env!("CARGO_BIN_EXE_replikit"))
        .args(["expand", "1A"])
        .env("REPLIKIT_PREC", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn unknown_label() {
    assert_eq!(run(&["expand", "7Z"]).status.code(), Some(2));
}

#[test]
fn faber_p2_of_monster() {
    let o = run(&["--json", "faber", "1A", "-n", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["coeffs"][0], "1");
    assert_eq!(v["coeffs"][2], "-393768");
}

#[test]
fn check_monster_family() {
    let o = run(&["check", "--family", &family("monster.json"), "--nmax", "6", "--prec", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all checks passed"));
}

#[test]
fn check_complete_and_ordinary() {
    let o = run(&["check", "--family", &family("2A.json"), "--nmax", "4", "--prec", "15", "--complete", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["check", "--family", &family("4D.json"), "--nmax", "6", "--prec", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn wrong_family_is_a_mismatch() {
    let dir = tempdir();
    let path = dir.join("wrong.json");
    std::fs::write(&path, r#"{"mode":"two_plus","members":{"1":"catalog:2A","sqrt2":"catalog:2B"},"closure":{"default":"1"}}"#).unwrap();
    let o = run(&["--json", "check", "--family", path.to_str().unwrap(), "--nmax", "4", "--prec", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed = v["checks"].as_array().unwrap().iter().find(|c| c["status"] == "fail").unwrap();
    let m = &failed["mismatches"][0];
    assert!(m["lhs"].is_string() && m["rhs"].is_string());
}

#[test]
fn unresolvable_family_exits_2() {
    let dir = tempdir();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"mode":"two_plus","members":{"1":"catalog:2A"}}"#).unwrap();
    assert_eq!(run(&["check", "--family", bad.to_str().unwrap()]).status.code(), Some(2));
    let unknown = dir.join("unknown.json");
    std::fs::write(&unknown, r#"{"mode":"two_plus","members":{"1":"catalog:2A"},"colour":"red"}"#).unwrap();
    assert_eq!(run(&["check", "--family", unknown.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["check", "--family", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn verify_hecke_and_identities() {
    let o = run(&["verify", "hecke", "--m", "2,6,12", "--label", "1A", "--prec", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["verify", "op-identity", "--lhs", "T(3)*T(5)", "--rhs", "T(15)", "--witness", "2A", "--upto", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["verify", "op-identity", "--lhs", "T(2)*T(2)", "--rhs", "T(4)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("classes differ"));
    assert_eq!(run(&["verify", "op-identity", "--lhs", "T(2", "--rhs", "T(4)"]).status.code(), Some(2));
}

#[test]
fn extend_from_seeds_with_oracle() {
    let o = run(&["extend", "--family", &family("2A-seeds.json"), "--to", "12"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2125795885056"));
    let o = run(&["--json", "extend", "--family", &family("monster.json"), "--to", "30", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 90);
    assert!(rows.iter().all(|r| r["ok"] == true));
}

#[test]
fn extend_detects_seed_conflict() {
    let dir = tempdir();
    let path = dir.join("conflict.json");
    std::fs::write(&path, r#"{"mode":"two_plus","members":{"1":[4372,96256,1240002,10698753,74428120]},"closure":{"default":"1"}}"#).unwrap();
    let o = run(&["extend", "--family", path.to_str().unwrap(), "--to", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("10698752"));
}

#[test]
fn suite_subset() {
    let o = run(&["suite", "--only", "10,11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(run(&["suite", "--only", "12"]).status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(2));
}

fn tempdir() -> PathBuf {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static N: AtomicUsize = AtomicUsize::new(0);
    let d = std::env::temp_dir().join(format!("replikit-cli-{}-{}", std::process::id(), N.fetch_add(1, Ordering::SeqCst)));
    std::fs::create_dir_all(&d).unwrap();
    d
}
