use std::process::{Command, Output};

fn mixcurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixcurv")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn passing_check_exits_zero() {
    let o = mixcurv(&["check", "--scenario", "preset:warped_torus"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("PW-IF"));
    assert!(out.contains("obstructed(h⊥)"));
}

#[test]
fn residual_failure_exits_one() {
    let o = mixcurv(&["check", "--scenario", "preset:warped_torus", "--identity", "UMB-T6", "--grid", "8", "--literal"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("UMB-T6 failed"));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["check", "--scenario", "missing.json"][..],
        &["check", "--scenario", "preset:nope"],
        &["check", "--scenario", "preset:flat_torus", "--identity", "NOPE"],
        &["check", "--scenario", "preset:flat_torus", "--tol", "-1"],
        &["check", "--scenario", "preset:flat_torus", "--param", "n"],
        &["check"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&mixcurv(args)), 2, "{args:?}");
    }
}

#[test]
fn bad_scenario_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"name": "x", "metric": {"components": [["1"]]}, "chart": 3}"#).unwrap();
    let o = mixcurv(&["check", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = mixcurv(&["check", "--scenario", "preset:doubly_twisted", "--param", "n=1", "--param", "p=2", "--param", "tb=0.3", "--param", "tf=0.2", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["meta"]["resolved_sign_variant"], "V1");
    assert!(v["identities"].as_array().unwrap().iter().any(|r| r["status"] == "rejected"));
}

#[test]
fn zoo_document_round_trips_through_check() {
    let o = mixcurv(&["zoo", "--preset", "statistical_torus", "--param", "c111=0.2"]);
    assert_eq!(code(&o), 0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stat.json");
    std::fs::write(&path, &o.stdout).unwrap();
    let file = mixcurv(&["check", "--scenario", path.to_str().unwrap(), "--grid", "6", "--no-splitting"]);
    let preset = mixcurv(&["check", "--scenario", "preset:statistical_torus", "--param", "c111=0.2", "--grid", "6", "--no-splitting"]);
    assert_eq!(code(&file), 0);
    let strip = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| !l.starts_with("elapsed"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&file), strip(&preset));
}

#[test]
fn list_identities_prints_every_id() {
    let o = mixcurv(&["list-identities"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    for d in mixcurv::catalog::list_identities() {
        assert!(out.lines().any(|l| l.split_whitespace().next() == Some(d.id)), "{}", d.id);
    }
}

#[test]
fn zoo_lists_presets() {
    let out = String::from_utf8(mixcurv(&["zoo", "--list"]).stdout).unwrap();
    for (name, _) in mixcurv::zoo::PRESETS {
        assert!(out.contains(name));
    }
}
