mod common;

use common::{armpose, assert_schema, json};

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tmp();
    for args in [&["--help"][..], &["-V"], &["synth", "--help"], &["demo", "--help"]] {
        let out = armpose(args, dir.path());
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(!out.stdout.is_empty());
    }
    let help = String::from_utf8(armpose(&["--help"], dir.path()).stdout).unwrap();
    for cmd in ["synth", "solve", "refine", "eval", "reach", "demo"] {
        assert!(help.contains(cmd), "help lists {cmd}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = tmp();
    std::fs::write(dir.path().join("typo.toml"), "[reach]\nsedes = 2\n").unwrap();
    std::fs::write(dir.path().join("mistyped.toml"), "[synth]\nn = \"many\"\n").unwrap();
    std::fs::write(dir.path().join("section.toml"), "[synthesis]\nn = 3\n").unwrap();
    let cases: [&[&str]; 9] = [
        &["--bogus"],
        &[],
        &["fly"],
        &["synth", "--out", "x", "--n", "-3", "--seed", "1"],
        &["synth", "--out", "x"],
        &["demo"],
        &["--config", "typo.toml", "reach"],
        &["--config", "mistyped.toml", "synth", "--out", "x", "--seed", "1"],
        &["--config", "section.toml", "reach", "--seeds", "1"],
    ];
    for args in cases {
        let out = armpose(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    assert!(!dir.path().join("x").exists());
    let missing = armpose(&["--config", "absent.toml", "reach", "--seeds", "1"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

fn domain_error(args: &[&str], dir: &std::path::Path) -> String {
    let out = armpose(args, dir);
    assert_eq!(out.status.code(), Some(1), "{args:?}");
    assert!(out.stdout.is_empty());
    let err = json(&String::from_utf8(out.stderr).unwrap());
    assert_schema("error", &err);
    err["error"]["code"].as_str().unwrap().to_string()
}

#[test]
fn domain_errors_exit_one_with_structured_stderr() {
    let dir = tmp();
    let d = dir.path();
    assert_eq!(domain_error(&["solve", "--keypoints", "nope.json"], d), "io_error");
    std::fs::write(d.join("garbage.json"), "{ not json").unwrap();
    assert_eq!(domain_error(&["solve", "--keypoints", "garbage.json"], d), "parse_error");
    assert_eq!(domain_error(&["reach", "--model", "garbage.json", "--seeds", "1"], d), "parse_error");
    assert_eq!(domain_error(&["eval", "--pred", "empty", "--gt", "empty"], d), "io_error");
    std::fs::create_dir_all(d.join("empty/annotations")).unwrap();
    assert_eq!(domain_error(&["eval", "--pred", "empty", "--gt", "empty"], d), "empty_eval_error");
    assert_eq!(
        domain_error(&["synth", "--out", "o", "--seed", "1", "--train-fraction", "1.5"], d),
        "invalid_input_error"
    );
}
