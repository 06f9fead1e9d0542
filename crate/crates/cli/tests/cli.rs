use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use condexp_cli::{parse_scenario, render, run, Report, RunOptions};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_condexp"));
    c.env("NO_COLOR", "1");
    c
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn temp_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("condexp-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_file(path: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(path).args(extra).output().unwrap()
}

fn outputs(o: &Output) -> serde_json::Value {
    let r = Report::parse(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    r.outputs().clone()
}

#[test]
fn every_bundled_scenario_runs() {
    let mut count = 0;
    for entry in std::fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        let o = run_file(&path, &[]);
        assert!(
            o.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&o.stderr)
        );
        count += 1;
    }
    assert!(count >= 10);
}

#[test]
fn documented_values() {
    let o = run_file(&scenarios_dir().join("eval.json"), &[]);
    assert_eq!(outputs(&o)["value"], 3.0);

    let o = run_file(&scenarios_dir().join("check_tower.json"), &[]);
    let out = outputs(&o);
    assert_eq!(out["rectangular"], false);
    assert_eq!(out["variable"]["gap"], 0.5);
    assert_eq!(out["witnesses"][0]["payoff"], serde_json::json!([1.0, 0.0, 0.0, 1.0]));

    let o = bin().args(["demo", "fubini_counterexample"]).output().unwrap();
    let out = outputs(&o);
    assert_eq!(out["values"]["lhs"], 1.0);
    assert_eq!(out["values"]["rhs"], 0.5);
    assert_eq!(out["pass"], true);
}

#[test]
fn exit_codes() {
    let ok = run_file(&scenarios_dir().join("eval.json"), &[]);
    assert_eq!(ok.status.code(), Some(0));

    let missing = bin().args(["run", "/nonexistent/scenario.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let bad = temp_file(
        "bad.json",
        r#"{"format": 1, "spaces": {"S": {"range": 2}},
            "sets": {"P": {"space": "S", "vertices": [[-0.1, 1.1]]}},
            "variables": {"X": {"space": "S", "values": [1, 2]}},
            "command": {"op": "eval", "set": "P", "variable": "X"}}"#,
    );
    let o = run_file(&bad, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sets.P.vertices[0]"));

    let mismatch = temp_file(
        "mismatch.json",
        r#"{"format": 1, "spaces": {"S": {"range": 2}, "T": {"range": 3}},
            "sets": {"P": {"space": "S", "vertices": [[0.5, 0.5]]}},
            "variables": {"X": {"space": "T", "values": [1, 2, 3]}},
            "command": {"op": "eval", "set": "P", "variable": "X"}}"#,
    );
    assert_eq!(run_file(&mismatch, &[]).status.code(), Some(3));

    let huge = temp_file(
        "huge.json",
        r#"{"format": 1, "spaces": {"U": {"range": 7}, "V": {"range": 10}},
            "sets": {"SU": {"space": "U", "vertices": [[1, 1, 1, 1, 1, 1, 1]]}, "SV": {"space": "V", "simplex": true}},
            "command": {"op": "check-fubini", "su": "SU", "sv": "SV"}}"#
            .replace("[1, 1, 1, 1, 1, 1, 1]", &format!("{:?}", vec![1.0 / 7.0; 7]))
            .as_str(),
    );
    let o = run_file(&huge, &[]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(
        bin().args(["demo", "no_such_demo"]).output().unwrap().status.code(),
        Some(2)
    );
}

#[test]
fn reports_are_byte_identical() {
    for name in ["check_tower.json", "penalty_additivity.json", "tree_sublinear.json"] {
        let path = scenarios_dir().join(name);
        let a = run_file(&path, &["--threads", "1"]).stdout;
        let b = run_file(&path, &["--threads", "4"]).stdout;
        let c = run_file(&path, &[]).stdout;
        assert_eq!(a, b, "{name}");
        assert_eq!(a, c, "{name}");
    }
}

#[test]
fn out_flag_writes_file() {
    let out = std::env::temp_dir().join(format!("condexp-out-{}.json", std::process::id()));
    let o = bin()
        .args(["run"])
        .arg(scenarios_dir().join("oce.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(Report::parse(&text).unwrap().outputs()["value"].is_number());
    std::fs::remove_file(out).ok();
}

#[test]
fn no_color_plain_status() {
    let o = run_file(&scenarios_dir().join("eval.json"), &[]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("ok: eval"));
    assert!(!err.contains('\x1b'));
}

#[test]
fn list_demos_matches_library() {
    let o = bin().arg("list-demos").output().unwrap();
    let names: Vec<String> = String::from_utf8(o.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(names, condexp::demos::DEMO_NAMES);
}

#[test]
fn seed_changes_random_probes_only() {
    let text = std::fs::read_to_string(scenarios_dir().join("check_tower.json")).unwrap();
    let s = parse_scenario(&text).unwrap();
    let a = run(&s, &RunOptions::default()).unwrap();
    let b = run(
        &s,
        &RunOptions {
            seed: 7,
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!(a.outputs()["witnesses"], b.outputs()["witnesses"]);
    assert_ne!(a.outputs()["max_random_gap"], b.outputs()["max_random_gap"]);
    assert_eq!(parse_scenario(&render(&s.doc)).unwrap().doc, s.doc);
}
