use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value as J;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fieldcalc")).current_dir(root()).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> J {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn roots(field: &J) -> Vec<(String, J)> {
    field.as_object().unwrap().iter().map(|(k, v)| (k.clone(), v["value"].clone())).collect()
}

#[test]
fn library_checks_clean() {
    let o = run(&["check", "corpus/lib.scf"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: well annotated"));
}

#[test]
fn gossip_fails_at_spread() {
    let o = run(&["check", "corpus/gossip_id.scf"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("error[S-SPR]") && out.contains("no stabilising signature applicable"), "{out}");
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(run(&["check", "corpus/missing.scf"]).status.code(), Some(2));
    assert_eq!(run(&["check", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--program", "corpus/hop_main.scf"]).status.code(), Some(2));
}

#[test]
fn json_report_with_derivations() {
    let o = run(&["check", "corpus/lib.scf", "--json", "--emit-derivation"]);
    let j = json(&o);
    assert_eq!(j["verdict"], "well annotated");
    let ds = j["derivations"].as_array().unwrap();
    assert!(ds.iter().any(|d| d["function"] == "restrictSum" && d["derivation"]["rule"] == "A-DEF"));
}

#[test]
fn eval_reproduces_device_semantics() {
    let o = run(&[
        "eval",
        "corpus/hop_main.scf",
        "--sensors",
        r#"{"src":4,"dist":1}"#,
        "--neighbors",
        "[[0,[[0,[]],[1,[]]]],[8,[[8,[]],[1,[]]]]]",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["text"], "1(4(),1())");
}

#[test]
fn simulate_line_matches_oracle() {
    let sim = run(&["simulate", "--program", "corpus/hop_main.scf", "--env", "corpus/envs/line10.json", "--seed", "7"]);
    assert_eq!(sim.status.code(), Some(0));
    let s = json(&sim);
    assert_eq!(s["seed"], 7);
    assert_eq!(s["stable"], true);
    let got: Vec<f64> = roots(&s["field"]).iter().map(|(_, v)| v.as_f64().unwrap()).collect();
    assert_eq!(got, vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    let orc = run(&["oracle", "--program", "corpus/hop_main.scf", "--env", "corpus/envs/line10.json"]);
    assert_eq!(json(&orc)["field"], s["field"]);
}

#[test]
fn simulate_is_deterministic() {
    let dir = std::env::temp_dir().join(format!("fieldcalc-trace-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let go = |name: &str| {
        let path = dir.join(name);
        let o = run(&[
            "simulate",
            "--include",
            "corpus/lib.scf",
            "--program",
            "corpus/gradobs_main.scf",
            "--env",
            "corpus/envs/grid9.json",
            "--seed",
            "99",
            "--trace",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        (o.stdout, std::fs::read(&path).unwrap())
    };
    let (a, b) = (go("a.jsonl"), go("b.jsonl"));
    assert_eq!(a, b);
    let first = String::from_utf8(a.1).unwrap();
    let line: J = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert_eq!(line["action"], "env");
    assert!(first.lines().skip(1).all(|l| l.contains(r#""action":"fire""#)));
}

#[test]
fn k_fair_simulation_reaches_same_field() {
    let base = ["--include", "corpus/lib.scf", "--program", "corpus/channel_main.scf", "--env", "corpus/envs/grid9.json"];
    let one = json(&run(&[&["simulate"][..], &base[..]].concat()));
    let three = json(&run(&[&["simulate", "--k", "3", "--seed", "5"][..], &base[..]].concat()));
    assert_eq!(one["field"], three["field"]);
}

#[test]
fn selfstab_reports_unique_field() {
    let o = run(&[
        "selfstab",
        "--include",
        "corpus/lib.scf",
        "--program",
        "corpus/sector_main.scf",
        "--env",
        "corpus/envs/grid9.json",
        "--trials",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(json(&o)["verdict"], "unique");
}

#[test]
fn verify_signatures_honours_grid_override() {
    let o = run(&["verify-signatures", "corpus/lib.scf"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NEGINF"));
    let o = Command::new(env!("CARGO_BIN_EXE_fieldcalc"))
        .current_dir(root())
        .env("FIELDCALC_GRID", "-2,-1,-0.5,0,0.5,1,2,POSINF")
        .args(["verify-signatures", "corpus/lib.scf", "--json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(json(&o)["entries"].as_array().unwrap().iter().all(|e| e["passed"] == true));
}
