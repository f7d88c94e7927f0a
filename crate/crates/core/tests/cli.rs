use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use wtg_core::gadgets::{build_cec, GadgetParams};

fn wtg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wtg"))
        .current_dir(dir)
        .env_remove("WTG_FIXTURES")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn compile_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let o = wtg(dir.path(), &["compile", "inc-halt", "-o", "g.json"]);
    assert!(o.status.success(), "{o:?}");
    assert!(dir.path().join("g.anchors.json").exists());

    let o = wtg(
        dir.path(),
        &[
            "simulate",
            "g.json",
            "--max",
            "punisher:1",
            "--trace",
            "t.json",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let out = stdout(&o);
    assert!(out.contains("status GOAL"), "{out}");
    assert!(out.contains("cost 611/10"), "{out}");
    let trace: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(trace["weight"], "611/10");
    assert!(!trace["steps"].as_array().unwrap().is_empty());
}

#[test]
fn existence_variant_reaches_61() {
    let dir = tempfile::tempdir().unwrap();
    assert!(wtg(
        dir.path(),
        &[
            "compile",
            "inc-halt",
            "--variant",
            "existence",
            "-o",
            "e.json"
        ]
    )
    .status
    .success());
    let o = wtg(dir.path(), &["simulate", "e.json", "--decimal"]);
    let out = stdout(&o);
    assert!(out.contains("cost 61/1"), "{out}");
    assert!(out.contains("(approximate)"), "{out}");
}

#[test]
fn a_caught_cheat_names_the_module() {
    let dir = tempfile::tempdir().unwrap();
    assert!(wtg(dir.path(), &["compile", "inc-halt", "-o", "g.json"])
        .status
        .success());
    let o = wtg(
        dir.path(),
        &[
            "simulate",
            "g.json",
            "--min",
            "cheat:delay:1:1/100",
            "--max",
            "punisher:1",
        ],
    );
    let out = stdout(&o);
    assert!(out.contains("stopped in q0/inc"), "{out}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("bad.tcm"), "q0: jump q1\n").unwrap();
    assert_eq!(wtg(p, &["compile", "bad.tcm"]).status.code(), Some(2));
    assert_eq!(
        wtg(p, &["compile", "no-such-machine"]).status.code(),
        Some(1)
    );

    assert!(wtg(p, &["compile", "inc-halt", "-o", "g.json"])
        .status
        .success());
    assert_eq!(
        wtg(p, &["simulate", "g.json", "--min", "sneaky"])
            .status
            .code(),
        Some(2)
    );
    let o = wtg(p, &["grid-value", "g.json", "--depth", "30", "--cap", "5"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("restricted game"));
}

#[test]
fn a_mutated_gadget_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let h = build_cec(&GadgetParams::cec(30, 3, 28, 31)).unwrap();
    fs::write(
        p.join("ok.json"),
        serde_json::to_string(&h.to_file()).unwrap(),
    )
    .unwrap();
    let (_, bad) = h.weight_mutants().into_iter().next().unwrap();
    fs::write(
        p.join("bad.json"),
        serde_json::to_string(&bad.to_file()).unwrap(),
    )
    .unwrap();

    assert_eq!(
        wtg(p, &["verify", "--gadget", "ok.json"]).status.code(),
        Some(0)
    );
    let o = wtg(p, &["verify", "--gadget", "bad.json", "--report", "r.json"]);
    assert_eq!(o.status.code(), Some(3));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(p.join("r.json")).unwrap()).unwrap();
    let checks = report[0]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["pass"] == false));
}

#[test]
fn fixtures_dir_is_respected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::create_dir(p.join("fx")).unwrap();
    fs::write(
        p.join("fx/tiny.tcm"),
        "# one step\nq0: inc d q1\nq1: halt\n",
    )
    .unwrap();
    let o = wtg(p, &["verify", "--suite", "reduction", "--fixtures", "fx"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("reduction/tiny"));

    let o = Command::new(env!("CARGO_BIN_EXE_wtg"))
        .current_dir(p)
        .env("WTG_FIXTURES", p.join("fx"))
        .args(["compile", "tiny", "-o", "t.json"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
}
