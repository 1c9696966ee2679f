use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn adversim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adversim"))
        .args(args)
        .env_remove("ADVERSIM_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn snapshot_simulation_returns_three_sets() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.json");
    let out = adversim(&[
        "simulate", "--n", "3", "--spec", "tp-complete", "--protocol", "snapshot", "--rounds", "3", "--seed", "7",
        "--out", p(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let t = read_json(&trace);
    assert_eq!(t["schema_version"], 1);
    let outputs = t["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 3);
    assert!(outputs.iter().all(|o| !o.is_null()));
    assert_eq!(t["rounds"].as_array().unwrap().len(), 3);

    let verified = adversim(&["verify", p(&trace)]);
    assert_eq!(code(&verified), 0);
    let report = String::from_utf8_lossy(&verified.stdout);
    for check in ["schema", "rcg-legality", "replay", "guarantee"] {
        assert!(report.contains(&format!("PASS {check}")), "{report}");
    }
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&adversim(&["simulate", "--n", "0"])), 64);
    assert_eq!(code(&adversim(&["simulate", "--n", "3", "--spec", "nope"])), 64);
    assert_eq!(code(&adversim(&["simulate", "--n", "3", "--protocol", "nope"])), 64);
    assert_eq!(
        code(&adversim(&["exhaustive", "--n", "3", "--rounds", "1", "--property", "snapshot-vald"])),
        64
    );
    assert_eq!(code(&adversim(&["frobnicate"])), 64);
    assert_eq!(code(&adversim(&["--help"])), 0);
}

#[test]
fn tampered_trace_fails_verification_with_round() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.json");
    let out = adversim(&["simulate", "--n", "3", "--protocol", "gossip", "--seed", "1", "--out", p(&trace)]);
    assert_eq!(code(&out), 0);
    let mut t = read_json(&trace);
    // An empty round is never a tournament.
    t["rounds"][1]["rcg"]["edges"] = Value::Array(vec![]);
    std::fs::write(&trace, serde_json::to_string(&t).unwrap()).unwrap();
    let out = adversim(&["verify", p(&trace)]);
    assert_eq!(code(&out), 2);
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("FAIL rcg-legality (first violating round 2)"), "{report}");
}

#[test]
fn exhaustive_snapshot_holds() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = adversim(&[
        "exhaustive", "--n", "3", "--spec", "tp-complete", "--rounds", "3", "--property", "snapshot-valid", "--out",
        p(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&report);
    assert_eq!(r["mode"], "exhaustive");
    assert_eq!(r["executions"], 19683);
    assert_eq!(r["holds"], true);
}

#[test]
fn oversized_tree_falls_back_or_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let args = [
        "exhaustive", "--n", "3", "--spec", "tp", "--rounds", "5", "--property", "tournament-emulation", "--samples",
        "500",
    ];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", p(&report)]);
    assert_eq!(code(&adversim(&with_out)), 0);
    let r = read_json(&report);
    assert_eq!(r["mode"], "sampled");
    assert_eq!(r["executions"], 500);
    assert!(r["fallback_reason"].is_string());

    let mut strict = args.to_vec();
    strict.push("--no-fallback");
    assert_eq!(code(&adversim(&strict)), 3);
}

#[test]
fn budget_env_var_caps_the_tree() {
    let out = Command::new(env!("CARGO_BIN_EXE_adversim"))
        .args([
            "exhaustive", "--n", "3", "--spec", "tp-complete", "--rounds", "2", "--property", "snapshot-valid",
            "--no-fallback",
        ])
        .env("ADVERSIM_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
}

#[test]
fn complex_exports_and_cross_validates() {
    let dir = tempfile::tempdir().unwrap();
    let (json, svg, dot) = (dir.path().join("c.json"), dir.path().join("c.svg"), dir.path().join("c.dot"));
    let out = adversim(&[
        "complex", "--n", "3", "--schedule", "1-2,0-1,0-2", "--json", p(&json), "--svg", p(&svg), "--dot", p(&dot),
        "--cross-validate",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&json)["tops"].as_array().unwrap().len(), 27);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("graph complex"));
    assert_eq!(code(&adversim(&["verify", p(&json)])), 0);

    assert_eq!(code(&adversim(&["complex", "--n", "5", "--svg", p(&svg)])), 65);

    let edge = dir.path().join("e.json");
    assert_eq!(code(&adversim(&["complex", "--n", "2", "--schedule", "0-1", "--json", p(&edge)])), 0);
    assert_eq!(read_json(&edge)["tops"].as_array().unwrap().len(), 3);
}

#[test]
fn register_outcome_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let (trace, outcome) = (dir.path().join("t.json"), dir.path().join("o.json"));
    let out = adversim(&[
        "simulate", "--n", "4", "--protocol", "register", "--writes", "2", "--seed", "5", "--out", p(&trace),
        "--outcome", p(&outcome),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let verified = adversim(&["verify", p(&trace), p(&outcome)]);
    assert_eq!(code(&verified), 0, "{}", String::from_utf8_lossy(&verified.stdout));

    let starved = adversim(&["simulate", "--n", "4", "--protocol", "register", "--writes", "2", "--rounds", "1"]);
    assert_eq!(code(&starved), 3);
}

#[test]
fn oracles_report_json() {
    let out = adversim(&["oracle", "tournament-facts", "--n", "4"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["tournaments"], 64);

    let out = adversim(&["verify", "--oracle", "king-liveness", "--n", "2", "--max-depth", "4"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["l_star"], 2);

    let out = adversim(&["oracle", "reachability", "--n", "3", "--edges", "0-1,2-1"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["traversal_path"], false);
    assert_eq!(r["agrees"], true);
}
