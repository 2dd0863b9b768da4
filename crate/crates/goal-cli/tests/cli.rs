use std::fs;
use std::process::{Command, Output};

fn goal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goal")).args(args).env_remove("GOAL_BUDGET").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const TINY: &str = "vocab { p, q }
beliefs { }
goals { p; }
capability mk { when true add {p}; }
program {
  G(p) -> do(mk);
}
properties {
  leadsto G(p), B(p);
  ensures G(p), B(p);
}
";

#[test]
fn verify_shopping_matches_golden() {
    let o = goal(&["verify", "--fixture", "shopping"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), include_str!("golden/verify_shopping.txt"));
    let again = goal(&["verify", "--fixture", "shopping", "--jobs", "1"]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn run_shopping_matches_golden() {
    let o = goal(&["run", "--fixture", "shopping", "--sched", "rr", "--steps", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out, include_str!("golden/run_shopping_rr.txt"));
    let last = out.lines().last().unwrap();
    assert!(last.contains(", bought_I, bought_T") && last.ends_with("goals: {}"), "{last}");
}

#[test]
fn random_runs_are_reproducible() {
    let a = goal(&["run", "--fixture", "shopping", "--sched", "random", "--seed", "7", "--steps", "40"]);
    let b = goal(&["run", "--fixture", "shopping", "--sched", "random", "--seed", "7", "--steps", "40"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let u = goal(&["run", "--fixture", "shopping", "--unfair", "--seed", "3", "--steps", "10"]);
    assert_eq!(u.status.code(), Some(0));
    assert!(stderr(&u).contains("unfair schedule"));
}

#[test]
fn broken_fixture_fails_with_witness() {
    let o = goal(&["verify", "--fixture", "broken"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL  {B(in_cart_T) & G(bought_T) & B(ContentCart)} pay_cart {B(bought_T)}"));
    assert!(out.contains("witness ["));
    let r = goal(&["verify", "--fixture", "broken", "--format", "records"]);
    assert_eq!(r.status.code(), Some(1));
    let recs = stdout(&r);
    assert!(recs.lines().all(|l| l.starts_with("{\"obligation\":") && l.contains("\"witness_state_digest\":")));
    assert!(recs.lines().any(|l| l.contains("\"verdict\":\"fail\"") && !l.contains("\"witness_state_digest\":null")));
}

#[test]
fn literal_fixture_deadlocks() {
    let o = goal(&["verify", "--fixture", "shopping-literal"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("lasso violating at position 0"));
}

#[test]
fn file_input_and_cli_properties() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tiny.goal");
    fs::write(&p, TINY).unwrap();
    let path = p.to_str().unwrap();
    let o = goal(&["verify", path]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let o = goal(&["verify", path, "--property", "unless B(p), false", "--property", "invariant !B(q)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = goal(&["verify", path, "--property", "invariant B(p)"]);
    assert_eq!(o.status.code(), Some(1));

    let out = dir.path().join("g.dot");
    let o = goal(&["graph", path, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(&out).unwrap().starts_with("digraph"));
    assert!(stderr(&o).contains("2 states"));
}

#[test]
fn check_triple_modes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tiny.goal");
    fs::write(&p, TINY).unwrap();
    let path = p.to_str().unwrap();
    for mode in ["semantic", "wlp"] {
        let o = goal(&["check-triple", path, "--triple", "G(p), adopt(q), G(p)", "--mode", mode]);
        assert_eq!(o.status.code(), Some(0), "{mode}: {}", stdout(&o));
        let o = goal(&["check-triple", path, "--triple", "G(p), drop(p), G(p)", "--mode", mode]);
        assert_eq!(o.status.code(), Some(1), "{mode}: {}", stdout(&o));
    }
    let o = goal(&["check-triple", path, "--triple", "true, mk, B(p)", "--mode", "wlp"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no Hoare axiom"));
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.goal");
    fs::write(&p, "vocab { p }\nbeliefs { p & ; }\n").unwrap();
    let o = goal(&["verify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2:15"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());

    assert_eq!(goal(&["verify", "--fixture", "nope"]).status.code(), Some(2));
    assert_eq!(goal(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(goal(&["verify", "--fixture", "shopping", "--property", "ensures B(x), B(p)"]).status.code(), Some(2));

    let o = goal(&["verify", "--fixture", "shopping", "--budget", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_goal"))
        .args(["graph", "--fixture", "shopping"])
        .env("GOAL_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}
