use std::process::{Command, Output};

fn nomrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nomrec"))
        .args(args)
        .env_remove("NOMREC_SEED")
        .env_remove("NOMREC_SAMPLES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn spec_file(name: &str, body: &str) -> String {
    let p = std::env::temp_dir().join(format!("nomrec-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn swap_operator_renames_binders_too() {
    let o = nomrec(&["op", "swap", "\\x. x y", "x", "y"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("# config seed=0 samples=300 depth=30 fcb_candidates=8 probes=3"), "{out}");
    assert_eq!(out.lines().nth(1), Some("\\y. y x"));
}

#[test]
fn substitution_avoids_capture() {
    let o = nomrec(&["op", "subst", "\\x. y", "x", "y"]);
    let out = stdout(&o);
    let line = out.lines().nth(1).unwrap();
    assert_ne!(line, "\\x. x");
    assert!(line.ends_with(". x"), "{line}");
}

#[test]
fn term_laws_pass_for_r6() {
    let o = nomrec(&["laws", "term", "6", "--samples", "500", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().filter(|l| l.starts_with("PROP")).all(|l| l.contains(" PASS ")));
    assert!(out.contains("PROP SwCg PASS"));
}

#[test]
fn reports_are_reproducible() {
    let a = stdout(&nomrec(&["laws", "noccs", "6", "--samples", "60", "--seed", "3"]));
    let b = stdout(&nomrec(&["laws", "noccs", "6", "--samples", "60", "--seed", "3"]));
    assert_eq!(a, b);
}

#[test]
fn env_fallback_is_echoed() {
    let o =
        Command::new(env!("CARGO_BIN_EXE_nomrec")).args(["op", "fv", "x"]).env("NOMREC_SEED", "41").output().unwrap();
    assert!(stdout(&o).starts_with("# config seed=41 "));
}

#[test]
fn separation_report_exits_zero() {
    let o = nomrec(&["counterexample", "r1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("SEPARATION WITNESSED"));
    let o = nomrec(&["counterexample", "r2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn failing_laws_exit_one() {
    let o = nomrec(&["laws", "broken-lm", "6", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(" FAIL "));
}

#[test]
fn checked_mode_detects_alpha_instability() {
    let o = nomrec(&["recursor", "6", "broken-lm", "\\x. x y", "--checked"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("alpha-instability"));
    let o = nomrec(&["recursor", "6", "term", "\\x. x y", "--checked"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().nth(1), Some("\\x. x y"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(nomrec(&["op", "nope"]).status.code(), Some(2));
    assert_eq!(nomrec(&["op", "fv", "\\x."]).status.code(), Some(2));
    assert_eq!(nomrec(&["laws", "term", "4x"]).status.code(), Some(2));
    assert_eq!(nomrec(&["--samples", "0", "op", "fv", "x"]).status.code(), Some(2));
    assert_eq!(nomrec(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn parse_errors_carry_positions() {
    let o = nomrec(&["op", "fv", "(x y"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error at"));
}

#[test]
fn corecursor_over_a_spec_is_identity() {
    let f = spec_file("eta.spec", "state a = L x b\nstate b = A a c\nstate c = V x\nroot a\n");
    let o = nomrec(&["corecursor", "9", &f, "b", "--samples", "40", "--depth", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("# path cr9 > cr5 > cr2"));
    assert!(out.contains("PROP identity PASS"));
}

#[test]
fn coterm_operations() {
    let fix = spec_file("fix.spec", "state s = A s t\nstate t = V y\nroot s\n");
    let o = nomrec(&["coterm", "fv", &fix]);
    assert_eq!(stdout(&o).lines().nth(1), Some("{y}"));
    let o = nomrec(&["coterm", "alpha-eq", &fix, &fix]);
    assert_eq!(stdout(&o).lines().nth(1), Some("true mode=exact"));
    let o = nomrec(&["coterm", "fresh", "z", &fix]);
    assert_eq!(stdout(&o).lines().nth(1), Some("true"));
    let v = spec_file("v.spec", "state r = V z\nroot r\n");
    let o = nomrec(&["coterm", "psubst", &fix, "y", &v, "--depth", "3"]);
    assert_eq!(stdout(&o).lines().nth(1), Some("(((… …) z) z)"));
}

#[test]
fn examples_run() {
    assert_eq!(stdout(&nomrec(&["example", "size", "\\x. x y"])).lines().nth(1), Some("4"));
    assert_eq!(stdout(&nomrec(&["example", "noccs", "x (\\x. x) x", "x"])).lines().nth(1), Some("2"));
    assert_eq!(stdout(&nomrec(&["example", "enf", "\\x. f x"])).lines().nth(1), Some("false"));
    let o = nomrec(&["example", "subst", "\\x. y x", "x", "y"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PROP matches-subst PASS"));
}
