use std::io::Write as _;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_txbisim"))
        .args(args)
        .env_remove("TXBISIM_MAX_STATES")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn temp_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn path(f: &tempfile::NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

#[test]
fn check_verdicts_and_exit_codes() {
    let a = fixture("appendixA.ccspt");
    let e = fixture("elide.ccspt");
    assert_eq!(code(&run(&["check", &a, "Q0", "R0", "brb"])), 0);
    assert_eq!(code(&run(&["check", &a, "P0", "Q0", "brb"])), 1);
    assert_eq!(code(&run(&["check", &a, "P", "Pm", "brb"])), 1);
    assert_eq!(code(&run(&["check", &e, "P", "Q", "brb"])), 1);
    assert_eq!(code(&run(&["check", &e, "P", "R", "brb"])), 1);
    assert_eq!(code(&run(&["check", &e, "P", "P", "strong"])), 0);
    for method in ["encode", "direct"] {
        assert_eq!(code(&run(&["--method", method, "check", &a, "Q0", "R0", "brb"])), 0);
    }
}

#[test]
fn check_inline_terms_and_env() {
    let f = temp_file("def A = a.0;\n");
    assert_eq!(code(&run(&["check", path(&f), "A", "tau.a.0", "brb"])), 0);
    assert_eq!(code(&run(&["check", path(&f), "A", "tau.a.0", "rbrb"])), 1);
    let o = run(&["check", path(&f), "a.0 + t.b.0", "a.0", "brb-x", "--env", "{a}"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&run(&["check", path(&f), "a.0 + t.b.0", "a.0", "brb-x", "--env", "{}"])), 1);
}

#[test]
fn check_report_shape() {
    let o = run(&["--output", "json", "check", &fixture("appendixA.ccspt"), "Q0", "R0", "brb"]);
    let v = json(&o);
    assert_eq!(v["equivalent"], true);
    assert_eq!(v["relation"], "brb");
    assert_eq!(v["method"], "both");
    assert!(v["states"].as_u64().unwrap() > 0);
    assert!(v["witness_size"].as_u64().unwrap() > 0);

    let o = run(&["--output", "json", "check", &fixture("elide.ccspt"), "P", "Q", "brb"]);
    let v = json(&o);
    assert_eq!(v["equivalent"], false);
    assert!(v["witness_size"].is_null());
    assert!(!v["removal_trace"].as_array().unwrap().is_empty());

    let text = stdout(&run(&["check", &fixture("elide.ccspt"), "P", "Q", "brb"]));
    assert!(text.contains("not equivalent"), "{text}");
    assert!(text.contains("hint:"), "{text}");
}

#[test]
fn errors_exit_two() {
    let a = fixture("appendixA.ccspt");
    let o = run(&["check", &a, "Nope", "Q0", "brb"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not defined"), "{}", stderr(&o));
    let o = run(&["check", &a, "Q0", "R0", "brb-x"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("needs an environment"), "{}", stderr(&o));
    assert_eq!(code(&run(&["check", &a, "Q0", "R0", "weak"])), 2);
    assert_eq!(code(&run(&["--method", "guess", "check", &a, "Q0", "R0", "brb"])), 2);
    assert_eq!(code(&run(&["check", "/nonexistent.ccspt", "P", "P", "brb"])), 2);
    let bad = temp_file("def P = a.;\n");
    assert_eq!(code(&run(&["parse", path(&bad)])), 2);
}

#[test]
fn state_budget_from_environment() {
    let f = temp_file("def P = a.b.c.d.0;\n");
    let o = Command::new(env!("CARGO_BIN_EXE_txbisim"))
        .args(["lts", path(&f), "P"])
        .env("TXBISIM_MAX_STATES", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
    assert_eq!(code(&run(&["--max-states", "0", "lts", path(&f), "P"])), 2);
}

#[test]
fn lts_export() {
    let f = temp_file("def P = t.0;\n");
    let o = run(&["lts", path(&f), "P"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("(0,\"t\",1)"), "{}", stdout(&o));

    let v = json(&run(&["lts", path(&f), "P", "--format", "json"]));
    assert_eq!(v["states"], 2);
    assert_eq!(v["transitions"][0]["label"], "t");
    assert_eq!(v["roots"][0], 0);
}

#[test]
fn encoded_lts_of_nil() {
    let f = temp_file("def P = 0;\n");
    let v = json(&run(&["lts", path(&f), "P", "--encoded", "--alphabet", "{a}", "--format", "json"]));
    let labels: Vec<&str> = v["transitions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["label"].as_str().unwrap())
        .collect();
    assert_eq!(v["states"], 3);
    assert_eq!(labels.len(), 4);
    assert_eq!(labels.iter().filter(|l| **l == "t_eps").count(), 2);
}

#[test]
fn unguarded_recursion_is_reported() {
    let f = temp_file("spec S { x = x; }\ndef P = <x|S>;\n");
    let o = run(&["lts", path(&f), "P"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unguarded recursion"), "{}", stderr(&o));
}

#[test]
fn modal_examples() {
    let f = temp_file("def P = t.b.0;\n");
    let f = path(&f);
    let holds = |term: &str, formula: &str, env: &str| code(&run(&["modal", f, term, "--formula", formula, "--env", env]));
    assert_eq!(holds("P", "<{}><b>T", "triggered"), 0);
    assert_eq!(holds("P", "T", "triggered"), 0);
    assert_eq!(holds("tau.0", "<eps>~<tau>T", "triggered"), 0);
    assert_eq!(holds("tau.a.0 + t.b.0", "<{}>T", "triggered"), 1);
    assert_eq!(holds("a.0", "<a>T", "{b}"), 0);
    assert_eq!(holds("a.0 + b.0", "<a>T", "{b}"), 1);
    assert_eq!(holds("P", "<{}", "triggered"), 2);

    let v = json(&run(&["--output", "json", "modal", f, "P", "--formula", "<{}><b>T"]));
    assert_eq!(v["holds"], true);
    assert_eq!(v["env"], "triggered");
}

#[test]
fn distinguish_and_recheck() {
    let a = fixture("appendixA.ccspt");
    let o = run(&["distinguish", &a, "P", "P"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "equivalent");

    let o = run(&["--output", "json", "distinguish", &a, "P", "Pm"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["equivalent"], false);
    assert_eq!(v["subclass"], "Lbc");
    let formula = v["formula"].as_str().unwrap();
    let expect = |name: &str, key: &str| {
        let want = if v[key].as_bool().unwrap() { 0 } else { 1 };
        assert_eq!(code(&run(&["modal", &a, name, "--formula", formula])), want, "{name}: {formula}");
    };
    expect("P", "holds_in_P");
    expect("Pm", "holds_in_Q");
    assert_ne!(v["holds_in_P"], v["holds_in_Q"]);

    let f = temp_file("def A = a.0;\n");
    let o = run(&["--output", "json", "distinguish", path(&f), "A", "tau.a.0", "--rooted"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["subclass"], "Lbcr");
    assert_eq!(code(&run(&["distinguish", path(&f), "A", "tau.a.0"])), 0);
}

#[test]
fn quotient_export() {
    let f = temp_file("spec S { x = a.x; }\ndef D = tau{a}(<x|S>);\n");
    let o = run(&["quotient", path(&f), "tau.a.0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("des (0,1,2)"), "{}", stdout(&o));
    let v = json(&run(&["quotient", path(&f), "a.0 + tau.a.0", "--format", "json"]));
    assert_eq!(v["states"], 2);
    let o = run(&["quotient", path(&f), "D"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("strongly guarded"), "{}", stderr(&o));
}

#[test]
fn parse_round_trips_through_stdin() {
    let a = fixture("appendixA.ccspt");
    let first = stdout(&run(&["parse", &a]));
    let mut child = Command::new(env!("CARGO_BIN_EXE_txbisim"))
        .args(["parse", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(first.as_bytes()).unwrap();
    let second = child.wait_with_output().unwrap();
    assert_eq!(code(&second), 0);
    assert_eq!(first, stdout(&second));

    let v = json(&run(&["--output", "json", "parse", &a]));
    let names: Vec<&str> = v["definitions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["P0", "Q0", "R0", "P", "Pm", "PC", "PmC"]);
}

#[test]
fn fuzz_axioms_report() {
    let o = run(&[
        "--output", "json", "fuzz-axioms", "--seed", "3", "--count", "4", "--axiom", "idem-zero", "--axiom", "zero",
        "--axiom", "lazy-timeout",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json(&o);
    let axioms = v["axioms"].as_array().unwrap();
    assert_eq!(axioms.len(), 3);
    let zero = &axioms[0];
    assert_eq!(zero["axiom"], "idem-zero");
    assert_eq!(zero["failed"], 4);
    assert!(zero["counterexample"]["lhs"].is_string());
    assert!(axioms[1..].iter().all(|a| a["failed"] == 0 && a["ok"] == true));

    let text = stdout(&run(&["fuzz-axioms", "--count", "2", "--axiom", "idem-zero", "--sequential"]));
    assert!(text.contains("fails as expected"), "{text}");
    assert_eq!(code(&run(&["fuzz-axioms", "--axiom", "no-such-law"])), 2);
}
