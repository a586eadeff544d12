use std::path::PathBuf;

use txbisim::equiv::{brb, rbrb, CheckOptions, Method};
use txbisim::term::{parse_file, Definitions};

fn load(name: &str) -> Definitions {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    parse_file(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn opts(method: Method) -> CheckOptions {
    CheckOptions {
        method,
        ..CheckOptions::default()
    }
}

#[test]
fn stability_counterexample() {
    let d = load("appendixA.ccspt");
    let (p0, q0, r0) = (d.get("P0").unwrap(), d.get("Q0").unwrap(), d.get("R0").unwrap());
    for m in [Method::Encode, Method::Direct, Method::Both] {
        assert!(!brb(p0, q0, &opts(m)).unwrap().equivalent, "{m}");
        assert!(brb(q0, r0, &opts(m)).unwrap().equivalent, "{m}");
        assert!(!brb(p0, r0, &opts(m)).unwrap().equivalent, "{m}");
    }
}

#[test]
fn triggered_summand_and_switch_context() {
    let d = load("appendixA.ccspt");
    let o = CheckOptions::default();
    assert!(!brb(d.get("P").unwrap(), d.get("Pm").unwrap(), &o).unwrap().equivalent);
    assert!(!brb(d.get("PC").unwrap(), d.get("PmC").unwrap(), &o).unwrap().equivalent);
    assert!(!rbrb(d.get("PC").unwrap(), d.get("PmC").unwrap(), &o).unwrap().equivalent);
}

#[test]
fn timeouts_are_not_elided() {
    let d = load("elide.ccspt");
    let o = CheckOptions::default();
    let (p, q, r) = (d.get("P").unwrap(), d.get("Q").unwrap(), d.get("R").unwrap());
    assert!(!brb(p, q, &o).unwrap().equivalent);
    assert!(!brb(p, r, &o).unwrap().equivalent);
    assert!(brb(p, p, &o).unwrap().equivalent);
}
