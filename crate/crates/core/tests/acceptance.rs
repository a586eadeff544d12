//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use rand::Rng;

use txbisim::equiv::{
    brb, brb_quotient, brb_x, check, quotient_verdict, rbrb, CheckOptions, Method, ReactiveChecker, Relation,
};
use txbisim::fuzz::{corpus, fuzz_axioms, strongly_guarded_processes, Axiom, Gen};
use txbisim::lts::{Label, Lts};
use txbisim::modal::{distinguish, in_subclass, EnvMode, Formula, Model, Subclass};
use txbisim::par::{self, Parallelism};
use txbisim::semantics::explore;
use txbisim::term::{parse_file, parse_term, Definitions, Term};

const SEED: u64 = 0x7b15_1a11;
const CORPUS: usize = 220;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

fn opts(method: Method) -> CheckOptions {
    CheckOptions {
        method,
        ..CheckOptions::default()
    }
}

fn fixture(name: &str) -> Definitions {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    parse_file(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Verdicts of one corpus pair, computed once.
struct Facts {
    p: Term,
    q: Term,
    brb: bool,
    rbrb: bool,
    strong: bool,
    /// `(brb, rbrb)` by each single method.
    encode: (bool, bool),
    direct: (bool, bool),
}

fn facts(p: &Term, q: &Term) -> Facts {
    let both = opts(Method::Both);
    let single = |m: Method| {
        let o = opts(m);
        (brb(p, q, &o).unwrap().equivalent, rbrb(p, q, &o).unwrap().equivalent)
    };
    Facts {
        p: p.clone(),
        q: q.clone(),
        brb: brb(p, q, &both).unwrap().equivalent,
        rbrb: rbrb(p, q, &both).unwrap().equivalent,
        strong: check(Relation::Strong, p, q, None, &both).unwrap().equivalent,
        encode: single(Method::Encode),
        direct: single(Method::Direct),
    }
}

fn fig3() -> Outcome {
    let d = fixture("appendixA.ccspt");
    let (p0, q0, r0) = (d.get("P0").unwrap(), d.get("Q0").unwrap(), d.get("R0").unwrap());
    for m in [Method::Encode, Method::Direct] {
        ensure(!brb(p0, q0, &opts(m)).unwrap().equivalent, || format!("{m}: P0 ~ Q0"))?;
        ensure(brb(q0, r0, &opts(m)).unwrap().equivalent, || format!("{m}: Q0 !~ R0"))?;
    }
    Ok("P0 !~ Q0, Q0 ~ R0 (encode, direct)".into())
}

fn fig2() -> Outcome {
    let d = fixture("appendixA.ccspt");
    let o = CheckOptions::default();
    ensure(!brb(d.get("P").unwrap(), d.get("Pm").unwrap(), &o).unwrap().equivalent, || {
        "P ~ Pm".into()
    })?;
    ensure(!brb(d.get("PC").unwrap(), d.get("PmC").unwrap(), &o).unwrap().equivalent, || {
        "P ||{a} (tau.0 + a.0) ~ Pm ||{a} (tau.0 + a.0)".into()
    })?;
    Ok("P !~ Pm, also in ||{a} (tau.0 + a.0)".into())
}

fn no_eliding() -> Outcome {
    let o = CheckOptions::default();
    for (a, b) in [("a.t.b.0", "a.t.t.b.0"), ("a.t.b.0", "a.t.tau.t.b.0")] {
        ensure(!brb(&t(a), &t(b), &o).unwrap().equivalent, || format!("{a} ~ {b}"))?;
    }
    Ok("a.t.b.0 !~ a.t.t.b.0, a.t.b.0 !~ a.t.tau.t.b.0".into())
}

fn laws() -> Outcome {
    let o = CheckOptions::default();
    ensure(rbrb(&t("tau.a.0 + t.b.0"), &t("tau.a.0"), &o).unwrap().equivalent, || {
        "lazy time-out law fails rooted".into()
    })?;
    let mut g = Gen::new(SEED ^ 4);
    let mut n = 0;
    for _ in 0..40 {
        let (a, x, y) = (g.action(), g.term_at(2), g.term_at(2));
        let xy = Term::choice(x.clone(), y);
        let lhs = Term::prefix(a.clone(), Term::choice(Term::tau(xy.clone()), x));
        let rhs = Term::prefix(a, xy);
        if explore(&[lhs.clone(), rhs.clone()], 10_000).is_err() {
            continue;
        }
        ensure(rbrb(&lhs, &rhs, &o).unwrap().equivalent, || format!("branching axiom: {lhs} vs {rhs}"))?;
        n += 1;
    }
    let (a, ta) = (t("a.0"), t("tau.a.0"));
    ensure(brb(&a, &ta, &o).unwrap().equivalent, || "a.0 !~ tau.a.0".into())?;
    ensure(!rbrb(&a, &ta, &o).unwrap().equivalent, || "a.0 ~r tau.a.0".into())?;
    Ok(format!("lazy time-out, {n} branching-axiom instances rooted, a.0 ~ tau.a.0 but not rooted"))
}

fn agreement(corpus: &[Facts]) -> Outcome {
    for f in corpus {
        ensure(f.encode == f.direct, || {
            format!("{} vs {}: encode {:?} direct {:?}", f.p, f.q, f.encode, f.direct)
        })?;
    }
    let eq = corpus.iter().filter(|f| f.brb).count();
    Ok(format!("{} pairs agree ({eq} equivalent)", corpus.len()))
}

fn theta_x(corpus: &[Facts]) -> Outcome {
    let o = CheckOptions::default();
    let checks = par::map(Parallelism::Parallel, corpus, |f| -> Result<usize, String> {
        let universe = f.p.alphabet().union(&f.q.alphabet());
        let mut n = 0;
        for x in universe.subsets() {
            let lhs = brb_x(&f.p, &f.q, &x, &o).unwrap().equivalent;
            let rhs = brb(&Term::theta_x(x.clone(), f.p.clone()), &Term::theta_x(x.clone(), f.q.clone()), &o)
                .unwrap()
                .equivalent;
            if lhs != rhs {
                return Err(format!("{} vs {} in {{{x}}}: brb_x {lhs}, theta {rhs}", f.p, f.q));
            }
            n += 1;
        }
        Ok(n)
    });
    let mut total = 0;
    for c in checks {
        total += c?;
    }
    Ok(format!("{total} (pair, X) checks"))
}

fn formulas_agree(corpus: &[Facts]) -> Outcome {
    let mut g = Gen::new(SEED ^ 7);
    let lbc: Vec<Formula> = (0..500).map(|_| g.lbc(3)).collect();
    let lbcr: Vec<Formula> = (0..500).map(|_| g.lbcr(3)).collect();
    for f in &lbc {
        ensure(in_subclass(f, Subclass::Lbc), || format!("{f} outside Lbc"))?;
    }
    for f in &lbcr {
        ensure(in_subclass(f, Subclass::Lbcr), || format!("{f} outside Lbcr"))?;
    }
    let found = par::map(Parallelism::Parallel, corpus, |fa| -> Result<(usize, usize, bool), String> {
        let e = explore(&[fa.p.clone(), fa.q.clone()], 10_000).unwrap();
        let (s, u) = (e.lts.roots()[0], e.lts.roots()[1]);
        let m = Model::new(&e.lts);
        let separates = |phi: &Formula| {
            let sat = m.sat(phi, &EnvMode::Triggered);
            sat.contains(s) != sat.contains(u)
        };
        let run = |fs: &[Formula], on: bool| -> Result<usize, String> {
            if !on {
                return Ok(0);
            }
            match fs.iter().find(|phi| separates(phi)) {
                Some(phi) => Err(format!("{phi} separates {} and {}", fa.p, fa.q)),
                None => Ok(fs.len()),
            }
        };
        let a = run(&lbc, fa.brb)?;
        let b = run(&lbcr, fa.rbrb)?;
        let caught = !fa.brb && lbc.iter().any(separates);
        Ok((a, b, caught))
    });
    let (mut a, mut b, mut caught) = (0, 0, 0);
    for r in found {
        let (x, y, c) = r?;
        a += x;
        b += y;
        caught += c as usize;
    }
    let inequivalent = corpus.iter().filter(|f| !f.brb).count();
    Ok(format!(
        "500 Lbc / 500 Lbcr formulas, {a} + {b} evaluations on equivalent pairs, none separates; \
         they separate {caught}/{inequivalent} inequivalent pairs"
    ))
}

fn distinguishing(corpus: &[Facts]) -> Outcome {
    let o = CheckOptions::default();
    let results = par::map(Parallelism::Parallel, corpus, |f| -> Result<usize, String> {
        let mut n = 0;
        for (rooted, related, class) in [(false, f.brb, Subclass::Lbc), (true, f.rbrb, Subclass::Lbcr)] {
            let d = distinguish(&f.p, &f.q, rooted, None, &o).map_err(|e| e.to_string())?;
            match (related, d) {
                (true, None) => {}
                (true, Some(d)) => return Err(format!("formula {} for related {} and {}", d.formula, f.p, f.q)),
                (false, None) => return Err(format!("no formula for {} and {}", f.p, f.q)),
                (false, Some(d)) => {
                    if !in_subclass(&d.formula, class) {
                        return Err(format!("{} outside {class}", d.formula));
                    }
                    let e = explore(&[f.p.clone(), f.q.clone()], 10_000).unwrap();
                    let sat = Model::new(&e.lts).sat(&d.formula, &EnvMode::Triggered);
                    if sat.contains(e.lts.roots()[0]) == sat.contains(e.lts.roots()[1]) {
                        return Err(format!("{} does not separate {} and {}", d.formula, f.p, f.q));
                    }
                    n += 1;
                }
            }
        }
        Ok(n)
    });
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(format!("{total} verified formulas for inequivalent pairs"))
}

fn axioms() -> Outcome {
    let report = fuzz_axioms(SEED, 50, &Axiom::ALL, &CheckOptions::default(), Parallelism::Parallel);
    for o in &report.axioms {
        ensure(o.ok, || format!("{}: {}", o.axiom, serde_json::to_string(o).unwrap()))?;
        ensure(o.instances >= 50, || format!("{}: {} instances", o.axiom, o.instances))?;
    }
    let typo = report.outcome(Axiom::IdemZero).unwrap();
    let approx = report.outcome(Axiom::ReactiveApprox).unwrap();
    ensure(approx.held > 0, || "reactive approximation only vacuous".into())?;
    Ok(format!(
        "{} laws x 50 instances; x+x=0 fails {}/{}; reactive approximation {} non-vacuous",
        report.axioms.len() - 1,
        typo.failed,
        typo.instances,
        approx.held
    ))
}

fn congruence(corpus: &[Facts]) -> Outcome {
    let equivalent: Vec<&Facts> = corpus.iter().filter(|f| f.rbrb).collect();
    ensure(!equivalent.is_empty(), || "no rbrb-equivalent pairs".into())?;
    let mut g = Gen::new(SEED ^ 10);
    let mut trials = Vec::new();
    let mut i = 0;
    while trials.len() < 120 {
        let f = equivalent[i % equivalent.len()];
        i += 1;
        let layers = g.rng().gen_range(1..=2);
        let c = g.context(layers);
        let (cp, cq) = (c.plug(&f.p), c.plug(&f.q));
        let ok = |x: &Term| x.validate().is_ok() && x.is_guarded();
        if ok(&cp) && ok(&cq) && explore(&[cp.clone(), cq.clone()], 10_000).is_ok() {
            trials.push((c, cp, cq));
        }
    }
    let o = CheckOptions::default();
    let results = par::map(Parallelism::Parallel, &trials, |(c, cp, cq)| -> Result<(), String> {
        if rbrb(cp, cq, &o).unwrap().equivalent {
            Ok(())
        } else {
            Err(format!("context {c}: {cp} vs {cq}"))
        }
    });
    for r in results {
        r?;
    }
    Ok(format!("{} trials over {} equivalent pairs", trials.len(), equivalent.len()))
}

fn quotients() -> Outcome {
    let procs = strongly_guarded_processes(SEED ^ 11, 60);
    let o = CheckOptions::default();
    let results = par::map(Parallelism::Parallel, &procs, |p| -> Result<(usize, usize), String> {
        let q = brb_quotient(p, &o).map_err(|e| format!("{p}: {e}"))?;
        for r in 0..q.lts.num_states() {
            if q.lts.successors_by(r, Lts::TIMEOUT).next().is_some() && !q.lts.is_stable(r) {
                return Err(format!("{p}: class {r} has t and tau"));
            }
        }
        let v = quotient_verdict(&q, &o).map_err(|e| e.to_string())?;
        if v.equivalent {
            Ok((q.exploration.lts.num_states(), q.lts.num_states()))
        } else {
            Err(format!("{p} !~ its quotient"))
        }
    });
    let (mut before, mut after) = (0, 0);
    for r in results {
        let (b, a) = r?;
        before += b;
        after += a;
    }
    Ok(format!("{} processes, {before} states -> {after} classes", procs.len()))
}

fn visible_init(lts: &Lts, s: usize) -> Vec<usize> {
    let mut v: Vec<usize> = lts
        .successors(s)
        .iter()
        .filter(|(l, _)| matches!(lts.label(*l), Label::Visible(_)))
        .map(|(l, _)| *l)
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn lemmas(corpus: &[Facts]) -> Outcome {
    let results = par::map(Parallelism::Parallel, corpus, |f| -> Result<usize, String> {
        if !f.brb {
            return Ok(0);
        }
        let (checker, e) = ReactiveChecker::for_terms(&f.p, &f.q, &opts(Method::Direct)).unwrap();
        let lts = checker.base();
        let v = checker.verdict(e.lts.roots()[0], None, e.lts.roots()[1]).unwrap();
        let w = v.witness.expect("positive verdicts carry a witness");
        let n = lts.num_states();
        let mut chains = Vec::new();
        for p in 0..n {
            for p1 in lts.tau_successors(p) {
                for p2 in lts.tau_successors(p1) {
                    chains.push((p, p1, p2));
                }
            }
        }
        let mut checked = 0;
        for q in 0..n {
            for &(p, p1, p2) in &chains {
                if w.contains_pair(p, q) && w.contains_pair(p2, q) && !w.contains_pair(p1, q) {
                    return Err(format!("stuttering fails on ({p}, {q}) via {p1}"));
                }
                for x in 0..w.envs().len() {
                    if w.contains_triple(p, x, q) && w.contains_triple(p2, x, q) && !w.contains_triple(p1, x, q) {
                        return Err(format!("stuttering fails on ({p}, {}, {q}) via {p1}", w.envs()[x]));
                    }
                }
                checked += 1;
            }
        }
        let related = w.pairs().chain(w.triples().map(|(p, _, q)| (p, q)));
        for (p, q) in related {
            if lts.is_stable(p) && lts.is_stable(q) && visible_init(lts, p) != visible_init(lts, q) {
                return Err(format!("stable related {p} and {q} differ in init"));
            }
            checked += 1;
        }
        Ok(checked)
    });
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(format!("{total} lemma instances on positive witnesses"))
}

fn inclusions(corpus: &[Facts]) -> Outcome {
    for f in corpus {
        ensure(!f.strong || f.rbrb, || format!("strong but not rbrb: {} vs {}", f.p, f.q))?;
        ensure(!f.rbrb || f.brb, || format!("rbrb but not brb: {} vs {}", f.p, f.q))?;
    }
    let count = |k: fn(&Facts) -> bool| corpus.iter().filter(|f| k(f)).count();
    Ok(format!(
        "strong {} <= rbrb {} <= brb {}",
        count(|f| f.strong),
        count(|f| f.rbrb),
        count(|f| f.brb)
    ))
}

fn run(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = std::time::Instant::now();
    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panic: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match r {
        Ok(detail) => {
            println!("criterion {n:2} PASS {name} ({secs:.1}s): {detail}");
            true
        }
        Err(why) => {
            println!("criterion {n:2} FAIL {name} ({secs:.1}s): {why}");
            false
        }
    }
}

fn main() -> ExitCode {
    let pairs = corpus(SEED, CORPUS);
    let facts: Vec<Facts> = par::map(Parallelism::Parallel, &pairs, |(p, q)| facts(p, q));
    let results = [
        run(1, "stability counterexample", fig3),
        run(2, "triggered summand and switch context", fig2),
        run(3, "no eliding of time-outs", no_eliding),
        run(4, "algebraic laws", laws),
        run(5, "encode and direct agree", || agreement(&facts)),
        run(6, "environment index via theta", || theta_x(&facts)),
        run(7, "random formulas respect equivalence", || formulas_agree(&facts)),
        run(8, "distinguishing formulas", || distinguishing(&facts)),
        run(9, "axiom soundness", axioms),
        run(10, "congruence", || congruence(&facts)),
        run(11, "quotient", quotients),
        run(12, "stuttering and init lemmas", || lemmas(&facts)),
        run(13, "strong => rbrb => brb", || inclusions(&facts)),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
