use txbisim::equiv::CheckOptions;
use txbisim::fuzz::{fuzz_axioms, Axiom};
use txbisim::par::Parallelism;

#[test]
fn every_law_holds_and_the_literal_zero_law_fails() {
    let report = fuzz_axioms(2024, 50, &Axiom::ALL, &CheckOptions::default(), Parallelism::Parallel);
    for o in &report.axioms {
        println!(
            "{:16} held {:3} vacuous {:3} failed {:3} errors {}",
            o.axiom, o.held, o.vacuous, o.failed, o.errors
        );
    }
    let bad: Vec<_> = report.axioms.iter().filter(|o| !o.ok).collect();
    assert!(bad.is_empty(), "{}", serde_json::to_string_pretty(&bad).unwrap());
}

#[test]
fn sequential_and_parallel_reports_agree() {
    let axioms = [Axiom::Branching, Axiom::LazyTimeout, Axiom::PsiTimeout];
    let seq = fuzz_axioms(5, 10, &axioms, &CheckOptions::default(), Parallelism::Sequential);
    let par = fuzz_axioms(5, 10, &axioms, &CheckOptions::default(), Parallelism::Parallel);
    assert_eq!(
        serde_json::to_value(&seq).unwrap(),
        serde_json::to_value(&par).unwrap()
    );
}
