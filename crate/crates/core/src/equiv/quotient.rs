use crate::lts::{quotient_least, Lts, Partition};
use crate::semantics::{explore, Exploration};
use crate::term::{EnvSet, Term};

use super::{CheckOptions, EquivError, ReactiveChecker, Verdict};

/// The class system of a process over its brb classes, with the least
/// member of each class as representative.
#[derive(Debug, Clone)]
pub struct BrbQuotient {
    pub lts: Lts,
    pub partition: Partition,
    pub exploration: Exploration,
    pub universe: EnvSet,
    pub root_block: usize,
}

pub fn brb_quotient(p: &Term, opts: &CheckOptions) -> Result<BrbQuotient, EquivError> {
    let e = explore(std::slice::from_ref(p), opts.max_states)?;
    if !e.strongly_guarded {
        return Err(EquivError::NotStronglyGuarded);
    }
    let universe = p.alphabet();
    let checker = ReactiveChecker::new(&e.lts, &universe, opts.method, opts.max_alphabet)?;
    let n = e.lts.num_states();
    let mut related = vec![false; n * n];
    for s in 0..n {
        related[s * n + s] = true;
        for t in s + 1..n {
            let r = checker.related(s, None, t)?;
            related[s * n + t] = r;
            related[t * n + s] = r;
        }
    }
    let partition = Partition::from_equivalence(n, 0..n, |s, t| related[s * n + t]);
    let lts = quotient_least(&e.lts, &partition)?;
    let root_block = partition
        .block_of(e.lts.roots()[0])
        .expect("every reachable state has a class");
    Ok(BrbQuotient {
        lts,
        partition,
        exploration: e,
        universe,
        root_block,
    })
}

/// brb between the process and the class of its root.
pub fn quotient_verdict(q: &BrbQuotient, opts: &CheckOptions) -> Result<Verdict, EquivError> {
    let (union, offset) = q.exploration.lts.disjoint_union(&q.lts);
    let checker = ReactiveChecker::new(&union, &q.universe, opts.method, opts.max_alphabet)?;
    checker.verdict(q.exploration.lts.roots()[0], None, offset + q.root_block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::Lts;
    use crate::term::parse_term;

    fn quotient_of(s: &str) -> BrbQuotient {
        brb_quotient(&parse_term(s).unwrap(), &CheckOptions::default()).unwrap()
    }

    #[test]
    fn tau_prefix_collapses() {
        let q = quotient_of("tau.a.0");
        assert_eq!(q.lts.num_states(), 2);
        assert_eq!(q.lts.num_transitions(), 1);
        assert!(quotient_verdict(&q, &CheckOptions::default()).unwrap().equivalent);
    }

    #[test]
    fn timeout_class_source_is_stable() {
        for s in ["t.b.0", "a.0 + t.(tau.b.0 + t.a.0)", "tau.(t.a.0) + t.a.0"] {
            let q = quotient_of(s);
            for r in 0..q.lts.num_states() {
                if q.lts.successors_by(r, Lts::TIMEOUT).next().is_some() {
                    assert!(q.lts.is_stable(r), "{s}: class {r}");
                }
            }
            assert!(quotient_verdict(&q, &CheckOptions::default()).unwrap().equivalent, "{s}");
        }
    }

    #[test]
    fn divergent_processes_are_refused() {
        let defs = crate::term::parse_file("spec S { x = a.x; }").unwrap();
        let p = crate::term::Term::hide(EnvSet::from_names(["a"]), defs.parse_term("<x|S>").unwrap());
        assert!(matches!(
            brb_quotient(&p, &CheckOptions::default()),
            Err(EquivError::NotStronglyGuarded)
        ));
    }
}
