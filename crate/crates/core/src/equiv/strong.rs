//! Strong bisimilarity by signature refinement; every label is observable.

use std::collections::HashMap;

use crate::lts::{LabelId, Lts};

use super::relation::BitMatrix;

/// Block index of every state under strong bisimilarity.
pub(crate) fn strong_blocks(lts: &Lts) -> Vec<usize> {
    let n = lts.num_states();
    let mut block = vec![0usize; n];
    let mut count = 1;
    loop {
        let mut ids: HashMap<(usize, Vec<(LabelId, usize)>), usize> = HashMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let mut sig: Vec<(LabelId, usize)> = lts
                .successors(s)
                .iter()
                .map(|&(l, t)| (l, block[t]))
                .collect();
            sig.sort_unstable();
            sig.dedup();
            let fresh = ids.len();
            next[s] = *ids.entry((block[s], sig)).or_insert(fresh);
        }
        let new_count = ids.len();
        block = next;
        if new_count == count {
            return block;
        }
        count = new_count;
    }
}

pub(crate) fn strong_relation(lts: &Lts) -> BitMatrix {
    let block = strong_blocks(lts);
    let n = lts.num_states();
    let mut m = BitMatrix::empty(n);
    for p in 0..n {
        for q in 0..n {
            if block[p] == block[q] {
                m.set(p, q, true);
            }
        }
    }
    m
}

/// Single-pass check that `rel` is a strong bisimulation.
pub(crate) fn validate_strong(lts: &Lts, rel: &BitMatrix) -> Result<(), String> {
    for (p, q) in rel.ones() {
        if !rel.get(q, p) {
            return Err(format!("relation is not symmetric at ({p}, {q})"));
        }
        for &(l, p2) in lts.successors(p) {
            let matched = lts.successors_by(q, l).any(|q2| rel.get(p2, q2));
            if !matched {
                return Err(format!(
                    "({p}, {q}): {p} -{}-> {p2} has no matching step",
                    lts.label(l)
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::StateId;

    fn strongly_bisimilar(lts: &Lts, s: StateId, t: StateId) -> bool {
        let block = strong_blocks(lts);
        block[s] == block[t]
    }
    use crate::semantics::explore;
    use crate::term::parse_term;

    #[test]
    fn idempotence_is_semantic() {
        let e = explore(&[parse_term("a.0").unwrap(), parse_term("a.0 + a.0").unwrap()], 100).unwrap();
        assert!(strongly_bisimilar(&e.lts, e.lts.roots()[0], e.lts.roots()[1]));
        let rel = strong_relation(&e.lts);
        validate_strong(&e.lts, &rel).unwrap();
    }

    #[test]
    fn different_branching() {
        let e = explore(
            &[
                parse_term("a.(b.0 + c.0)").unwrap(),
                parse_term("a.b.0 + a.c.0").unwrap(),
            ],
            100,
        )
        .unwrap();
        assert!(!strongly_bisimilar(&e.lts, e.lts.roots()[0], e.lts.roots()[1]));
    }
}
