//! Stability-respecting branching bisimilarity and its rooted version,
//! over all labels of an LTS (encoded LTSs included).

use std::collections::HashMap;

use crate::lts::{LabelId, Lts, StateId};

use super::relation::{can_reach_stable, BitMatrix, Marks};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BranchingClause {
    /// A step of the mover has no branching match.
    Step { label: LabelId, target: StateId },
    /// The mover is stable, the other side cannot reach a stable state.
    Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct BranchingRemoval {
    pub sweep: u32,
    pub mover: StateId,
    pub clause: BranchingClause,
}

#[derive(Debug, Clone)]
pub(crate) struct BranchingResult {
    pub relation: BitMatrix,
    pub removals: HashMap<(StateId, StateId), BranchingRemoval>,
}

/// Greatest stability-respecting branching bisimulation, by iterated
/// removal from the full relation. Matching paths only pass through
/// states currently related to the mover.
pub(crate) fn sr_branching_relation(lts: &Lts) -> BranchingResult {
    let n = lts.num_states();
    let reach_stable = can_reach_stable(lts);
    let mut rel = BitMatrix::full(n);
    let mut removals = HashMap::new();
    let mut marks = Marks::new(n);
    let mut buf = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if lts.is_stable(p) && !reach_stable[q] {
                rel.set_sym(p, q, false);
                let r = BranchingRemoval {
                    sweep: 0,
                    mover: p,
                    clause: BranchingClause::Stability,
                };
                removals.insert((p, q), r);
                removals.insert((q, p), r);
            }
        }
    }
    let mut sweep = 0;
    loop {
        sweep += 1;
        let mut changed = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if !rel.get(p, q) {
                    continue;
                }
                let failure = first_unmatched(lts, &rel, p, q, &mut marks, &mut buf)
                    .map(|c| (p, c))
                    .or_else(|| first_unmatched(lts, &rel, q, p, &mut marks, &mut buf).map(|c| (q, c)));
                if let Some((mover, clause)) = failure {
                    rel.set_sym(p, q, false);
                    let r = BranchingRemoval {
                        sweep,
                        mover,
                        clause,
                    };
                    removals.insert((p, q), r);
                    removals.insert((q, p), r);
                    changed = true;
                }
            }
        }
        if !changed {
            return BranchingResult {
                relation: rel,
                removals,
            };
        }
    }
}

/// First step of `p` that `q` cannot mimic in a branching manner.
fn first_unmatched(
    lts: &Lts,
    rel: &BitMatrix,
    p: StateId,
    q: StateId,
    marks: &mut Marks,
    buf: &mut Vec<StateId>,
) -> Option<BranchingClause> {
    let moves = lts.successors(p);
    if moves.is_empty() {
        return None;
    }
    marks.closure(lts, q, |s| rel.get(p, s), buf);
    for &(l, p2) in moves {
        let ok = buf.iter().any(|&q1| {
            (l == Lts::TAU && rel.get(p2, q1)) || lts.successors_by(q1, l).any(|q2| rel.get(p2, q2))
        });
        if !ok {
            return Some(BranchingClause::Step {
                label: l,
                target: p2,
            });
        }
    }
    None
}

/// Rooted matching: every first step is matched by the same step into
/// the unrooted relation `base`.
pub(crate) fn rooted_mismatch(lts: &Lts, base: &BitMatrix, s: StateId, t: StateId) -> Option<(StateId, LabelId, StateId)> {
    let one_way = |p: StateId, q: StateId| {
        lts.successors(p)
            .iter()
            .find(|&&(l, p2)| !lts.successors_by(q, l).any(|q2| base.get(p2, q2)))
            .map(|&(l, p2)| (p, l, p2))
    };
    one_way(s, t).or_else(|| one_way(t, s))
}

/// Literal single-pass check of the stability-respecting branching
/// bisimulation clauses for `rel`, with unrestricted tau paths.
pub(crate) fn validate_sr_branching(lts: &Lts, rel: &BitMatrix) -> Result<(), String> {
    let closures = lts.tau_closures();
    for (p, q) in rel.ones() {
        if !rel.get(q, p) {
            return Err(format!("relation is not symmetric at ({p}, {q})"));
        }
        for &(l, p2) in lts.successors(p) {
            let ok = closures[q].iter().any(|&q1| {
                rel.get(p, q1)
                    && ((l == Lts::TAU && rel.get(p2, q1))
                        || lts.successors_by(q1, l).any(|q2| rel.get(p2, q2)))
            });
            if !ok {
                return Err(format!(
                    "({p}, {q}): {p} -{}-> {p2} has no branching match",
                    lts.label(l)
                ));
            }
        }
        if lts.is_stable(p) && !closures[q].iter().any(|&q0| lts.is_stable(q0)) {
            return Err(format!("({p}, {q}): {p} is stable but {q} cannot reach a stable state"));
        }
    }
    Ok(())
}

/// Literal check of the rooted clauses for the entries of `rooted`, with
/// `base` standing for the unrooted equivalence.
pub(crate) fn validate_rooted_branching(
    lts: &Lts,
    rooted: &BitMatrix,
    base: &BitMatrix,
) -> Result<(), String> {
    for (p, q) in rooted.ones() {
        if !rooted.get(q, p) {
            return Err(format!("relation is not symmetric at ({p}, {q})"));
        }
        if let Some((m, l, m2)) = rooted_mismatch(lts, base, p, q) {
            return Err(format!(
                "({p}, {q}): {m} -{}-> {m2} has no strong first-step match",
                lts.label(l)
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::explore;
    use crate::term::parse_term;

    fn pair(a: &str, b: &str) -> (Lts, StateId, StateId) {
        let e = explore(&[parse_term(a).unwrap(), parse_term(b).unwrap()], 1000).unwrap();
        let (s, t) = (e.lts.roots()[0], e.lts.roots()[1]);
        (e.lts, s, t)
    }

    #[test]
    fn tau_is_elided() {
        let (lts, s, t) = pair("tau.a.0", "a.0");
        let r = sr_branching_relation(&lts);
        assert!(r.relation.get(s, t));
        validate_sr_branching(&lts, &r.relation).unwrap();
        assert!(rooted_mismatch(&lts, &r.relation, s, t).is_some());
    }

    #[test]
    fn choice_breaks_elision() {
        let (lts, s, t) = pair("a.0 + b.0", "tau.a.0 + b.0");
        let r = sr_branching_relation(&lts);
        assert!(!r.relation.get(s, t));
        assert!(r.removals.contains_key(&(s, t)));
    }

    #[test]
    fn branching_axiom_instance() {
        let (lts, s, t) = pair("c.(tau.(a.0 + b.0) + a.0)", "c.(a.0 + b.0)");
        let r = sr_branching_relation(&lts);
        assert!(rooted_mismatch(&lts, &r.relation, s, t).is_none());
    }

    #[test]
    fn stability_is_respected() {
        let d = crate::term::parse_file("spec S { x = tau.x } def P = <x|S>; def Q = 0;").unwrap();
        let e = explore(&[d.get("P").unwrap().clone(), d.get("Q").unwrap().clone()], 100).unwrap();
        let r = sr_branching_relation(&e.lts);
        assert!(!r.relation.get(e.lts.roots()[0], e.lts.roots()[1]));
    }
}
