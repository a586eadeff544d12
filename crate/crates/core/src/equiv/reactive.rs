//! Direct fixpoint for the reactive relation over pairs `(P,Q)` and
//! triples `(P,X,Q)`, its rooted version, and literal clause checkers.

use std::collections::HashMap;
use std::fmt;

use crate::encoding::Reactive;
use crate::lts::{Label, LabelId, Lts, StateId};

use super::relation::{can_reach_stable, BitMatrix, Marks, RelationStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Entry {
    Pair(StateId, StateId),
    /// `(P, X, Q)` with `X` given by its universe mask.
    Triple(StateId, usize, StateId),
}

/// A violated clause, with the offending move of the mover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Clause {
    /// Action or tau step of a pair not matched.
    PairStep { label: LabelId, target: StateId },
    /// A triple for some environment is missing.
    PairEnv { env: usize },
    TripleTau { target: StateId },
    TripleAction { label: LabelId, target: StateId },
    /// Idling side cannot reach a state related in the triggered sense.
    TripleIdle,
    TripleTimeout { target: StateId },
    Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Removal {
    pub sweep: u32,
    pub mover: StateId,
    pub clause: Clause,
}

impl Removal {
    pub fn describe(&self, lts: &Lts, reactive: &Reactive) -> String {
        let m = self.mover;
        let label = |l: LabelId| lts.label(l).spelling();
        let what = match self.clause {
            Clause::PairStep { label: l, target } => {
                format!("{m} -{}-> {target} is not matched", label(l))
            }
            Clause::PairEnv { env } => {
                format!("the triple for environment {} is not related", reactive.subset(env))
            }
            Clause::TripleTau { target } => format!("{m} -tau-> {target} is not matched"),
            Clause::TripleAction { label: l, target } => {
                format!("allowed step {m} -{}-> {target} is not matched", label(l))
            }
            Clause::TripleIdle => format!("{m} idles but the other side cannot reach a related state"),
            Clause::TripleTimeout { target } => format!("time-out {m} -t-> {target} is not matched"),
            Clause::Stability => format!("{m} is stable but the other side cannot reach a stable state"),
        };
        format!("sweep {}: {what}", self.sweep)
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Pair(p, q) => write!(f, "({p}, {q})"),
            Entry::Triple(p, x, q) => write!(f, "({p}, #{x}, {q})"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ReactiveResult {
    pub pairs: BitMatrix,
    pub triples: Vec<BitMatrix>,
    pub removals: HashMap<Entry, Removal>,
}

impl ReactiveResult {
    pub fn store(&self, reactive: &Reactive) -> RelationStore {
        RelationStore::new(
            self.pairs.clone(),
            (0..reactive.num_subsets()).map(|m| reactive.subset(m)).collect(),
            self.triples.clone(),
        )
    }
}

fn is_step_label(lts: &Lts, l: LabelId) -> bool {
    matches!(lts.label(l), Label::Tau | Label::Visible(_))
}

struct Direct<'a> {
    lts: &'a Lts,
    r: &'a Reactive,
    closures: Vec<Vec<StateId>>,
    marks: Marks,
    buf: Vec<StateId>,
}

impl Direct<'_> {
    fn pair_failure(&mut self, rel: &ReactiveResult, p: StateId, q: StateId) -> Option<Clause> {
        if let Some(env) = (0..self.r.num_subsets()).find(|&y| !rel.triples[y].get(p, q)) {
            return Some(Clause::PairEnv { env });
        }
        let lts = self.lts;
        let moves = lts.successors(p);
        if moves.is_empty() {
            return None;
        }
        self.marks.closure(lts, q, |s| rel.pairs.get(p, s), &mut self.buf);
        for &(l, p2) in moves {
            if !is_step_label(lts, l) {
                continue;
            }
            let ok = self.buf.iter().any(|&q1| {
                (l == Lts::TAU && rel.pairs.get(p2, q1))
                    || lts.successors_by(q1, l).any(|q2| rel.pairs.get(p2, q2))
            });
            if !ok {
                return Some(Clause::PairStep { label: l, target: p2 });
            }
        }
        None
    }

    fn triple_failure(&mut self, rel: &ReactiveResult, p: StateId, x: usize, q: StateId) -> Option<Clause> {
        let lts = self.lts;
        let tx = &rel.triples[x];
        self.marks.closure(lts, q, |s| tx.get(p, s), &mut self.buf);
        let dead = self.r.deadend(p, x);
        for &(l, p2) in lts.successors(p) {
            match lts.label(l) {
                Label::Tau => {
                    let ok = self.buf.iter().any(|&q1| {
                        tx.get(p2, q1) || lts.tau_successors(q1).any(|q2| tx.get(p2, q2))
                    });
                    if !ok {
                        return Some(Clause::TripleTau { target: p2 });
                    }
                }
                Label::Visible(_) => {
                    let allowed = self.r.bit(l).is_some_and(|b| x & (1 << b) != 0);
                    if allowed {
                        let ok = self
                            .buf
                            .iter()
                            .any(|&q1| lts.successors_by(q1, l).any(|q2| rel.pairs.get(p2, q2)));
                        if !ok {
                            return Some(Clause::TripleAction { label: l, target: p2 });
                        }
                    }
                }
                Label::Timeout if dead => {
                    let ok = self.closures[q]
                        .iter()
                        .any(|&q1| lts.successors_by(q1, Lts::TIMEOUT).any(|q2| tx.get(p2, q2)));
                    if !ok {
                        return Some(Clause::TripleTimeout { target: p2 });
                    }
                }
                _ => {}
            }
        }
        if dead && !self.buf.iter().any(|&q0| rel.pairs.get(p, q0)) {
            return Some(Clause::TripleIdle);
        }
        None
    }
}

/// Greatest reactive bisimulation on `lts`, by iterated removal; matching
/// paths pass through states related to the mover, except for the
/// time-out and stability clauses which place no condition on them.
pub(crate) fn reactive_relation(lts: &Lts, r: &Reactive) -> ReactiveResult {
    let n = lts.num_states();
    let k = r.num_subsets();
    let mut rel = ReactiveResult {
        pairs: BitMatrix::full(n),
        triples: vec![BitMatrix::full(n); k],
        removals: HashMap::new(),
    };
    let reach_stable = can_reach_stable(lts);
    for p in 0..n {
        for q in 0..n {
            if lts.is_stable(p) && !reach_stable[q] {
                for x in 0..k {
                    rel.triples[x].set_sym(p, q, false);
                    let rm = Removal {
                        sweep: 0,
                        mover: p,
                        clause: Clause::Stability,
                    };
                    rel.removals.insert(Entry::Triple(p, x, q), rm);
                    rel.removals.insert(Entry::Triple(q, x, p), rm);
                }
            }
        }
    }
    let mut d = Direct {
        lts,
        r,
        closures: lts.tau_closures(),
        marks: Marks::new(n),
        buf: Vec::new(),
    };
    let mut sweep = 0;
    loop {
        sweep += 1;
        let mut changed = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if !rel.pairs.get(p, q) {
                    continue;
                }
                let failure = d
                    .pair_failure(&rel, p, q)
                    .map(|c| (p, c))
                    .or_else(|| d.pair_failure(&rel, q, p).map(|c| (q, c)));
                if let Some((mover, clause)) = failure {
                    rel.pairs.set_sym(p, q, false);
                    let rm = Removal { sweep, mover, clause };
                    rel.removals.insert(Entry::Pair(p, q), rm);
                    rel.removals.insert(Entry::Pair(q, p), rm);
                    changed = true;
                }
            }
        }
        for x in 0..k {
            for p in 0..n {
                for q in (p + 1)..n {
                    if !rel.triples[x].get(p, q) {
                        continue;
                    }
                    let failure = d
                        .triple_failure(&rel, p, x, q)
                        .map(|c| (p, c))
                        .or_else(|| d.triple_failure(&rel, q, x, p).map(|c| (q, c)));
                    if let Some((mover, clause)) = failure {
                        rel.triples[x].set_sym(p, q, false);
                        let rm = Removal { sweep, mover, clause };
                        rel.removals.insert(Entry::Triple(p, x, q), rm);
                        rel.removals.insert(Entry::Triple(q, x, p), rm);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

/// Rooted relation restricted to the entries of one query: the pair
/// `(p,q)` and the triples `(p,X,q)` for every `X`.
#[derive(Debug, Clone)]
pub(crate) struct RootedLocal {
    pub pair: bool,
    pub triples: Vec<bool>,
    pub removals: HashMap<Entry, Removal>,
}

impl RootedLocal {
    pub fn store(&self, n: usize, reactive: &Reactive, p: StateId, q: StateId) -> RelationStore {
        let pairs = if self.pair { vec![(p, q), (q, p)] } else { Vec::new() };
        let triples = self
            .triples
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .flat_map(|(x, _)| [(p, x, q), (q, x, p)]);
        RelationStore::from_entries(
            n,
            (0..reactive.num_subsets()).map(|m| reactive.subset(m)).collect(),
            pairs,
            triples,
        )
    }
}

pub(crate) fn rooted_local(lts: &Lts, r: &Reactive, base: &ReactiveResult, p: StateId, q: StateId) -> RootedLocal {
    let k = r.num_subsets();
    let mut local = RootedLocal {
        pair: true,
        triples: vec![true; k],
        removals: HashMap::new(),
    };
    let pair_failure = |local: &RootedLocal, p: StateId, q: StateId| -> Option<Clause> {
        if let Some(env) = (0..k).find(|&y| !local.triples[y]) {
            return Some(Clause::PairEnv { env });
        }
        lts.successors(p)
            .iter()
            .filter(|&&(l, _)| is_step_label(lts, l))
            .find(|&&(l, p2)| !lts.successors_by(q, l).any(|q2| base.pairs.get(p2, q2)))
            .map(|&(l, p2)| Clause::PairStep { label: l, target: p2 })
    };
    let triple_failure = |local: &RootedLocal, p: StateId, x: usize, q: StateId| -> Option<Clause> {
        let dead = r.deadend(p, x);
        for &(l, p2) in lts.successors(p) {
            let clause = match lts.label(l) {
                Label::Tau => (!lts.tau_successors(q).any(|q2| base.triples[x].get(p2, q2)))
                    .then_some(Clause::TripleTau { target: p2 }),
                Label::Visible(_) if r.bit(l).is_some_and(|b| x & (1 << b) != 0) => {
                    (!lts.successors_by(q, l).any(|q2| base.pairs.get(p2, q2)))
                        .then_some(Clause::TripleAction { label: l, target: p2 })
                }
                Label::Timeout if dead => (!lts
                    .successors_by(q, Lts::TIMEOUT)
                    .any(|q2| base.triples[x].get(p2, q2)))
                .then_some(Clause::TripleTimeout { target: p2 }),
                _ => None,
            };
            if clause.is_some() {
                return clause;
            }
        }
        (dead && !local.pair).then_some(Clause::TripleIdle)
    };
    let mut sweep = 0;
    loop {
        sweep += 1;
        let mut changed = false;
        if local.pair {
            let failure = pair_failure(&local, p, q)
                .map(|c| (p, c))
                .or_else(|| pair_failure(&local, q, p).map(|c| (q, c)));
            if let Some((mover, clause)) = failure {
                local.pair = false;
                local.removals.insert(Entry::Pair(p, q), Removal { sweep, mover, clause });
                changed = true;
            }
        }
        for x in 0..k {
            if !local.triples[x] {
                continue;
            }
            let failure = triple_failure(&local, p, x, q)
                .map(|c| (p, c))
                .or_else(|| triple_failure(&local, q, x, p).map(|c| (q, c)));
            if let Some((mover, clause)) = failure {
                local.triples[x] = false;
                local
                    .removals
                    .insert(Entry::Triple(p, x, q), Removal { sweep, mover, clause });
                changed = true;
            }
        }
        if !changed {
            return local;
        }
    }
}

/// Literal single-pass check of every clause for `rel`, with tau paths
/// unrestricted as in the definition.
pub(crate) fn validate_reactive(lts: &Lts, r: &Reactive, rel: &RelationStore) -> Result<(), String> {
    if !rel.is_symmetric() {
        return Err("relation is not symmetric".into());
    }
    let closures = lts.tau_closures();
    let k = r.num_subsets();
    if rel.envs().len() != k {
        return Err("relation does not index every environment".into());
    }
    let fail = |e: Entry, why: String| Err(format!("{e}: {why}"));
    for (p, q) in rel.pairs() {
        for &(l, p2) in lts.successors(p) {
            if !is_step_label(lts, l) {
                continue;
            }
            let ok = closures[q].iter().any(|&q1| {
                rel.contains_pair(p, q1)
                    && ((l == Lts::TAU && rel.contains_pair(p2, q1))
                        || lts.successors_by(q1, l).any(|q2| rel.contains_pair(p2, q2)))
            });
            if !ok {
                return fail(Entry::Pair(p, q), format!("step -{}-> {p2} unmatched", lts.label(l)));
            }
        }
        if let Some(y) = (0..k).find(|&y| !rel.contains_triple(p, y, q)) {
            return fail(Entry::Pair(p, q), format!("missing triple for {}", r.subset(y)));
        }
    }
    for (p, x, q) in rel.triples() {
        let e = Entry::Triple(p, x, q);
        let dead = r.deadend(p, x);
        for &(l, p2) in lts.successors(p) {
            let ok = match lts.label(l) {
                Label::Tau => closures[q].iter().any(|&q1| {
                    rel.contains_triple(p, x, q1)
                        && (rel.contains_triple(p2, x, q1)
                            || lts.tau_successors(q1).any(|q2| rel.contains_triple(p2, x, q2)))
                }),
                Label::Visible(_) if r.bit(l).is_some_and(|b| x & (1 << b) != 0) => {
                    closures[q].iter().any(|&q1| {
                        rel.contains_triple(p, x, q1)
                            && lts.successors_by(q1, l).any(|q2| rel.contains_pair(p2, q2))
                    })
                }
                Label::Timeout if dead => closures[q].iter().any(|&q1| {
                    lts.successors_by(q1, Lts::TIMEOUT)
                        .any(|q2| rel.contains_triple(p2, x, q2))
                }),
                _ => true,
            };
            if !ok {
                return fail(e, format!("step -{}-> {p2} unmatched", lts.label(l)));
            }
        }
        if dead && !closures[q].iter().any(|&q0| rel.contains_pair(p, q0)) {
            return fail(e, "idling state has no related triggered counterpart".into());
        }
        if lts.is_stable(p) && !closures[q].iter().any(|&q0| lts.is_stable(q0)) {
            return fail(e, "stable state matched by a divergent one".into());
        }
    }
    Ok(())
}

/// Literal check of the rooted clauses for `rooted`, using `base` for the
/// unrooted relations of successors.
pub(crate) fn validate_rooted_reactive(
    lts: &Lts,
    r: &Reactive,
    rooted: &RelationStore,
    base: &RelationStore,
) -> Result<(), String> {
    if !rooted.is_symmetric() {
        return Err("relation is not symmetric".into());
    }
    let k = r.num_subsets();
    let fail = |e: Entry, why: String| Err(format!("{e}: {why}"));
    for (p, q) in rooted.pairs() {
        for &(l, p2) in lts.successors(p) {
            if is_step_label(lts, l) && !lts.successors_by(q, l).any(|q2| base.contains_pair(p2, q2)) {
                return fail(Entry::Pair(p, q), format!("step -{}-> {p2} unmatched", lts.label(l)));
            }
        }
        if let Some(y) = (0..k).find(|&y| !rooted.contains_triple(p, y, q)) {
            return fail(Entry::Pair(p, q), format!("missing triple for {}", r.subset(y)));
        }
    }
    for (p, x, q) in rooted.triples() {
        let dead = r.deadend(p, x);
        for &(l, p2) in lts.successors(p) {
            let ok = match lts.label(l) {
                Label::Tau => lts.tau_successors(q).any(|q2| base.contains_triple(p2, x, q2)),
                Label::Visible(_) if r.bit(l).is_some_and(|b| x & (1 << b) != 0) => {
                    lts.successors_by(q, l).any(|q2| base.contains_pair(p2, q2))
                }
                Label::Timeout if dead => lts
                    .successors_by(q, Lts::TIMEOUT)
                    .any(|q2| base.contains_triple(p2, x, q2)),
                _ => true,
            };
            if !ok {
                return fail(Entry::Triple(p, x, q), format!("step -{}-> {p2} unmatched", lts.label(l)));
            }
        }
        if dead && !rooted.contains_pair(p, q) {
            return fail(Entry::Triple(p, x, q), "idling state without related pair".into());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::explore;
    use crate::term::{parse_term, EnvSet};

    fn setup(a: &str, b: &str) -> (Lts, Reactive, StateId, StateId) {
        let (ta, tb) = (parse_term(a).unwrap(), parse_term(b).unwrap());
        let universe = ta.alphabet().union(&tb.alphabet());
        let e = explore(&[ta, tb], 1000).unwrap();
        let r = Reactive::new(&e.lts, &universe, 12).unwrap();
        let (s, t) = (e.lts.roots()[0], e.lts.roots()[1]);
        (e.lts, r, s, t)
    }

    #[test]
    fn timeouts_are_not_elided() {
        let (lts, r, s, t) = setup("a.t.b.0", "a.t.t.b.0");
        let rel = reactive_relation(&lts, &r);
        assert!(!rel.pairs.get(s, t));
        validate_reactive(&lts, &r, &rel.store(&r)).unwrap();
    }

    #[test]
    fn tau_elision() {
        let (lts, r, s, t) = setup("tau.a.0", "a.0");
        let rel = reactive_relation(&lts, &r);
        assert!(rel.pairs.get(s, t));
        let local = rooted_local(&lts, &r, &rel, s, t);
        assert!(!local.pair);
    }

    #[test]
    fn lazy_timeout_law_rooted() {
        let (lts, r, s, t) = setup("tau.a.0 + t.b.0", "tau.a.0");
        let rel = reactive_relation(&lts, &r);
        let local = rooted_local(&lts, &r, &rel, s, t);
        assert!(local.pair);
        let store = local.store(lts.num_states(), &r, s, t);
        validate_rooted_reactive(&lts, &r, &store, &rel.store(&r)).unwrap();
    }

    #[test]
    fn x_variant_differs_on_empty_environment() {
        let (lts, r, s, t) = setup("a.b.0", "a.c.0");
        let rel = reactive_relation(&lts, &r);
        let x = r.mask_of(&EnvSet::empty());
        assert!(!rel.triples[x].get(s, t));
    }

    #[test]
    fn double_timeout_rooted() {
        let (lts, r, s, t) = setup("t.a.0", "t.a.0 + t.a.0");
        let rel = reactive_relation(&lts, &r);
        assert!(rooted_local(&lts, &r, &rel, s, t).pair);
    }
}
