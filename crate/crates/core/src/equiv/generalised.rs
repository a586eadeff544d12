//! The generalised reactive relation, computed in synchronous rounds so
//! that every removed entry remembers the round and the clause that broke
//! it. Triples are only consulted after time-outs.

use std::collections::HashMap;

use crate::encoding::Reactive;
use crate::lts::{Label, LabelId, Lts, StateId};

use super::reactive::Entry;
use super::relation::BitMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GenClause {
    /// An action or tau step without a semi-branching match.
    Step { label: LabelId, target: StateId },
    /// A time-out taken while the environment allows `env`.
    Timeout { env: usize, target: StateId },
    /// The mover is stable, the other side cannot reach a stable state.
    Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct GenRemoval {
    pub round: u32,
    pub mover: StateId,
    pub clause: GenClause,
}

#[derive(Debug, Clone)]
pub(crate) struct GenResult {
    pub pairs: BitMatrix,
    pub triples: Vec<BitMatrix>,
    /// Keyed by both orientations of every removed entry.
    pub removals: HashMap<Entry, GenRemoval>,
}

impl GenResult {
    pub fn contains(&self, e: Entry) -> bool {
        match e {
            Entry::Pair(p, q) => self.pairs.get(p, q),
            Entry::Triple(p, x, q) => self.triples[x].get(p, q),
        }
    }
}

struct Ctx<'a> {
    lts: &'a Lts,
    r: &'a Reactive,
    closures: Vec<Vec<StateId>>,
    reach_stable: Vec<bool>,
}

impl Ctx<'_> {
    fn allowed(&self, l: LabelId, x: usize) -> bool {
        self.r.bit(l).is_some_and(|b| x & (1 << b) != 0)
    }

    fn timeout_matched(&self, triples: &[BitMatrix], q: StateId, y: usize, p2: StateId) -> bool {
        self.closures[q].iter().any(|&q1| {
            self.lts
                .successors_by(q1, Lts::TIMEOUT)
                .any(|q2| triples[y].get(p2, q2))
        })
    }

    fn pair_failure(&self, pairs: &BitMatrix, triples: &[BitMatrix], p: StateId, q: StateId) -> Option<GenClause> {
        let lts = self.lts;
        for &(l, p2) in lts.successors(p) {
            match lts.label(l) {
                Label::Tau | Label::Visible(_) => {
                    let ok = self.closures[q].iter().any(|&q1| {
                        pairs.get(p, q1)
                            && ((l == Lts::TAU && pairs.get(p2, q1))
                                || lts.successors_by(q1, l).any(|q2| pairs.get(p2, q2)))
                    });
                    if !ok {
                        return Some(GenClause::Step { label: l, target: p2 });
                    }
                }
                Label::Timeout => {
                    for x in 0..self.r.num_subsets() {
                        if self.r.deadend(p, x) && !self.timeout_matched(triples, q, x, p2) {
                            return Some(GenClause::Timeout { env: x, target: p2 });
                        }
                    }
                }
                _ => {}
            }
        }
        (lts.is_stable(p) && !self.reach_stable[q]).then_some(GenClause::Stability)
    }

    fn triple_failure(
        &self,
        pairs: &BitMatrix,
        triples: &[BitMatrix],
        p: StateId,
        x: usize,
        q: StateId,
    ) -> Option<GenClause> {
        let lts = self.lts;
        let tx = &triples[x];
        let dead = self.r.deadend(p, x);
        for &(l, p2) in lts.successors(p) {
            match lts.label(l) {
                Label::Tau => {
                    let ok = self.closures[q].iter().any(|&q1| {
                        tx.get(p, q1) && (tx.get(p2, q1) || lts.tau_successors(q1).any(|q2| tx.get(p2, q2)))
                    });
                    if !ok {
                        return Some(GenClause::Step { label: l, target: p2 });
                    }
                }
                Label::Visible(_) if dead || self.allowed(l, x) => {
                    let ok = self.closures[q]
                        .iter()
                        .any(|&q1| tx.get(p, q1) && lts.successors_by(q1, l).any(|q2| pairs.get(p2, q2)));
                    if !ok {
                        return Some(GenClause::Step { label: l, target: p2 });
                    }
                }
                Label::Timeout => {
                    for y in 0..self.r.num_subsets() {
                        if self.r.deadend(p, x | y) && !self.timeout_matched(triples, q, y, p2) {
                            return Some(GenClause::Timeout { env: y, target: p2 });
                        }
                    }
                }
                _ => {}
            }
        }
        (lts.is_stable(p) && !self.reach_stable[q]).then_some(GenClause::Stability)
    }
}

/// Greatest generalised reactive bisimulation by synchronous rounds: the
/// entries surviving round `k` are those whose clauses hold with respect
/// to the survivors of round `k - 1`.
pub(crate) fn generalised_relation(lts: &Lts, r: &Reactive) -> GenResult {
    let n = lts.num_states();
    let k = r.num_subsets();
    let ctx = Ctx {
        lts,
        r,
        closures: lts.tau_closures(),
        reach_stable: super::relation::can_reach_stable(lts),
    };
    let mut pairs = BitMatrix::full(n);
    let mut triples = vec![BitMatrix::full(n); k];
    let mut removals = HashMap::new();
    let mut round = 0;
    loop {
        round += 1;
        let mut next_pairs = pairs.clone();
        let mut next_triples = triples.clone();
        let mut changed = false;
        let mut record = |e: Entry, mirror: Entry, mover: StateId, clause: GenClause| {
            let rm = GenRemoval { round, mover, clause };
            removals.insert(e, rm);
            removals.insert(mirror, rm);
        };
        for p in 0..n {
            for q in p..n {
                if !pairs.get(p, q) {
                    continue;
                }
                let failure = ctx
                    .pair_failure(&pairs, &triples, p, q)
                    .map(|c| (p, c))
                    .or_else(|| ctx.pair_failure(&pairs, &triples, q, p).map(|c| (q, c)));
                if let Some((mover, clause)) = failure {
                    next_pairs.set_sym(p, q, false);
                    record(Entry::Pair(p, q), Entry::Pair(q, p), mover, clause);
                    changed = true;
                }
            }
        }
        for x in 0..k {
            for p in 0..n {
                for q in p..n {
                    if !triples[x].get(p, q) {
                        continue;
                    }
                    let failure = ctx
                        .triple_failure(&pairs, &triples, p, x, q)
                        .map(|c| (p, c))
                        .or_else(|| ctx.triple_failure(&pairs, &triples, q, x, p).map(|c| (q, c)));
                    if let Some((mover, clause)) = failure {
                        next_triples[x].set_sym(p, q, false);
                        record(Entry::Triple(p, x, q), Entry::Triple(q, x, p), mover, clause);
                        changed = true;
                    }
                }
            }
        }
        pairs = next_pairs;
        triples = next_triples;
        if !changed {
            return GenResult {
                pairs,
                triples,
                removals,
            };
        }
    }
}

/// A rooted clause that fails for the mover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RootedFailure {
    pub mover: StateId,
    /// Step label, or `Lts::TIMEOUT` together with the environment.
    pub label: LabelId,
    pub env: Option<usize>,
    pub target: StateId,
}

/// First failing rooted clause for `e`, checked in both directions
/// against the unrooted relation `base`. `None` means the entry belongs
/// to the rooted relation.
pub(crate) fn rooted_failure(lts: &Lts, r: &Reactive, base: &GenResult, e: Entry) -> Option<RootedFailure> {
    let one_way = |e: Entry| -> Option<RootedFailure> {
        let (p, q, x) = match e {
            Entry::Pair(p, q) => (p, q, None),
            Entry::Triple(p, x, q) => (p, q, Some(x)),
        };
        for &(l, p2) in lts.successors(p) {
            let fail = |label: LabelId, env: Option<usize>| RootedFailure {
                mover: p,
                label,
                env,
                target: p2,
            };
            match (lts.label(l), x) {
                (Label::Tau, None) | (Label::Visible(_), None) => {
                    if !lts.successors_by(q, l).any(|q2| base.pairs.get(p2, q2)) {
                        return Some(fail(l, None));
                    }
                }
                (Label::Tau, Some(x)) => {
                    if !lts.tau_successors(q).any(|q2| base.triples[x].get(p2, q2)) {
                        return Some(fail(l, None));
                    }
                }
                (Label::Visible(_), Some(x)) => {
                    let enabled = r.deadend(p, x) || r.bit(l).is_some_and(|b| x & (1 << b) != 0);
                    if enabled && !lts.successors_by(q, l).any(|q2| base.pairs.get(p2, q2)) {
                        return Some(fail(l, None));
                    }
                }
                (Label::Timeout, x) => {
                    let own = x.unwrap_or(0);
                    for y in 0..r.num_subsets() {
                        if r.deadend(p, own | y)
                            && !lts
                                .successors_by(q, Lts::TIMEOUT)
                                .any(|q2| base.triples[y].get(p2, q2))
                        {
                            return Some(fail(Lts::TIMEOUT, Some(y)));
                        }
                    }
                }
                _ => {}
            }
        }
        None
    };
    let mirror = match e {
        Entry::Pair(p, q) => Entry::Pair(q, p),
        Entry::Triple(p, x, q) => Entry::Triple(q, x, p),
    };
    one_way(e).or_else(|| one_way(mirror))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::reactive::{reactive_relation, rooted_local};
    use crate::semantics::explore;
    use crate::term::parse_term;

    fn agree(a: &str, b: &str) {
        let (ta, tb) = (parse_term(a).unwrap(), parse_term(b).unwrap());
        let universe = ta.alphabet().union(&tb.alphabet());
        let e = explore(&[ta, tb], 1000).unwrap();
        let r = Reactive::new(&e.lts, &universe, 12).unwrap();
        let direct = reactive_relation(&e.lts, &r);
        let gen = generalised_relation(&e.lts, &r);
        assert_eq!(direct.pairs, gen.pairs, "{a} vs {b}");
        assert_eq!(direct.triples, gen.triples, "{a} vs {b}");
        let (s, t) = (e.lts.roots()[0], e.lts.roots()[1]);
        let rooted = rooted_local(&e.lts, &r, &direct, s, t);
        assert_eq!(rooted.pair, rooted_failure(&e.lts, &r, &gen, Entry::Pair(s, t)).is_none());
    }

    #[test]
    fn agrees_with_direct_fixpoint() {
        agree("a.0 + t.a.0", "a.0");
        agree("a.t.b.0", "a.t.t.b.0");
        agree("tau.a.0 + t.b.0", "tau.a.0");
        agree("a.0 + t.b.0", "a.0 + t.c.0");
        agree("t.(a.0 + tau.b.0)", "t.(a.0 + b.0)");
        agree("b.0 + t.(a.0 + tau.b.0)", "b.0 + t.(a.0 + b.0)");
        agree("tau.(a.0 + t.b.0) + a.0", "a.0 + t.b.0");
    }

    #[test]
    fn rounds_are_recorded() {
        let e = explore(&[parse_term("a.b.0").unwrap(), parse_term("a.c.0").unwrap()], 100).unwrap();
        let universe = crate::term::EnvSet::from_names(["a", "b", "c"]);
        let r = Reactive::new(&e.lts, &universe, 12).unwrap();
        let gen = generalised_relation(&e.lts, &r);
        let (s, t) = (e.lts.roots()[0], e.lts.roots()[1]);
        let rm = gen.removals[&Entry::Pair(s, t)];
        assert_eq!(rm.round, 2);
        assert!(!gen.contains(Entry::Pair(s, t)));
    }
}
