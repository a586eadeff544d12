//! Distinguishing formulas read off the removal history of the
//! generalised fixpoint.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::encoding::{EncodingError, Reactive};
use crate::equiv::generalised::{generalised_relation, rooted_failure, GenClause, GenResult};
use crate::equiv::{CheckOptions, Entry, EquivError, ReactiveChecker};
use crate::lts::{Label, Lts, StateId};
use crate::semantics::{explore, SemanticsError};
use crate::term::{Action, EnvSet, Term};

use super::sat::Model;
use super::{in_subclass, EnvMode, Formula, Subclass};

#[derive(Debug, Error)]
pub enum ModalError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error("internal error while building a distinguishing formula: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Distinguished {
    #[serde(serialize_with = "as_text")]
    pub formula: Formula,
    #[serde(rename = "holds_in_P")]
    pub holds_in_p: bool,
    #[serde(rename = "holds_in_Q")]
    pub holds_in_q: bool,
    #[serde(serialize_with = "as_text")]
    pub subclass: Subclass,
}

fn as_text<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

struct Builder<'a> {
    lts: &'a Lts,
    r: &'a Reactive,
    gen: &'a GenResult,
    model: Model<'a>,
    closures: Vec<Vec<StateId>>,
    cache: HashMap<Entry, (Formula, FixedBitSet)>,
}

fn mirror(e: Entry) -> Entry {
    match e {
        Entry::Pair(p, q) => Entry::Pair(q, p),
        Entry::Triple(p, x, q) => Entry::Triple(q, x, p),
    }
}

fn sides(e: Entry) -> (StateId, StateId) {
    match e {
        Entry::Pair(p, q) | Entry::Triple(p, _, q) => (p, q),
    }
}

impl Builder<'_> {
    fn mode_of(&self, e: Entry) -> EnvMode {
        match e {
            Entry::Pair(..) => EnvMode::Triggered,
            Entry::Triple(_, x, _) => EnvMode::Allows(self.r.subset(x)),
        }
    }

    fn action(&self, label: usize) -> Action {
        match self.lts.label(label) {
            Label::Visible(a) => Action::Visible(a.clone()),
            Label::Tau => Action::Tau,
            other => unreachable!("step clause on label {other}"),
        }
    }

    fn internal<T>(&self, what: String) -> Result<T, ModalError> {
        Err(ModalError::Internal(what))
    }

    /// A formula that the left state of the removed entry `e` satisfies
    /// and the right one does not, in the mode of `e`.
    fn formula(&mut self, e: Entry) -> Result<Formula, ModalError> {
        if let Some((f, _)) = self.cache.get(&e) {
            return Ok(f.clone());
        }
        let Some(&rm) = self.gen.removals.get(&e) else {
            return self.internal(format!("entry {e} is related"));
        };
        let (p, q) = sides(e);
        let f = if rm.mover == p {
            self.construct(e, rm.round, rm.clause)?
        } else {
            self.formula(mirror(e))?.negate()
        };
        let sat = self.model.sat(&f, &self.mode_of(e));
        if !sat.contains(p) || sat.contains(q) {
            return self.internal(format!("formula {f} does not separate {e}"));
        }
        self.cache.insert(e, (f.clone(), sat));
        Ok(f)
    }

    /// Conjunction that holds wherever the conjuncts' left states do and
    /// fails at every state in `cands`. Each candidate comes with the
    /// entry whose formula excludes it.
    fn cover(&mut self, cands: Vec<(StateId, Entry)>) -> Result<Formula, ModalError> {
        let mut pool: Vec<(Entry, FixedBitSet)> = Vec::new();
        for &(_, e) in &cands {
            if pool.iter().any(|(pe, _)| *pe == e) {
                continue;
            }
            self.formula(e)?;
            pool.push((e, self.cache[&e].1.clone()));
        }
        let mut uncovered: Vec<StateId> = cands.iter().map(|&(s, _)| s).collect();
        uncovered.sort_unstable();
        uncovered.dedup();
        let mut chosen = Vec::new();
        while !uncovered.is_empty() {
            let (i, _) = pool
                .iter()
                .enumerate()
                .map(|(i, (_, sat))| (i, uncovered.iter().filter(|&&s| !sat.contains(s)).count()))
                .max_by_key(|&(i, n)| (n, std::cmp::Reverse(i)))
                .expect("candidates have formulas");
            let (e, sat) = pool.swap_remove(i);
            uncovered.retain(|&s| sat.contains(s));
            chosen.push(self.cache[&e].0.clone());
        }
        Ok(Formula::and(chosen))
    }

    fn construct(&mut self, e: Entry, round: u32, clause: GenClause) -> Result<Formula, ModalError> {
        let gen = self.gen;
        let in_prev = |e: Entry| gen.removals.get(&e).is_none_or(|r| r.round >= round);
        let (p, q) = sides(e);
        let lts = self.lts;
        let cl = self.closures[q].clone();
        match clause {
            GenClause::Stability => Ok(Formula::can_stabilise()),
            GenClause::Step { label, target: p2 } => {
                let here = |q1: StateId| match e {
                    Entry::Pair(..) => Entry::Pair(p, q1),
                    Entry::Triple(_, x, _) => Entry::Triple(p, x, q1),
                };
                let (bad, good): (Vec<StateId>, Vec<StateId>) = cl.iter().partition(|&&q1| !in_prev(here(q1)));
                let phi = self.cover(bad.iter().map(|&q1| (q1, here(q1))).collect())?;
                let next = |q2: StateId| match (e, lts.label(label)) {
                    (Entry::Triple(_, x, _), Label::Tau) => Entry::Triple(p2, x, q2),
                    _ => Entry::Pair(p2, q2),
                };
                let mut cands = Vec::new();
                for &q1 in &good {
                    if label == Lts::TAU {
                        cands.push(q1);
                    }
                    cands.extend(lts.successors_by(q1, label));
                }
                if let Some(&q2) = cands.iter().find(|&&q2| in_prev(next(q2))) {
                    return self.internal(format!("{e}: candidate {q2} matches the step"));
                }
                let phi2 = self.cover(cands.into_iter().map(|q2| (q2, next(q2))).collect())?;
                Ok(Formula::eps(Formula::And(vec![phi, Formula::hat(self.action(label), phi2)])))
            }
            GenClause::Timeout { env: y, target: p2 } => {
                let cands: Vec<StateId> = cl
                    .iter()
                    .flat_map(|&q1| lts.successors_by(q1, Lts::TIMEOUT))
                    .collect();
                if let Some(&q2) = cands.iter().find(|&&q2| in_prev(Entry::Triple(p2, y, q2))) {
                    return self.internal(format!("{e}: candidate {q2} matches the time-out"));
                }
                let phi = self.cover(cands.into_iter().map(|q2| (q2, Entry::Triple(p2, y, q2))).collect())?;
                Ok(Formula::eps(Formula::env_diamond(self.r.subset(y), phi)))
            }
        }
    }

    /// Rooted counterpart: a formula of the rooted subclass separating
    /// the sides of `e`, or `None` if the rooted clauses hold.
    fn rooted(&mut self, e: Entry) -> Result<Option<Formula>, ModalError> {
        let Some(fail) = rooted_failure(self.lts, self.r, self.gen, e) else {
            return Ok(None);
        };
        let (p, _) = sides(e);
        let (e, flip) = if fail.mover == p { (e, false) } else { (mirror(e), true) };
        let (_, q) = sides(e);
        let lts = self.lts;
        let p2 = fail.target;
        let f = match fail.env {
            Some(y) => {
                let cands = lts
                    .successors_by(q, Lts::TIMEOUT)
                    .map(|q2| (q2, Entry::Triple(p2, y, q2)))
                    .collect();
                Formula::env_diamond(self.r.subset(y), self.cover(cands)?)
            }
            None => {
                let next = |q2: StateId| match (e, lts.label(fail.label)) {
                    (Entry::Triple(_, x, _), Label::Tau) => Entry::Triple(p2, x, q2),
                    _ => Entry::Pair(p2, q2),
                };
                let cands = lts.successors_by(q, fail.label).map(|q2| (q2, next(q2))).collect();
                Formula::diamond(self.action(fail.label), self.cover(cands)?)
            }
        };
        Ok(Some(if flip { f.negate() } else { f }))
    }
}

/// Distinguishing formula for two states of one base LTS, checked in the
/// triggered mode or, with `env`, in the mode allowing `env`.
pub fn distinguish_states(
    lts: &Lts,
    universe: &EnvSet,
    s: StateId,
    t: StateId,
    rooted: bool,
    env: Option<&EnvSet>,
    max_alphabet: usize,
) -> Result<Option<Distinguished>, ModalError> {
    let r = Reactive::new(lts, universe, max_alphabet)?;
    let gen = generalised_relation(lts, &r);
    let mut b = Builder {
        lts,
        r: &r,
        gen: &gen,
        model: Model::new(lts),
        closures: lts.tau_closures(),
        cache: HashMap::new(),
    };
    let e = match env {
        None => Entry::Pair(s, t),
        Some(x) => Entry::Triple(s, r.mask_of(x), t),
    };
    let (formula, subclass) = if rooted {
        match b.rooted(e)? {
            None => return Ok(None),
            Some(f) => (f, Subclass::Lbcr),
        }
    } else {
        if gen.contains(e) {
            return Ok(None);
        }
        (b.formula(e)?, Subclass::Lbc)
    };
    let mode = match env {
        None => EnvMode::Triggered,
        Some(x) => EnvMode::Allows(x.clone()),
    };
    let sat = b.model.sat(&formula, &mode);
    let d = Distinguished {
        holds_in_p: sat.contains(s),
        holds_in_q: sat.contains(t),
        formula,
        subclass,
    };
    if d.holds_in_p == d.holds_in_q {
        return Err(ModalError::Internal(format!("formula {} does not distinguish", d.formula)));
    }
    if !in_subclass(&d.formula, subclass) {
        return Err(ModalError::Internal(format!("formula {} is not in {subclass}", d.formula)));
    }
    Ok(Some(d))
}

/// Distinguishing formula for two processes, or `None` if they are
/// related. The answer is cross-checked against the equivalence checker
/// run with `opts.method`.
pub fn distinguish(
    p: &Term,
    q: &Term,
    rooted: bool,
    env: Option<&EnvSet>,
    opts: &CheckOptions,
) -> Result<Option<Distinguished>, ModalError> {
    let universe = p.alphabet().union(&q.alphabet());
    let e = explore(&[p.clone(), q.clone()], opts.max_states)?;
    let (s, t) = (e.lts.roots()[0], e.lts.roots()[1]);
    let d = distinguish_states(&e.lts, &universe, s, t, rooted, env, opts.max_alphabet)?;
    let checker = ReactiveChecker::new(&e.lts, &universe, opts.method, opts.max_alphabet)?;
    let related = if rooted {
        checker.rooted_related(s, env, t)?
    } else {
        checker.related(s, env, t)?
    };
    if related == d.is_some() {
        return Err(ModalError::Internal(format!(
            "checker says related = {related}, formula search disagrees"
        )));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn dist(a: &str, b: &str, rooted: bool) -> Option<Distinguished> {
        distinguish(
            &parse_term(a).unwrap(),
            &parse_term(b).unwrap(),
            rooted,
            None,
            &CheckOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn elided_timeout_is_visible() {
        let d = dist("a.t.b.0", "a.t.t.b.0", false).unwrap();
        assert!(d.holds_in_p != d.holds_in_q);
        assert_eq!(d.subclass, Subclass::Lbc);
    }

    #[test]
    fn equal_processes() {
        assert!(dist("a.0 + t.b.0", "a.0 + t.b.0", false).is_none());
        assert!(dist("a.0 + t.b.0", "a.0 + t.b.0", true).is_none());
    }

    #[test]
    fn rooting_example() {
        assert!(dist("a.0", "tau.a.0", false).is_none());
        let d = dist("a.0", "tau.a.0", true).unwrap();
        assert_eq!(d.subclass, Subclass::Lbcr);
    }

    #[test]
    fn stability_formula() {
        let d = dist("tau.0", "0", false);
        assert!(d.is_none());
        let x = EnvSet::empty();
        let d = distinguish(
            &parse_term("a.b.0").unwrap(),
            &parse_term("a.c.0").unwrap(),
            false,
            Some(&x),
            &CheckOptions::default(),
        )
        .unwrap()
        .unwrap();
        assert!(d.holds_in_p && !d.holds_in_q);
    }

    #[test]
    fn json_shape() {
        let d = dist("a.0", "b.0", false).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["subclass"], "Lbc");
        assert!(v["formula"].is_string());
    }
}
