//! Equivalence checking: strong and stability-respecting branching
//! bisimilarity on plain LTSs, and the reactive relations on processes,
//! decided either through the environment encoding or directly on pairs
//! and triples.

mod branching;
pub(crate) mod generalised;
pub(crate) mod reactive;
mod quotient;
mod relation;
mod strong;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::encoding::{encode, Encoded, EncodingError, EncState, Reactive, DEFAULT_MAX_ALPHABET};
use crate::lts::{Lts, QuotientError, StateId};
use crate::semantics::{explore, Exploration, SemanticsError, DEFAULT_MAX_STATES};
use crate::term::{EnvSet, Term};

pub use quotient::{brb_quotient, quotient_verdict, BrbQuotient};
pub use relation::RelationStore;

pub(crate) use branching::{sr_branching_relation, BranchingResult};
pub(crate) use reactive::{reactive_relation, rooted_local, Entry, ReactiveResult};
pub(crate) use relation::BitMatrix;

#[derive(Debug, Error)]
pub enum EquivError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("encode and direct methods disagree on {entry}: encode says {encode}, direct says {direct}")]
    Disagreement {
        entry: String,
        encode: bool,
        direct: bool,
    },
    #[error("witness failed validation: {0}")]
    InvalidWitness(String),
    #[error("state {0} has no triggered copy in the encoded system")]
    Unreachable(StateId),
    #[error("relation {0} needs an environment set")]
    MissingEnv(Relation),
    #[error("quotients are only built for strongly guarded processes")]
    NotStronglyGuarded,
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Method {
    Encode,
    Direct,
    #[default]
    Both,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Encode => "encode",
            Method::Direct => "direct",
            Method::Both => "both",
        }
    }

    fn uses_encode(self) -> bool {
        matches!(self, Method::Encode | Method::Both)
    }

    fn uses_direct(self) -> bool {
        matches!(self, Method::Direct | Method::Both)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Method, String> {
        match s {
            "encode" => Ok(Method::Encode),
            "direct" => Ok(Method::Direct),
            "both" => Ok(Method::Both),
            _ => Err(format!("unknown method `{s}` (expected encode, direct or both)")),
        }
    }
}

/// The relations the checker can decide between two processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Brb,
    Rbrb,
    BrbX,
    RbrbX,
    Strong,
    Srbb,
    Rsrbb,
}

impl Relation {
    pub const ALL: [Relation; 7] = [
        Relation::Brb,
        Relation::Rbrb,
        Relation::BrbX,
        Relation::RbrbX,
        Relation::Strong,
        Relation::Srbb,
        Relation::Rsrbb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Relation::Brb => "brb",
            Relation::Rbrb => "rbrb",
            Relation::BrbX => "brb-x",
            Relation::RbrbX => "rbrb-x",
            Relation::Strong => "strong",
            Relation::Srbb => "srbb",
            Relation::Rsrbb => "rsrbb",
        }
    }

    pub fn needs_env(self) -> bool {
        matches!(self, Relation::BrbX | Relation::RbrbX)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Relation, String> {
        Relation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown relation `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub method: Method,
    pub max_states: usize,
    pub max_alphabet: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            method: Method::Both,
            max_states: DEFAULT_MAX_STATES,
            max_alphabet: DEFAULT_MAX_ALPHABET,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub equivalent: bool,
    pub method: String,
    /// A relation containing the queried entry, when equivalent.
    pub witness: Option<RelationStore>,
    /// Why the queried entry was removed, one line per method.
    pub removal_trace: Vec<String>,
    /// States of the system the check ran on.
    pub states: usize,
}

impl Verdict {
    pub fn witness_size(&self) -> Option<usize> {
        self.witness.as_ref().map(RelationStore::len)
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            equivalent: bool,
            method: &'a str,
            witness_size: Option<usize>,
            #[serde(skip_serializing_if = "<[String]>::is_empty")]
            removal_trace: &'a [String],
        }
        Doc {
            equivalent: self.equivalent,
            method: &self.method,
            witness_size: self.witness_size(),
            removal_trace: &self.removal_trace,
        }
        .serialize(s)
    }
}

fn plain_verdict(lts: &Lts, method: &str, rel: BitMatrix, equivalent: bool, trace: Option<String>) -> Verdict {
    Verdict {
        equivalent,
        method: method.into(),
        witness: equivalent.then(|| RelationStore::pairs_only(rel)),
        removal_trace: trace.into_iter().collect(),
        states: lts.num_states(),
    }
}

/// Strong bisimilarity of two states; every label counts.
pub fn strong(lts: &Lts, s: StateId, t: StateId) -> Result<Verdict, EquivError> {
    let rel = strong::strong_relation(lts);
    let eq = rel.get(s, t);
    if eq {
        strong::validate_strong(lts, &rel).map_err(EquivError::InvalidWitness)?;
    }
    let trace = (!eq).then(|| format!("({s}, {t}) are in different strong classes"));
    Ok(plain_verdict(lts, "strong", rel, eq, trace))
}

fn describe_branching(lts: &Lts, r: &BranchingResult, s: StateId, t: StateId) -> Option<String> {
    let rm = r.removals.get(&(s, t))?;
    Some(match rm.clause {
        branching::BranchingClause::Step { label, target } => format!(
            "sweep {}: {} -{}-> {target} is not matched",
            rm.sweep,
            rm.mover,
            lts.label(label)
        ),
        branching::BranchingClause::Stability => format!(
            "sweep {}: {} is stable but the other side cannot reach a stable state",
            rm.sweep, rm.mover
        ),
    })
}

/// Stability-respecting branching bisimilarity of two states.
pub fn sr_branching(lts: &Lts, s: StateId, t: StateId) -> Result<Verdict, EquivError> {
    let r = sr_branching_relation(lts);
    let eq = r.relation.get(s, t);
    if eq {
        branching::validate_sr_branching(lts, &r.relation).map_err(EquivError::InvalidWitness)?;
    }
    let trace = describe_branching(lts, &r, s, t);
    Ok(plain_verdict(lts, "srbb", r.relation, eq, trace))
}

/// Rooted stability-respecting branching bisimilarity of two states.
pub fn r_sr_branching(lts: &Lts, s: StateId, t: StateId) -> Result<Verdict, EquivError> {
    let r = sr_branching_relation(lts);
    Ok(rooted_branching_verdict(lts, &r, s, t, "rsrbb"))
}

fn rooted_branching_verdict(lts: &Lts, r: &BranchingResult, s: StateId, t: StateId, method: &str) -> Verdict {
    let mismatch = branching::rooted_mismatch(lts, &r.relation, s, t);
    let mut rooted = BitMatrix::empty(lts.num_states());
    if mismatch.is_none() {
        rooted.set_sym(s, t, true);
    }
    let trace = mismatch.map(|(m, l, m2)| format!("first step {m} -{}-> {m2} is not matched strongly", lts.label(l)));
    plain_verdict(lts, method, rooted, mismatch.is_none(), trace)
}

struct EncodedCheck {
    enc: Encoded,
    rel: BranchingResult,
}

/// Reactive relations between states of one base LTS, computed once for
/// all queries. The encoding is built from the roots of the base LTS, so
/// only states reachable from them can be queried through it.
pub struct ReactiveChecker {
    base: Lts,
    reactive: Reactive,
    method: Method,
    direct: Option<ReactiveResult>,
    encoded: Option<EncodedCheck>,
}

impl ReactiveChecker {
    pub fn new(base: &Lts, universe: &EnvSet, method: Method, max_alphabet: usize) -> Result<ReactiveChecker, EquivError> {
        let reactive = Reactive::new(base, universe, max_alphabet)?;
        let direct = method.uses_direct().then(|| reactive_relation(base, &reactive));
        let encoded = if method.uses_encode() {
            let enc = encode(base, universe, max_alphabet)?;
            let rel = sr_branching_relation(&enc.lts);
            Some(EncodedCheck { enc, rel })
        } else {
            None
        };
        let checker = ReactiveChecker {
            base: base.clone(),
            reactive,
            method,
            direct,
            encoded,
        };
        if method == Method::Both {
            checker.cross_check()?;
        }
        Ok(checker)
    }

    /// Build from a pair of processes explored together.
    pub fn for_terms(p: &Term, q: &Term, opts: &CheckOptions) -> Result<(ReactiveChecker, Exploration), EquivError> {
        let universe = p.alphabet().union(&q.alphabet());
        let e = explore(&[p.clone(), q.clone()], opts.max_states)?;
        let checker = ReactiveChecker::new(&e.lts, &universe, opts.method, opts.max_alphabet)?;
        Ok((checker, e))
    }

    fn cross_check(&self) -> Result<(), EquivError> {
        let (Some(d), Some(e)) = (&self.direct, &self.encoded) else {
            return Ok(());
        };
        let states = &e.enc.states;
        for (i, &si) in states.iter().enumerate() {
            for (j, &sj) in states.iter().enumerate().skip(i) {
                let (entry, direct) = match (si, sj) {
                    (EncState::Triggered(p), EncState::Triggered(q)) => (Entry::Pair(p, q), d.pairs.get(p, q)),
                    (EncState::Allowing(x, p), EncState::Allowing(y, q)) if x == y => {
                        (Entry::Triple(p, x, q), d.triples[x].get(p, q))
                    }
                    _ => continue,
                };
                let encode = e.rel.relation.get(i, j);
                if encode != direct {
                    return Err(EquivError::Disagreement {
                        entry: entry.to_string(),
                        encode,
                        direct,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &Lts {
        &self.base
    }

    pub fn reactive(&self) -> &Reactive {
        &self.reactive
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn universe(&self) -> &EnvSet {
        &self.reactive.universe
    }

    /// The encoded system, when the encode path is in use.
    pub fn encoded(&self) -> Option<&Encoded> {
        self.encoded.as_ref().map(|e| &e.enc)
    }

    fn enc_state(&self, s: EncState) -> Result<StateId, EquivError> {
        let e = self.encoded.as_ref().expect("encode path is active");
        e.enc.state(s).ok_or(EquivError::Unreachable(s.inner()))
    }

    /// `(p, X, q)` for `x = None`, `(p, q)` otherwise.
    fn entry(&self, s: StateId, x: Option<&EnvSet>, t: StateId) -> Entry {
        match x {
            None => Entry::Pair(s, t),
            Some(x) => Entry::Triple(s, self.reactive.mask_of(x), t),
        }
    }

    fn enc_pair(&self, e: Entry) -> Result<(StateId, StateId), EquivError> {
        let (a, b) = match e {
            Entry::Pair(p, q) => (EncState::Triggered(p), EncState::Triggered(q)),
            Entry::Triple(p, x, q) => (EncState::Allowing(x, p), EncState::Allowing(x, q)),
        };
        Ok((self.enc_state(a)?, self.enc_state(b)?))
    }

    /// Unrooted membership, as a bare boolean.
    pub fn related(&self, s: StateId, x: Option<&EnvSet>, t: StateId) -> Result<bool, EquivError> {
        let e = self.entry(s, x, t);
        if let Some(d) = &self.direct {
            return Ok(match e {
                Entry::Pair(p, q) => d.pairs.get(p, q),
                Entry::Triple(p, m, q) => d.triples[m].get(p, q),
            });
        }
        let (a, b) = self.enc_pair(e)?;
        Ok(self.encoded.as_ref().expect("some method is active").rel.relation.get(a, b))
    }

    /// Rooted membership, as a bare boolean.
    pub fn rooted_related(&self, s: StateId, x: Option<&EnvSet>, t: StateId) -> Result<bool, EquivError> {
        let e = self.entry(s, x, t);
        if let Some(d) = &self.direct {
            let local = rooted_local(&self.base, &self.reactive, d, s, t);
            return Ok(match e {
                Entry::Pair(..) => local.pair,
                Entry::Triple(_, m, _) => local.triples[m],
            });
        }
        let (a, b) = self.enc_pair(e)?;
        let ec = self.encoded.as_ref().expect("some method is active");
        Ok(branching::rooted_mismatch(&ec.enc.lts, &ec.rel.relation, a, b).is_none())
    }

    /// The unrooted direct relation, when computed.
    pub fn direct_relation(&self) -> Option<RelationStore> {
        self.direct.as_ref().map(|d| d.store(&self.reactive))
    }

    /// Unrooted verdict with witness and removal trace.
    pub fn verdict(&self, s: StateId, x: Option<&EnvSet>, t: StateId) -> Result<Verdict, EquivError> {
        let e = self.entry(s, x, t);
        let mut answers = Vec::new();
        let mut trace = Vec::new();
        let mut witness = None;
        if let Some(d) = &self.direct {
            let store = d.store(&self.reactive);
            let eq = match e {
                Entry::Pair(p, q) => store.contains_pair(p, q),
                Entry::Triple(p, m, q) => store.contains_triple(p, m, q),
            };
            if eq {
                reactive::validate_reactive(&self.base, &self.reactive, &store).map_err(EquivError::InvalidWitness)?;
                witness = Some(store);
            } else if let Some(rm) = d.removals.get(&e) {
                trace.push(format!("direct {e}: {}", rm.describe(&self.base, &self.reactive)));
            }
            answers.push(eq);
        }
        if let Some(ec) = &self.encoded {
            let (a, b) = self.enc_pair(e)?;
            let eq = ec.rel.relation.get(a, b);
            if eq {
                branching::validate_sr_branching(&ec.enc.lts, &ec.rel.relation).map_err(EquivError::InvalidWitness)?;
                witness.get_or_insert_with(|| RelationStore::pairs_only(ec.rel.relation.clone()));
            } else if let Some(line) = describe_branching(&ec.enc.lts, &ec.rel, a, b) {
                trace.push(format!("encode ({a}, {b}): {line}"));
            }
            answers.push(eq);
        }
        self.finish(e, answers, witness, trace)
    }

    /// Rooted verdict with witness and removal trace.
    pub fn rooted_verdict(&self, s: StateId, x: Option<&EnvSet>, t: StateId) -> Result<Verdict, EquivError> {
        let e = self.entry(s, x, t);
        let mut answers = Vec::new();
        let mut trace = Vec::new();
        let mut witness = None;
        if let Some(d) = &self.direct {
            let local = rooted_local(&self.base, &self.reactive, d, s, t);
            let eq = match e {
                Entry::Pair(..) => local.pair,
                Entry::Triple(_, m, _) => local.triples[m],
            };
            if eq {
                let store = local.store(self.base.num_states(), &self.reactive, s, t);
                reactive::validate_rooted_reactive(&self.base, &self.reactive, &store, &d.store(&self.reactive))
                    .map_err(EquivError::InvalidWitness)?;
                witness = Some(store);
            } else if let Some(rm) = local.removals.get(&e).or_else(|| local.removals.get(&Entry::Pair(s, t))) {
                trace.push(format!("direct rooted {e}: {}", rm.describe(&self.base, &self.reactive)));
            }
            answers.push(eq);
        }
        if let Some(ec) = &self.encoded {
            let (a, b) = self.enc_pair(e)?;
            let v = rooted_branching_verdict(&ec.enc.lts, &ec.rel, a, b, "encode");
            if v.equivalent {
                let w = v.witness.expect("equivalent verdicts carry a witness");
                branching::validate_rooted_branching(&ec.enc.lts, &w.pairs, &ec.rel.relation)
                    .map_err(EquivError::InvalidWitness)?;
                witness.get_or_insert(w);
            } else {
                trace.extend(v.removal_trace.into_iter().map(|l| format!("encode rooted ({a}, {b}): {l}")));
            }
            answers.push(v.equivalent);
        }
        self.finish(e, answers, witness, trace)
    }

    fn finish(
        &self,
        e: Entry,
        answers: Vec<bool>,
        witness: Option<RelationStore>,
        trace: Vec<String>,
    ) -> Result<Verdict, EquivError> {
        if let [direct, encode] = answers[..] {
            if direct != encode {
                return Err(EquivError::Disagreement {
                    entry: e.to_string(),
                    encode,
                    direct,
                });
            }
        }
        let equivalent = answers[0];
        Ok(Verdict {
            equivalent,
            method: self.method.name().into(),
            witness: if equivalent { witness } else { None },
            removal_trace: if equivalent { Vec::new() } else { trace },
            states: self.base.num_states(),
        })
    }
}

fn roots(e: &Exploration) -> (StateId, StateId) {
    (e.lts.roots()[0], e.lts.roots()[1])
}

/// Concrete branching reactive bisimilarity of two processes.
pub fn brb(p: &Term, q: &Term, opts: &CheckOptions) -> Result<Verdict, EquivError> {
    let (c, e) = ReactiveChecker::for_terms(p, q, opts)?;
    let (s, t) = roots(&e);
    c.verdict(s, None, t)
}

/// The `X`-indexed variant: both processes in an environment allowing `x`.
pub fn brb_x(p: &Term, q: &Term, x: &EnvSet, opts: &CheckOptions) -> Result<Verdict, EquivError> {
    let (c, e) = ReactiveChecker::for_terms(p, q, opts)?;
    let (s, t) = roots(&e);
    c.verdict(s, Some(x), t)
}

pub fn rbrb(p: &Term, q: &Term, opts: &CheckOptions) -> Result<Verdict, EquivError> {
    let (c, e) = ReactiveChecker::for_terms(p, q, opts)?;
    let (s, t) = roots(&e);
    c.rooted_verdict(s, None, t)
}

pub fn rbrb_x(p: &Term, q: &Term, x: &EnvSet, opts: &CheckOptions) -> Result<Verdict, EquivError> {
    let (c, e) = ReactiveChecker::for_terms(p, q, opts)?;
    let (s, t) = roots(&e);
    c.rooted_verdict(s, Some(x), t)
}

/// Dispatch on a relation name; `env` is required for the `-x` variants
/// and ignored otherwise. Plain relations run on the process LTS with the
/// time-out treated as an ordinary label.
pub fn check(
    relation: Relation,
    p: &Term,
    q: &Term,
    env: Option<&EnvSet>,
    opts: &CheckOptions,
) -> Result<Verdict, EquivError> {
    let x = || env.ok_or(EquivError::MissingEnv(relation));
    match relation {
        Relation::Brb => brb(p, q, opts),
        Relation::Rbrb => rbrb(p, q, opts),
        Relation::BrbX => brb_x(p, q, x()?, opts),
        Relation::RbrbX => rbrb_x(p, q, x()?, opts),
        Relation::Strong | Relation::Srbb | Relation::Rsrbb => {
            let e = explore(&[p.clone(), q.clone()], opts.max_states)?;
            let (s, t) = roots(&e);
            match relation {
                Relation::Strong => strong(&e.lts, s, t),
                Relation::Srbb => sr_branching(&e.lts, s, t),
                _ => r_sr_branching(&e.lts, s, t),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn verdict_json_shape() {
        let v = brb(&t("a.t.b.0"), &t("a.t.t.b.0"), &CheckOptions::default()).unwrap();
        assert!(!v.equivalent);
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["equivalent"], false);
        assert_eq!(json["method"], "both");
        assert!(json["witness_size"].is_null());
        assert!(!json["removal_trace"].as_array().unwrap().is_empty());
    }

    #[test]
    fn positive_witness_contains_query() {
        let v = brb(&t("tau.a.0"), &t("a.0"), &CheckOptions::default()).unwrap();
        assert!(v.equivalent);
        assert!(v.witness_size().unwrap() > 0);
        let v = rbrb(&t("tau.a.0"), &t("a.0"), &CheckOptions::default()).unwrap();
        assert!(!v.equivalent);
    }

    #[test]
    fn methods_parse() {
        assert_eq!("direct".parse::<Method>().unwrap(), Method::Direct);
        assert_eq!("rbrb-x".parse::<Relation>().unwrap(), Relation::RbrbX);
        assert!("weak".parse::<Relation>().is_err());
    }

    #[test]
    fn x_variant_needs_env() {
        let err = check(Relation::BrbX, &t("0"), &t("0"), None, &CheckOptions::default()).unwrap_err();
        assert!(matches!(err, EquivError::MissingEnv(_)));
    }

    #[test]
    fn x_variant_empty_env() {
        let x = EnvSet::empty();
        let v = brb_x(&t("a.b.0"), &t("a.c.0"), &x, &CheckOptions::default()).unwrap();
        assert!(!v.equivalent);
        let v = brb_x(&t("a.b.0"), &t("a.b.0"), &x, &CheckOptions::default()).unwrap();
        assert!(v.equivalent);
    }
}
