//! Abstract syntax of CCSP process expressions with time-outs and
//! environment operators, plus the syntactic operations the rest of the
//! crate builds on: free variables, validity, capture-avoiding
//! substitution, alphabets and the interning normal form.

mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

pub use parse::{parse_file, parse_term, Definitions, ParseError};
pub use print::print_definitions;

/// Identifier used for actions, variables and definition names.
pub type Name = Arc<str>;

pub(crate) const TAU_SPELLING: &str = "tau";
pub(crate) const TIMEOUT_SPELLING: &str = "t";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Visible(Name),
    Tau,
    Timeout,
}

impl Action {
    pub fn visible(name: &str) -> Action {
        Action::Visible(Arc::from(name))
    }

    pub fn is_visible(&self) -> bool {
        matches!(self, Action::Visible(_))
    }

    pub fn visible_name(&self) -> Option<&Name> {
        match self {
            Action::Visible(a) => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Visible(a) => f.write_str(a),
            Action::Tau => f.write_str(TAU_SPELLING),
            Action::Timeout => f.write_str(TIMEOUT_SPELLING),
        }
    }
}

/// A finite set of visible actions, kept in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnvSet(BTreeSet<Name>);

impl EnvSet {
    pub fn empty() -> EnvSet {
        EnvSet(BTreeSet::new())
    }

    pub fn from_names<I, S>(names: I) -> EnvSet
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        EnvSet(names.into_iter().map(|s| Arc::from(s.as_ref())).collect())
    }

    pub fn contains(&self, a: &str) -> bool {
        self.0.contains(a)
    }

    pub fn insert(&mut self, a: Name) -> bool {
        self.0.insert(a)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Name> {
        self.0.iter()
    }

    pub fn union(&self, other: &EnvSet) -> EnvSet {
        EnvSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &EnvSet) -> EnvSet {
        EnvSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &EnvSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// All subsets, ordered by the bitmask over this set's element order.
    pub fn subsets(&self) -> Vec<EnvSet> {
        let elems: Vec<&Name> = self.0.iter().collect();
        (0..1usize << elems.len())
            .map(|mask| {
                EnvSet(
                    elems
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, a)| Arc::clone(a))
                        .collect(),
                )
            })
            .collect()
    }

    /// Comma-separated spelling without braces, e.g. `a,b`.
    pub fn spelling(&self) -> String {
        let names: Vec<&str> = self.0.iter().map(|a| a.as_ref()).collect();
        names.join(",")
    }
}

impl fmt::Display for EnvSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.spelling())
    }
}

impl FromIterator<Name> for EnvSet {
    fn from_iter<I: IntoIterator<Item = Name>>(iter: I) -> Self {
        EnvSet(iter.into_iter().collect())
    }
}

/// Relational renaming: a finite set of (source, target) visible pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Renaming(BTreeSet<(Name, Name)>);

impl Renaming {
    pub fn from_pairs<I, S>(pairs: I) -> Renaming
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        Renaming(
            pairs
                .into_iter()
                .map(|(a, b)| (Arc::from(a.as_ref()), Arc::from(b.as_ref())))
                .collect(),
        )
    }

    pub fn images<'a>(&'a self, source: &'a str) -> impl Iterator<Item = &'a Name> + 'a {
        self.0
            .iter()
            .filter(move |(a, _)| a.as_ref() == source)
            .map(|(_, b)| b)
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(Name, Name)> {
        self.0.iter()
    }
}

/// A recursive specification: one equation per bound variable.
///
/// The display name is not part of the identity of a specification.
#[derive(Debug, Clone)]
pub struct RecSpec {
    pub equations: BTreeMap<Name, Term>,
    pub name: Option<Name>,
}

impl RecSpec {
    pub fn new(equations: BTreeMap<Name, Term>) -> RecSpec {
        RecSpec {
            equations,
            name: None,
        }
    }

    pub fn named(name: &str, equations: BTreeMap<Name, Term>) -> RecSpec {
        RecSpec {
            equations,
            name: Some(Arc::from(name)),
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &Name> {
        self.equations.keys()
    }

    pub fn binds(&self, x: &str) -> bool {
        self.equations.contains_key(x)
    }
}

impl PartialEq for RecSpec {
    fn eq(&self, other: &Self) -> bool {
        self.equations == other.equations
    }
}

impl Eq for RecSpec {}

impl Hash for RecSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.equations.hash(state);
    }
}

impl PartialOrd for RecSpec {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RecSpec {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.equations.cmp(&other.equations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Nil,
    Prefix(Action, Arc<Term>),
    Choice(Arc<Term>, Arc<Term>),
    Par(Arc<Term>, EnvSet, Arc<Term>),
    Abstract(EnvSet, Arc<Term>),
    Rename(Renaming, Arc<Term>),
    Theta(EnvSet, EnvSet, Arc<Term>),
    Psi(EnvSet, Arc<Term>),
    Var(Name),
    RecCall(Name, Arc<RecSpec>),
}

impl Term {
    pub fn prefix(action: Action, body: Term) -> Term {
        Term::Prefix(action, Arc::new(body))
    }

    pub fn act(name: &str, body: Term) -> Term {
        Term::prefix(Action::visible(name), body)
    }

    pub fn tau(body: Term) -> Term {
        Term::prefix(Action::Tau, body)
    }

    pub fn timeout(body: Term) -> Term {
        Term::prefix(Action::Timeout, body)
    }

    pub fn choice(left: Term, right: Term) -> Term {
        Term::Choice(Arc::new(left), Arc::new(right))
    }

    /// n-ary sum as a right comb; the empty sum is `0`.
    pub fn sum<I: IntoIterator<Item = Term>>(terms: I) -> Term {
        let mut items: Vec<Term> = terms.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Term::Nil;
        };
        while let Some(t) = items.pop() {
            acc = Term::choice(t, acc);
        }
        acc
    }

    pub fn par(left: Term, sync: EnvSet, right: Term) -> Term {
        Term::Par(Arc::new(left), sync, Arc::new(right))
    }

    pub fn hide(hidden: EnvSet, body: Term) -> Term {
        Term::Abstract(hidden, Arc::new(body))
    }

    pub fn rename(renaming: Renaming, body: Term) -> Term {
        Term::Rename(renaming, Arc::new(body))
    }

    pub fn theta(lower: EnvSet, upper: EnvSet, body: Term) -> Term {
        Term::Theta(lower, upper, Arc::new(body))
    }

    /// `theta_X`, i.e. lower = upper = X.
    pub fn theta_x(env: EnvSet, body: Term) -> Term {
        Term::Theta(env.clone(), env, Arc::new(body))
    }

    pub fn psi(env: EnvSet, body: Term) -> Term {
        Term::Psi(env, Arc::new(body))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    pub fn rec_call(var: &str, spec: Arc<RecSpec>) -> Term {
        Term::RecCall(Arc::from(var), spec)
    }

    /// Summands of a (possibly nested) choice, with `0` summands kept.
    pub fn summands(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Term::Choice(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
                other => out.push(other),
            }
        }
        out
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn substitute(&self, sub: &Substitution) -> Term {
        if sub.is_empty() {
            return self.clone();
        }
        subst(self, sub)
    }

    /// `<E|S>`: every variable of `spec` is replaced by its recursive call.
    pub fn close_with(&self, spec: &Arc<RecSpec>) -> Term {
        let sub: Substitution = spec
            .variables()
            .map(|y| (Arc::clone(y), Term::RecCall(Arc::clone(y), Arc::clone(spec))))
            .collect();
        self.substitute(&sub)
    }

    /// Visible actions the term or any derivative can perform: all prefix
    /// actions and all rename targets.
    pub fn alphabet(&self) -> EnvSet {
        let mut out = EnvSet::empty();
        collect_alphabet(self, &mut out);
        out
    }

    /// Flatten, sort and drop `0` summands of every choice (outside of
    /// recursive specifications). Preserves strong bisimilarity.
    pub fn normalize(&self) -> Term {
        match self {
            Term::Nil | Term::Var(_) | Term::RecCall(..) => self.clone(),
            Term::Prefix(a, b) => Term::prefix(a.clone(), b.normalize()),
            Term::Choice(..) => {
                let mut parts: Vec<Term> = Vec::new();
                for s in self.summands() {
                    let n = s.normalize();
                    match n {
                        Term::Nil => {}
                        Term::Choice(..) => parts.extend(n.summands().into_iter().cloned()),
                        other => parts.push(other),
                    }
                }
                parts.sort();
                Term::sum(parts)
            }
            Term::Par(l, s, r) => Term::par(l.normalize(), s.clone(), r.normalize()),
            Term::Abstract(i, b) => Term::hide(i.clone(), b.normalize()),
            Term::Rename(r, b) => Term::rename(r.clone(), b.normalize()),
            Term::Theta(l, u, b) => Term::theta(l.clone(), u.clone(), b.normalize()),
            Term::Psi(x, b) => Term::psi(x.clone(), b.normalize()),
        }
    }

    /// Check the validity condition on environment operators and the
    /// well-formedness of `theta` bounds.
    pub fn validate(&self) -> Result<Validity, ValidationError> {
        let mut scopes = Vec::new();
        let mut path = Vec::new();
        check_valid(self, &mut scopes, &mut path)?;
        Ok(Validity {
            closed: self.is_closed(),
        })
    }

    /// Every recursive specification in the term is well-guarded: no
    /// abstraction operator occurs in it and its unguarded variable
    /// dependencies are acyclic (guards are visible actions and `t`).
    pub fn is_guarded(&self) -> bool {
        let mut ok = true;
        visit_specs(self, &mut |spec| {
            if ok && !spec_well_guarded(spec) {
                ok = false;
            }
        });
        ok
    }
}

/// Result of a successful validity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Validity {
    /// Closed valid terms are processes.
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid expression at {}: {reason}", .path.join("/"))]
pub struct ValidationError {
    pub path: Vec<String>,
    pub reason: String,
}

/// Simultaneous capture-avoiding substitution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<Name, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn single(var: &str, term: Term) -> Substitution {
        let mut s = Substitution::new();
        s.insert(Arc::from(var), term);
        s
    }

    pub fn insert(&mut self, var: Name, term: Term) {
        self.0.insert(var, term);
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.0.iter()
    }

    fn without<'a, I: IntoIterator<Item = &'a Name>>(&self, vars: I) -> Substitution {
        let mut out = self.clone();
        for v in vars {
            out.0.remove(v);
        }
        out
    }

    fn range_free_vars(&self) -> BTreeSet<Name> {
        self.0.values().flat_map(|t| t.free_vars()).collect()
    }
}

impl FromIterator<(Name, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Name, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Nil => {}
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(Arc::clone(x));
            }
        }
        Term::Prefix(_, b)
        | Term::Abstract(_, b)
        | Term::Rename(_, b)
        | Term::Theta(_, _, b)
        | Term::Psi(_, b) => collect_free(b, bound, out),
        Term::Choice(l, r) | Term::Par(l, _, r) => {
            collect_free(l, bound, out);
            collect_free(r, bound, out);
        }
        Term::RecCall(_, spec) => {
            let before = bound.len();
            bound.extend(spec.variables().cloned());
            for body in spec.equations.values() {
                collect_free(body, bound, out);
            }
            bound.truncate(before);
        }
    }
}

fn subst(t: &Term, sub: &Substitution) -> Term {
    match t {
        Term::Nil => Term::Nil,
        Term::Var(x) => sub.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Prefix(a, b) => Term::prefix(a.clone(), subst(b, sub)),
        Term::Choice(l, r) => Term::choice(subst(l, sub), subst(r, sub)),
        Term::Par(l, s, r) => Term::par(subst(l, sub), s.clone(), subst(r, sub)),
        Term::Abstract(i, b) => Term::hide(i.clone(), subst(b, sub)),
        Term::Rename(r, b) => Term::rename(r.clone(), subst(b, sub)),
        Term::Theta(l, u, b) => Term::theta(l.clone(), u.clone(), subst(b, sub)),
        Term::Psi(x, b) => Term::psi(x.clone(), subst(b, sub)),
        Term::RecCall(y, spec) => {
            let inner = sub.without(spec.variables());
            let spec_free = t.free_vars();
            let inner: Substitution = inner
                .iter()
                .filter(|(v, _)| spec_free.contains(*v))
                .map(|(v, e)| (Arc::clone(v), e.clone()))
                .collect();
            if inner.is_empty() {
                return t.clone();
            }
            let incoming = inner.range_free_vars();
            let clashes: Vec<Name> = spec
                .variables()
                .filter(|v| incoming.contains(*v))
                .cloned()
                .collect();
            let (y, spec) = if clashes.is_empty() {
                (Arc::clone(y), Arc::clone(spec))
            } else {
                let mut taken: BTreeSet<Name> = incoming;
                taken.extend(spec.variables().cloned());
                taken.extend(spec_free.iter().cloned());
                collect_all_names(t, &mut taken);
                let mut renaming = Substitution::new();
                let mut renamed = BTreeMap::new();
                for v in spec.variables() {
                    let fresh = if clashes.contains(v) {
                        let f = fresh_name(v, &taken);
                        taken.insert(Arc::clone(&f));
                        f
                    } else {
                        Arc::clone(v)
                    };
                    renaming.insert(Arc::clone(v), Term::Var(Arc::clone(&fresh)));
                    renamed.insert(Arc::clone(v), fresh);
                }
                let equations = spec
                    .equations
                    .iter()
                    .map(|(v, body)| (Arc::clone(&renamed[v]), subst(body, &renaming)))
                    .collect();
                (Arc::clone(&renamed[y]), Arc::new(RecSpec::new(equations)))
            };
            let equations = spec
                .equations
                .iter()
                .map(|(v, body)| (Arc::clone(v), subst(body, &inner)))
                .collect();
            Term::RecCall(y, Arc::new(RecSpec::new(equations)))
        }
    }
}

fn collect_all_names(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Nil => {}
        Term::Var(x) => {
            out.insert(Arc::clone(x));
        }
        Term::Prefix(_, b)
        | Term::Abstract(_, b)
        | Term::Rename(_, b)
        | Term::Theta(_, _, b)
        | Term::Psi(_, b) => collect_all_names(b, out),
        Term::Choice(l, r) | Term::Par(l, _, r) => {
            collect_all_names(l, out);
            collect_all_names(r, out);
        }
        Term::RecCall(y, spec) => {
            out.insert(Arc::clone(y));
            for (v, body) in &spec.equations {
                out.insert(Arc::clone(v));
                collect_all_names(body, out);
            }
        }
    }
}

fn fresh_name(base: &str, taken: &BTreeSet<Name>) -> Name {
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|cand| !taken.contains(cand.as_str()))
        .map(|s| Arc::from(s.as_str()))
        .expect("unbounded supply of names")
}

fn collect_alphabet(t: &Term, out: &mut EnvSet) {
    let mut seen_specs: Vec<*const RecSpec> = Vec::new();
    collect_alphabet_inner(t, out, &mut seen_specs);
}

fn collect_alphabet_inner(t: &Term, out: &mut EnvSet, seen: &mut Vec<*const RecSpec>) {
    match t {
        Term::Nil | Term::Var(_) => {}
        Term::Prefix(a, b) => {
            if let Action::Visible(n) = a {
                out.insert(Arc::clone(n));
            }
            collect_alphabet_inner(b, out, seen);
        }
        Term::Choice(l, r) | Term::Par(l, _, r) => {
            collect_alphabet_inner(l, out, seen);
            collect_alphabet_inner(r, out, seen);
        }
        Term::Rename(ren, b) => {
            for (_, target) in ren.pairs() {
                out.insert(Arc::clone(target));
            }
            collect_alphabet_inner(b, out, seen);
        }
        Term::Abstract(_, b) | Term::Theta(_, _, b) | Term::Psi(_, b) => {
            collect_alphabet_inner(b, out, seen)
        }
        Term::RecCall(_, spec) => {
            let ptr = Arc::as_ptr(spec);
            if seen.contains(&ptr) {
                return;
            }
            seen.push(ptr);
            for body in spec.equations.values() {
                collect_alphabet_inner(body, out, seen);
            }
        }
    }
}

enum Scope<'a> {
    Spec(&'a RecSpec),
    EnvOperator,
}

fn check_valid<'a>(
    t: &'a Term,
    scopes: &mut Vec<Scope<'a>>,
    path: &mut Vec<String>,
) -> Result<(), ValidationError> {
    let fail = |path: &Vec<String>, reason: String| {
        Err(ValidationError {
            path: path.clone(),
            reason,
        })
    };
    match t {
        Term::Nil => Ok(()),
        Term::Var(x) => {
            let mut crossed_env_op = false;
            for scope in scopes.iter().rev() {
                match scope {
                    Scope::EnvOperator => crossed_env_op = true,
                    Scope::Spec(spec) if spec.binds(x) => {
                        if crossed_env_op {
                            return fail(
                                path,
                                format!(
                                    "variable `{x}` is free under an environment operator but bound in the expression"
                                ),
                            );
                        }
                        return Ok(());
                    }
                    Scope::Spec(_) => {}
                }
            }
            Ok(())
        }
        Term::Prefix(a, b) => with_step(path, format!("{a}."), |p| check_valid(b, scopes, p)),
        Term::Choice(l, r) => {
            with_step(path, "+L".into(), |p| check_valid(l, scopes, p))?;
            with_step(path, "+R".into(), |p| check_valid(r, scopes, p))
        }
        Term::Par(l, _, r) => {
            with_step(path, "||L".into(), |p| check_valid(l, scopes, p))?;
            with_step(path, "||R".into(), |p| check_valid(r, scopes, p))
        }
        Term::Abstract(_, b) => with_step(path, "tau{}".into(), |p| check_valid(b, scopes, p)),
        Term::Rename(_, b) => with_step(path, "ren{}".into(), |p| check_valid(b, scopes, p)),
        Term::Theta(l, u, b) => {
            path.push("theta".into());
            if !l.is_subset(u) {
                let r = fail(path, format!("theta lower bound {l} is not a subset of {u}"));
                path.pop();
                return r;
            }
            scopes.push(Scope::EnvOperator);
            let r = check_valid(b, scopes, path);
            scopes.pop();
            path.pop();
            r
        }
        Term::Psi(_, b) => {
            path.push("psi".into());
            scopes.push(Scope::EnvOperator);
            let r = check_valid(b, scopes, path);
            scopes.pop();
            path.pop();
            r
        }
        Term::RecCall(y, spec) => {
            path.push(format!("<{y}|..>"));
            if !spec.binds(y) {
                let r = fail(path, format!("`{y}` has no equation in its specification"));
                path.pop();
                return r;
            }
            scopes.push(Scope::Spec(spec));
            let mut r = Ok(());
            for (v, body) in &spec.equations {
                path.push(format!("{v}="));
                r = check_valid(body, scopes, path);
                path.pop();
                if r.is_err() {
                    break;
                }
            }
            scopes.pop();
            path.pop();
            r
        }
    }
}

fn with_step<R>(path: &mut Vec<String>, step: String, f: impl FnOnce(&mut Vec<String>) -> R) -> R {
    path.push(step);
    let r = f(path);
    path.pop();
    r
}

fn visit_specs(t: &Term, f: &mut impl FnMut(&RecSpec)) {
    match t {
        Term::Nil | Term::Var(_) => {}
        Term::Prefix(_, b)
        | Term::Abstract(_, b)
        | Term::Rename(_, b)
        | Term::Theta(_, _, b)
        | Term::Psi(_, b) => visit_specs(b, f),
        Term::Choice(l, r) | Term::Par(l, _, r) => {
            visit_specs(l, f);
            visit_specs(r, f);
        }
        Term::RecCall(_, spec) => {
            f(spec);
            for body in spec.equations.values() {
                visit_specs(body, f);
            }
        }
    }
}

fn contains_abstraction(t: &Term) -> bool {
    match t {
        Term::Abstract(..) => true,
        Term::Nil | Term::Var(_) => false,
        Term::Prefix(_, b) | Term::Rename(_, b) | Term::Theta(_, _, b) | Term::Psi(_, b) => {
            contains_abstraction(b)
        }
        Term::Choice(l, r) | Term::Par(l, _, r) => contains_abstraction(l) || contains_abstraction(r),
        Term::RecCall(_, spec) => spec.equations.values().any(contains_abstraction),
    }
}

/// Variables of `vars` occurring free in `t` without an enclosing visible
/// or time-out prefix.
fn unguarded_occurrences(t: &Term, vars: &BTreeSet<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Nil => {}
        Term::Var(x) => {
            if vars.contains(x) {
                out.insert(Arc::clone(x));
            }
        }
        Term::Prefix(Action::Tau, b) => unguarded_occurrences(b, vars, out),
        Term::Prefix(_, _) => {}
        Term::Abstract(_, b) | Term::Rename(_, b) | Term::Theta(_, _, b) | Term::Psi(_, b) => {
            unguarded_occurrences(b, vars, out)
        }
        Term::Choice(l, r) | Term::Par(l, _, r) => {
            unguarded_occurrences(l, vars, out);
            unguarded_occurrences(r, vars, out);
        }
        Term::RecCall(_, spec) => {
            let shadowed: BTreeSet<Name> = vars
                .iter()
                .filter(|v| !spec.binds(v))
                .cloned()
                .collect();
            for body in spec.equations.values() {
                unguarded_occurrences(body, &shadowed, out);
            }
        }
    }
}

fn spec_well_guarded(spec: &RecSpec) -> bool {
    if spec.equations.values().any(contains_abstraction) {
        return false;
    }
    let vars: BTreeSet<Name> = spec.variables().cloned().collect();
    let deps: BTreeMap<&Name, BTreeSet<Name>> = spec
        .equations
        .iter()
        .map(|(v, body)| {
            let mut out = BTreeSet::new();
            unguarded_occurrences(body, &vars, &mut out);
            (v, out)
        })
        .collect();
    // Acyclic unguarded dependencies: repeatedly strip variables whose
    // unguarded dependencies are all stripped already.
    let mut done: BTreeSet<&Name> = BTreeSet::new();
    loop {
        let before = done.len();
        for (v, ds) in &deps {
            if !done.contains(v) && ds.iter().all(|d| done.contains(d)) {
                done.insert(v);
            }
        }
        if done.len() == deps.len() {
            return true;
        }
        if done.len() == before {
            return false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> EnvSet {
        EnvSet::from_names(names)
    }

    fn spec(eqs: &[(&str, Term)]) -> Arc<RecSpec> {
        Arc::new(RecSpec::new(
            eqs.iter()
                .map(|(v, t)| (Arc::from(*v), t.clone()))
                .collect(),
        ))
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(Term::var("x").free_vars(), [Arc::from("x")].into());
        let s = spec(&[("x", Term::act("a", Term::var("x")))]);
        assert!(Term::rec_call("x", s).free_vars().is_empty());
        let inner = spec(&[(
            "y",
            Term::choice(Term::var("x"), Term::act("a", Term::var("y"))),
        )]);
        let t = Term::choice(Term::var("x"), Term::rec_call("y", inner));
        assert_eq!(t.free_vars(), [Arc::from("x")].into());
    }

    #[test]
    fn validate_examples() {
        let ok = Term::act("a", Term::Nil).validate().unwrap();
        assert!(ok.closed);
        let bad = Term::rec_call(
            "x",
            spec(&[("x", Term::theta_x(set(&["a"]), Term::var("x")))]),
        );
        let err = bad.validate().unwrap_err();
        assert!(err.path.iter().any(|s| s == "theta"));
        let fine = Term::theta_x(set(&["a"]), Term::act("a", Term::Nil));
        assert!(fine.validate().unwrap().closed);
    }

    #[test]
    fn validate_allows_spec_bound_inside_theta() {
        let inner = Term::rec_call("z", spec(&[("z", Term::act("a", Term::var("z")))]));
        let t = Term::theta_x(set(&["a"]), inner);
        assert!(t.validate().unwrap().closed);
    }

    #[test]
    fn validate_rejects_bad_theta_bounds() {
        let t = Term::theta(set(&["a", "b"]), set(&["a"]), Term::Nil);
        assert!(t.validate().is_err());
    }

    #[test]
    fn open_term_is_valid_but_not_closed() {
        let v = Term::act("a", Term::var("x")).validate().unwrap();
        assert!(!v.closed);
    }

    #[test]
    fn substitute_examples() {
        let t = Term::act("a", Term::var("x"));
        let s = Substitution::single("x", Term::act("b", Term::Nil));
        assert_eq!(t.substitute(&s), Term::act("a", Term::act("b", Term::Nil)));
        assert_eq!(Term::var("x").substitute(&Substitution::new()), Term::var("x"));

        let y = spec(&[(
            "y",
            Term::choice(Term::var("x"), Term::act("a", Term::var("y"))),
        )]);
        let got = Term::rec_call("y", y).substitute(&s);
        let want = Term::rec_call(
            "y",
            spec(&[(
                "y",
                Term::choice(Term::act("b", Term::Nil), Term::act("a", Term::var("y"))),
            )]),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn substitute_does_not_touch_bound_variables() {
        let s = spec(&[("x", Term::act("a", Term::var("x")))]);
        let t = Term::rec_call("x", s);
        let sub = Substitution::single("x", Term::Nil);
        assert_eq!(t.substitute(&sub), t);
    }

    #[test]
    fn substitute_freshens_on_capture() {
        // <y | y = x + a.y>[x := y] must not capture the incoming y.
        let s = spec(&[(
            "y",
            Term::choice(Term::var("x"), Term::act("a", Term::var("y"))),
        )]);
        let t = Term::rec_call("y", s);
        let got = t.substitute(&Substitution::single("x", Term::var("y")));
        assert_eq!(got.free_vars(), [Arc::from("y")].into());
        let Term::RecCall(v, spec) = &got else {
            panic!("expected a recursive call")
        };
        assert_ne!(v.as_ref(), "y");
        assert!(spec.binds(v));
    }

    #[test]
    fn alphabet_examples() {
        let t = Term::choice(Term::act("a", Term::Nil), Term::timeout(Term::act("b", Term::Nil)));
        assert_eq!(t.alphabet(), set(&["a", "b"]));
        assert_eq!(Term::Nil.alphabet(), EnvSet::empty());
        let r = Term::rename(Renaming::from_pairs([("a", "c")]), Term::act("a", Term::Nil));
        assert_eq!(r.alphabet(), set(&["a", "c"]));
    }

    #[test]
    fn normalize_sorts_and_drops_nil() {
        let a = Term::act("a", Term::Nil);
        let b = Term::act("b", Term::Nil);
        let t = Term::choice(Term::choice(b.clone(), Term::Nil), a.clone());
        assert_eq!(t.normalize(), Term::choice(a.clone(), b.clone()));
        assert_eq!(Term::choice(Term::Nil, Term::Nil).normalize(), Term::Nil);
        // idempotence is not applied
        let aa = Term::choice(a.clone(), a.clone());
        assert_eq!(aa.normalize(), aa);
    }

    #[test]
    fn guardedness() {
        let g = Term::rec_call("x", spec(&[("x", Term::act("a", Term::var("x")))]));
        assert!(g.is_guarded());
        let t = Term::rec_call("x", spec(&[("x", Term::timeout(Term::var("x")))]));
        assert!(t.is_guarded());
        let tau = Term::rec_call("x", spec(&[("x", Term::tau(Term::var("x")))]));
        assert!(!tau.is_guarded());
        let chain = Term::rec_call(
            "x",
            spec(&[("x", Term::var("y")), ("y", Term::act("a", Term::var("x")))]),
        );
        assert!(chain.is_guarded());
        let cyc = Term::rec_call("x", spec(&[("x", Term::var("y")), ("y", Term::var("x"))]));
        assert!(!cyc.is_guarded());
        let hidden = Term::rec_call(
            "x",
            spec(&[("x", Term::hide(set(&["a"]), Term::act("a", Term::var("x"))))]),
        );
        assert!(!hidden.is_guarded());
    }

    #[test]
    fn subsets_are_ordered_by_mask() {
        let subs = set(&["a", "b"]).subsets();
        assert_eq!(
            subs,
            vec![EnvSet::empty(), set(&["a"]), set(&["b"]), set(&["a", "b"])]
        );
    }
}
