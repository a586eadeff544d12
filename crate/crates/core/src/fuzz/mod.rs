//! Seeded generators for random processes, related pairs, formulas,
//! one-hole contexts and axiom instances.

mod axioms;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::modal::Formula;
use crate::semantics::explore;
use crate::term::{Action, EnvSet, Name, RecSpec, Renaming, Term};

pub use axioms::{check_instance, fuzz_axioms, Axiom, AxiomOutcome, AxiomReport, Counterexample, Instance, InstanceResult};

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Maximal nesting depth of generated terms.
    pub depth: usize,
    pub alphabet: Vec<Name>,
    /// Parallel composition, abstraction, renaming, `theta` and `psi`.
    pub operators: bool,
    pub recursion: bool,
    /// Exploration budget a generated process must fit in.
    pub max_states: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            depth: 4,
            alphabet: vec![Arc::from("a"), Arc::from("b")],
            operators: true,
            recursion: true,
            max_states: 2000,
        }
    }
}

#[derive(Clone, Copy)]
enum Shape {
    Nil,
    Prefix,
    Choice,
    Par,
    Hide,
    Rename,
    Theta,
    Psi,
    Rec,
}

pub struct Gen {
    rng: ChaCha8Rng,
    config: GenConfig,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen::with_config(seed, GenConfig::default())
    }

    pub fn with_config(seed: u64, config: GenConfig) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            config,
        }
    }

    pub fn config(&self) -> &GenConfig {
        &self.config
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn visible(&mut self) -> Action {
        let a = self.config.alphabet.choose(&mut self.rng).expect("nonempty alphabet");
        Action::Visible(Arc::clone(a))
    }

    /// Any action: visible, `tau` or `t`.
    pub fn action(&mut self) -> Action {
        match self.rng.gen_range(0..4) {
            0 => Action::Tau,
            1 => Action::Timeout,
            _ => self.visible(),
        }
    }

    /// A visible action or `tau`.
    pub fn step_action(&mut self) -> Action {
        if self.rng.gen_bool(0.3) {
            Action::Tau
        } else {
            self.visible()
        }
    }

    /// A visible action or `t`.
    pub fn guard_action(&mut self) -> Action {
        if self.rng.gen_bool(0.3) {
            Action::Timeout
        } else {
            self.visible()
        }
    }

    pub fn env(&mut self) -> EnvSet {
        let names: Vec<Name> = self
            .config
            .alphabet
            .clone()
            .into_iter()
            .filter(|_| self.rng.gen_bool(0.5))
            .collect();
        names.into_iter().collect()
    }

    /// `(L, U)` with `L` a subset of `U`.
    pub fn env_bounds(&mut self) -> (EnvSet, EnvSet) {
        let upper = self.env();
        let lower: EnvSet = upper.iter().filter(|_| self.rng.gen_bool(0.5)).cloned().collect();
        (lower, upper)
    }

    pub fn renaming(&mut self) -> Renaming {
        let alphabet = self.config.alphabet.clone();
        let mut pairs = Vec::new();
        for a in &alphabet {
            for b in &alphabet {
                if self.rng.gen_bool(0.45) {
                    pairs.push((a.to_string(), b.to_string()));
                }
            }
        }
        if pairs.is_empty() {
            let a = alphabet.choose(&mut self.rng).expect("nonempty alphabet");
            let b = alphabet.choose(&mut self.rng).expect("nonempty alphabet");
            pairs.push((a.to_string(), b.to_string()));
        }
        Renaming::from_pairs(pairs)
    }

    /// A random closed process with the configured depth and operators.
    pub fn term(&mut self) -> Term {
        let depth = self.config.depth;
        self.term_at(depth)
    }

    /// A random process of at most `depth` that explores within budget.
    pub fn process(&mut self) -> Term {
        loop {
            let t = self.term();
            if fits(&t, self.config.max_states) {
                return t;
            }
        }
    }

    pub fn term_at(&mut self, depth: usize) -> Term {
        let (ops, rec) = (self.config.operators, self.config.recursion);
        self.gen(depth, ops, rec)
    }

    /// Prefixes and choice only.
    pub fn basic(&mut self, depth: usize) -> Term {
        self.gen(depth, false, false)
    }

    fn shape(&mut self, ops: bool, rec: bool) -> Shape {
        let mut table = vec![(1, Shape::Nil), (9, Shape::Prefix), (5, Shape::Choice)];
        if ops {
            table.extend([
                (1, Shape::Par),
                (1, Shape::Hide),
                (1, Shape::Rename),
                (1, Shape::Theta),
                (1, Shape::Psi),
            ]);
        }
        if rec {
            table.push((1, Shape::Rec));
        }
        let total: u32 = table.iter().map(|(w, _)| w).sum();
        let mut roll = self.rng.gen_range(0..total);
        for (w, s) in table {
            if roll < w {
                return s;
            }
            roll -= w;
        }
        unreachable!("roll is below the total weight")
    }

    fn gen(&mut self, depth: usize, ops: bool, rec: bool) -> Term {
        if depth == 0 {
            return Term::Nil;
        }
        let d = depth - 1;
        match self.shape(ops, rec) {
            Shape::Nil => Term::Nil,
            Shape::Prefix => {
                let a = self.action();
                Term::prefix(a, self.gen(d, ops, rec))
            }
            Shape::Choice => {
                let l = self.gen(d, ops, rec);
                Term::choice(l, self.gen(d, ops, rec))
            }
            Shape::Par => {
                let s = self.env();
                let l = self.gen(d.min(2), ops, rec);
                Term::par(l, s, self.gen(d.min(2), ops, rec))
            }
            Shape::Hide => {
                let i = self.env();
                Term::hide(i, self.gen(d, ops, rec))
            }
            Shape::Rename => {
                let r = self.renaming();
                Term::rename(r, self.gen(d, ops, rec))
            }
            Shape::Theta => {
                let (l, u) = self.env_bounds();
                Term::theta(l, u, self.gen(d, ops, rec))
            }
            Shape::Psi => {
                let x = self.env();
                Term::psi(x, self.gen(d, ops, rec))
            }
            Shape::Rec => {
                let spec = self.rec_spec(d.max(1));
                let var = spec.variables().next().expect("spec binds a variable").to_string();
                Term::rec_call(&var, spec)
            }
        }
    }

    /// A well-guarded specification over `x` (and sometimes `y`); every
    /// variable occurrence sits below a visible or `t` prefix.
    pub fn rec_spec(&mut self, depth: usize) -> Arc<RecSpec> {
        let vars: Vec<&str> = if self.rng.gen_bool(0.4) { vec!["x", "y"] } else { vec!["x"] };
        let mut eqs = BTreeMap::new();
        for v in &vars {
            let body = self.rec_body(depth, &vars, false);
            eqs.insert(Arc::from(*v), body);
        }
        Arc::new(RecSpec::new(eqs))
    }

    fn rec_body(&mut self, depth: usize, vars: &[&str], guarded: bool) -> Term {
        if depth == 0 {
            return if guarded {
                Term::var(vars.choose(&mut self.rng).expect("nonempty"))
            } else {
                Term::Nil
            };
        }
        match self.rng.gen_range(0..10) {
            0 if guarded => Term::var(vars.choose(&mut self.rng).expect("nonempty")),
            0 | 1 => Term::Nil,
            2..=6 => {
                let a = self.action();
                let g = guarded || matches!(a, Action::Visible(_) | Action::Timeout);
                Term::prefix(a, self.rec_body(depth - 1, vars, g))
            }
            _ => {
                let l = self.rec_body(depth - 1, vars, guarded);
                Term::choice(l, self.rec_body(depth - 1, vars, guarded))
            }
        }
    }

    /// `p` after one or two random rewrites; some rewrites are sound laws,
    /// others are perturbations.
    pub fn related(&mut self, p: &Term) -> Term {
        let n = self.rng.gen_range(1..=2);
        let mut t = p.clone();
        for _ in 0..n {
            t = self.mutate(&t);
        }
        t
    }

    /// A pair of processes, mostly a process and a rewrite of it.
    pub fn pair(&mut self) -> (Term, Term) {
        loop {
            let p = self.process();
            let q = if self.rng.gen_bool(0.15) { self.term() } else { self.related(&p) };
            if fits(&q, self.config.max_states) && fits_pair(&p, &q, self.config.max_states) {
                return (p, q);
            }
        }
    }

    fn mutate(&mut self, t: &Term) -> Term {
        let descend = self.rng.gen_bool(0.55);
        match t {
            Term::Prefix(a, b) if descend => Term::prefix(a.clone(), self.mutate(b)),
            Term::Choice(l, r) if descend => {
                if self.rng.gen_bool(0.5) {
                    Term::choice(self.mutate(l), (**r).clone())
                } else {
                    Term::choice((**l).clone(), self.mutate(r))
                }
            }
            Term::Par(l, s, r) if descend => {
                if self.rng.gen_bool(0.5) {
                    Term::par(self.mutate(l), s.clone(), (**r).clone())
                } else {
                    Term::par((**l).clone(), s.clone(), self.mutate(r))
                }
            }
            Term::Abstract(i, b) if descend => Term::hide(i.clone(), self.mutate(b)),
            Term::Rename(r, b) if descend => Term::rename(r.clone(), self.mutate(b)),
            Term::Theta(l, u, b) if descend => Term::theta(l.clone(), u.clone(), self.mutate(b)),
            Term::Psi(x, b) if descend => Term::psi(x.clone(), self.mutate(b)),
            _ => self.rewrite(t),
        }
    }

    fn rewrite(&mut self, t: &Term) -> Term {
        let t = t.clone();
        match self.rng.gen_range(0..11) {
            0 => Term::choice(t.clone(), t),
            1 => Term::choice(t, Term::Nil),
            2 => match &t {
                Term::Choice(l, r) => Term::choice((**r).clone(), (**l).clone()),
                _ => Term::choice(Term::Nil, t),
            },
            3 => match &t {
                Term::Prefix(a, b) => Term::prefix(a.clone(), Term::tau((**b).clone())),
                _ => Term::tau(t),
            },
            4 => match &t {
                Term::Prefix(a, b) if b.summands().len() >= 2 => {
                    let x = b.summands()[0].clone();
                    Term::prefix(a.clone(), Term::choice(Term::tau((**b).clone()), x))
                }
                _ => Term::choice(Term::tau(t.clone()), t),
            },
            5 => {
                let r = self.basic(2);
                Term::choice(t, Term::timeout(r))
            }
            6 => match &t {
                Term::Choice(l, r) => {
                    if self.rng.gen_bool(0.5) {
                        (**l).clone()
                    } else {
                        (**r).clone()
                    }
                }
                _ => Term::Nil,
            },
            7 => match &t {
                Term::Prefix(_, b) => {
                    let a = self.action();
                    Term::prefix(a, (**b).clone())
                }
                _ => {
                    let a = self.action();
                    Term::prefix(a, t)
                }
            },
            8 => Term::timeout(t),
            9 => match &t {
                Term::Prefix(Action::Timeout, b) => Term::timeout(Term::timeout((**b).clone())),
                _ => Term::choice(t, Term::tau(Term::Nil)),
            },
            _ => self.basic(2),
        }
    }

    /// A conjunction-nesting formula of the unrooted subclass.
    pub fn lbc(&mut self, depth: usize) -> Formula {
        if depth == 0 {
            return if self.rng.gen_bool(0.2) {
                Formula::can_stabilise()
            } else {
                Formula::Top
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..13) {
            0 => Formula::Top,
            1 | 2 => Formula::Not(Box::new(self.lbc(d))),
            3 | 4 => Formula::And(vec![self.lbc(d), self.lbc(d)]),
            5..=8 => {
                let first = self.lbc(d);
                let a = self.step_action();
                let second = self.lbc(d);
                Formula::eps(Formula::And(vec![first, Formula::hat(a, second)]))
            }
            9..=11 => {
                let x = self.env();
                Formula::eps(Formula::env_diamond(x, self.lbc(d)))
            }
            _ => Formula::can_stabilise(),
        }
    }

    /// A formula of the rooted subclass with unrooted bodies.
    pub fn lbcr(&mut self, depth: usize) -> Formula {
        if depth == 0 {
            return Formula::Top;
        }
        let d = depth - 1;
        match self.rng.gen_range(0..10) {
            0 => Formula::Top,
            1 | 2 => Formula::Not(Box::new(self.lbcr(d))),
            3 | 4 => Formula::And(vec![self.lbcr(d), self.lbcr(d)]),
            5..=7 => {
                let a = self.step_action();
                Formula::diamond(a, self.lbc(d))
            }
            _ => {
                let x = self.env();
                Formula::env_diamond(x, self.lbc(d))
            }
        }
    }

    /// A context of `layers` nested operators around the hole.
    pub fn context(&mut self, layers: usize) -> Context {
        let mut c = Context::Hole;
        for _ in 0..layers {
            c = self.wrap(c);
        }
        c
    }

    fn wrap(&mut self, inner: Context) -> Context {
        let inner = Box::new(inner);
        match self.rng.gen_range(0..11) {
            0 => Context::Prefix(self.action(), inner),
            1 => Context::ChoiceL(inner, self.basic(2)),
            2 => Context::ChoiceR(self.basic(2), inner),
            3 => {
                let s = self.env();
                Context::ParL(inner, s, self.basic(2))
            }
            4 => {
                let s = self.env();
                Context::ParR(self.basic(2), s, inner)
            }
            5 => Context::Hide(self.env(), inner),
            6 => Context::Rename(self.renaming(), inner),
            7 => {
                let (l, u) = self.env_bounds();
                Context::Theta(l, u, inner)
            }
            8 => Context::Psi(self.env(), inner),
            9 => Context::Rec(self.guard_action(), inner),
            _ => Context::ChoiceL(inner, Term::tau(self.basic(1))),
        }
    }
}

/// A term with exactly one hole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Context {
    Hole,
    Prefix(Action, Box<Context>),
    ChoiceL(Box<Context>, Term),
    ChoiceR(Term, Box<Context>),
    ParL(Box<Context>, EnvSet, Term),
    ParR(Term, EnvSet, Box<Context>),
    Hide(EnvSet, Box<Context>),
    Rename(Renaming, Box<Context>),
    Theta(EnvSet, EnvSet, Box<Context>),
    Psi(EnvSet, Box<Context>),
    /// `<x | x = alpha.x + []>`.
    Rec(Action, Box<Context>),
}

impl Context {
    pub fn plug(&self, t: &Term) -> Term {
        match self {
            Context::Hole => t.clone(),
            Context::Prefix(a, c) => Term::prefix(a.clone(), c.plug(t)),
            Context::ChoiceL(c, r) => Term::choice(c.plug(t), r.clone()),
            Context::ChoiceR(l, c) => Term::choice(l.clone(), c.plug(t)),
            Context::ParL(c, s, r) => Term::par(c.plug(t), s.clone(), r.clone()),
            Context::ParR(l, s, c) => Term::par(l.clone(), s.clone(), c.plug(t)),
            Context::Hide(i, c) => Term::hide(i.clone(), c.plug(t)),
            Context::Rename(r, c) => Term::rename(r.clone(), c.plug(t)),
            Context::Theta(l, u, c) => Term::theta(l.clone(), u.clone(), c.plug(t)),
            Context::Psi(x, c) => Term::psi(x.clone(), c.plug(t)),
            Context::Rec(a, c) => {
                let body = Term::choice(Term::prefix(a.clone(), Term::var("x")), c.plug(t));
                let spec = RecSpec::new(BTreeMap::from([(Arc::from("x"), body)]));
                Term::rec_call("x", Arc::new(spec))
            }
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.plug(&Term::var("HOLE")))
    }
}

fn fits(t: &Term, max_states: usize) -> bool {
    t.validate().is_ok() && t.is_guarded() && explore(std::slice::from_ref(t), max_states).is_ok()
}

fn fits_pair(p: &Term, q: &Term, max_states: usize) -> bool {
    explore(&[p.clone(), q.clone()], max_states).is_ok()
}

/// `count` pairs from a fixed seed.
pub fn corpus(seed: u64, count: usize) -> Vec<(Term, Term)> {
    let mut g = Gen::new(seed);
    (0..count).map(|_| g.pair()).collect()
}

/// `count` processes whose reachable state space is free of tau cycles.
pub fn strongly_guarded_processes(seed: u64, count: usize) -> Vec<Term> {
    let mut g = Gen::new(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let t = g.process();
        if explore(std::slice::from_ref(&t), g.config.max_states).is_ok_and(|e| e.strongly_guarded) {
            out.push(t);
        }
    }
    out
}
