use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::equiv::{check, CheckOptions, Relation};
use crate::par::{self, Parallelism};
use crate::term::{Action, EnvSet, RecSpec, Substitution, Term};

use super::{fits, Gen};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    Assoc,
    Comm,
    Idem,
    /// The literal law `x + x = 0`, which is expected to fail.
    IdemZero,
    Zero,
    HideChoice,
    HideKept,
    HideHidden,
    RenChoice,
    RenTau,
    RenTimeout,
    RenAction,
    Expansion,
    Branching,
    Rdp,
    Rsp,
    ThetaInert,
    ThetaDrop,
    ThetaKeep,
    ThetaPrefix,
    ThetaTau,
    PsiVisible,
    PsiDrop,
    PsiKeep,
    PsiPrefix,
    PsiTimeout,
    LazyTimeout,
    ReactiveApprox,
}

const PLAIN: &[Relation] = &[Relation::Rsrbb, Relation::Rbrb];
const REACTIVE: &[Relation] = &[Relation::Rbrb];

impl Axiom {
    pub const ALL: [Axiom; 28] = [
        Axiom::Assoc,
        Axiom::Comm,
        Axiom::Idem,
        Axiom::IdemZero,
        Axiom::Zero,
        Axiom::HideChoice,
        Axiom::HideKept,
        Axiom::HideHidden,
        Axiom::RenChoice,
        Axiom::RenTau,
        Axiom::RenTimeout,
        Axiom::RenAction,
        Axiom::Expansion,
        Axiom::Branching,
        Axiom::Rdp,
        Axiom::Rsp,
        Axiom::ThetaInert,
        Axiom::ThetaDrop,
        Axiom::ThetaKeep,
        Axiom::ThetaPrefix,
        Axiom::ThetaTau,
        Axiom::PsiVisible,
        Axiom::PsiDrop,
        Axiom::PsiKeep,
        Axiom::PsiPrefix,
        Axiom::PsiTimeout,
        Axiom::LazyTimeout,
        Axiom::ReactiveApprox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Assoc => "assoc",
            Axiom::Comm => "comm",
            Axiom::Idem => "idem",
            Axiom::IdemZero => "idem-zero",
            Axiom::Zero => "zero",
            Axiom::HideChoice => "hide-choice",
            Axiom::HideKept => "hide-kept",
            Axiom::HideHidden => "hide-hidden",
            Axiom::RenChoice => "ren-choice",
            Axiom::RenTau => "ren-tau",
            Axiom::RenTimeout => "ren-timeout",
            Axiom::RenAction => "ren-action",
            Axiom::Expansion => "expansion",
            Axiom::Branching => "branching",
            Axiom::Rdp => "rdp",
            Axiom::Rsp => "rsp",
            Axiom::ThetaInert => "theta-inert",
            Axiom::ThetaDrop => "theta-drop",
            Axiom::ThetaKeep => "theta-keep",
            Axiom::ThetaPrefix => "theta-prefix",
            Axiom::ThetaTau => "theta-tau",
            Axiom::PsiVisible => "psi-visible",
            Axiom::PsiDrop => "psi-drop",
            Axiom::PsiKeep => "psi-keep",
            Axiom::PsiPrefix => "psi-prefix",
            Axiom::PsiTimeout => "psi-timeout",
            Axiom::LazyTimeout => "lazy-timeout",
            Axiom::ReactiveApprox => "reactive-approx",
        }
    }

    pub fn law(self) -> &'static str {
        match self {
            Axiom::Assoc => "x + (y + z) = (x + y) + z",
            Axiom::Comm => "x + y = y + x",
            Axiom::Idem => "x + x = x",
            Axiom::IdemZero => "x + x = 0",
            Axiom::Zero => "x + 0 = x",
            Axiom::HideChoice => "tau_I(x + y) = tau_I(x) + tau_I(y)",
            Axiom::HideKept => "tau_I(alpha.x) = alpha.tau_I(x)  if alpha not in I",
            Axiom::HideHidden => "tau_I(a.x) = tau.tau_I(x)  if a in I",
            Axiom::RenChoice => "ren(x + y) = ren(x) + ren(y)",
            Axiom::RenTau => "ren(tau.x) = tau.ren(x)",
            Axiom::RenTimeout => "ren(t.x) = t.ren(x)",
            Axiom::RenAction => "ren(a.x) = sum of b.ren(x) over (a,b) in ren",
            Axiom::Expansion => "expansion of sum_i alpha_i.x_i ||_S sum_j beta_j.y_j",
            Axiom::Branching => "alpha.(tau.(x + y) + x) = alpha.(x + y)",
            Axiom::Rdp => "<x|S> = <S_x|S>",
            Axiom::Rsp => "S(rho) implies rho(x) = <x|S>",
            Axiom::ThetaInert => "theta_L^U(sum alpha_i.x_i) = sum alpha_i.x_i  if all alpha_i not in L+tau",
            Axiom::ThetaDrop => "theta_L^U(x + alpha.y + beta.z) = theta_L^U(x + alpha.y)  if alpha in L+tau, beta not in U+tau",
            Axiom::ThetaKeep => {
                "theta_L^U(x + alpha.y + beta.z) = theta_L^U(x + alpha.y) + theta_L^U(beta.z)  if alpha in L+tau, beta in U+tau"
            }
            Axiom::ThetaPrefix => "theta_L^U(alpha.x) = alpha.x  if alpha != tau",
            Axiom::ThetaTau => "theta_L^U(tau.x) = tau.theta_L^U(x)",
            Axiom::PsiVisible => "psi_X(x + alpha.y) = psi_X(x) + alpha.y  if alpha not in X+tau+t",
            Axiom::PsiDrop => "psi_X(x + alpha.y + t.z) = psi_X(x + alpha.y)  if alpha in X+tau",
            Axiom::PsiKeep => "psi_X(x + alpha.y + beta.z) = psi_X(x + alpha.y) + beta.z  if alpha, beta in X+tau",
            Axiom::PsiPrefix => "psi_X(alpha.x) = alpha.x  if alpha != t",
            Axiom::PsiTimeout => "psi_X(sum t.y_i) = sum t.theta_X(y_i)",
            Axiom::LazyTimeout => "tau.x + t.y = tau.x",
            Axiom::ReactiveApprox => "psi_X(x) = psi_X(y) for all X implies x = y",
        }
    }

    /// Relations the law is checked against.
    pub fn relations(self) -> &'static [Relation] {
        match self {
            Axiom::Assoc
            | Axiom::Comm
            | Axiom::Idem
            | Axiom::IdemZero
            | Axiom::Zero
            | Axiom::HideChoice
            | Axiom::HideKept
            | Axiom::HideHidden
            | Axiom::RenChoice
            | Axiom::RenTau
            | Axiom::RenTimeout
            | Axiom::RenAction
            | Axiom::Expansion
            | Axiom::Branching
            | Axiom::Rdp
            | Axiom::Rsp => PLAIN,
            _ => REACTIVE,
        }
    }

    pub fn expected_to_fail(self) -> bool {
        self == Axiom::IdemZero
    }

    /// A random instance of the law.
    pub fn instance(self, g: &mut Gen) -> Instance {
        let eq = |l: Term, r: Term| Instance::Equation(l, r);
        match self {
            Axiom::Assoc => {
                let (x, y, z) = (var(g), var(g), var(g));
                eq(
                    Term::choice(x.clone(), Term::choice(y.clone(), z.clone())),
                    Term::choice(Term::choice(x, y), z),
                )
            }
            Axiom::Comm => {
                let (x, y) = (var(g), var(g));
                eq(Term::choice(x.clone(), y.clone()), Term::choice(y, x))
            }
            Axiom::Idem => {
                let x = var(g);
                eq(Term::choice(x.clone(), x.clone()), x)
            }
            Axiom::IdemZero => {
                let a = g.visible();
                let x = Term::prefix(a, var(g));
                eq(Term::choice(x.clone(), x), Term::Nil)
            }
            Axiom::Zero => {
                let x = var(g);
                eq(Term::choice(x.clone(), Term::Nil), x)
            }
            Axiom::HideChoice => {
                let (i, x, y) = (g.env(), var(g), var(g));
                eq(
                    Term::hide(i.clone(), Term::choice(x.clone(), y.clone())),
                    Term::choice(Term::hide(i.clone(), x), Term::hide(i, y)),
                )
            }
            Axiom::HideKept => {
                let i = g.env();
                let a = loop {
                    let a = g.action();
                    if !a.visible_name().is_some_and(|n| i.contains(n)) {
                        break a;
                    }
                };
                let x = var(g);
                eq(
                    Term::hide(i.clone(), Term::prefix(a.clone(), x.clone())),
                    Term::prefix(a, Term::hide(i, x)),
                )
            }
            Axiom::HideHidden => {
                let a = g.visible();
                let mut i = g.env();
                i.insert(Arc::clone(a.visible_name().expect("visible")));
                let x = var(g);
                eq(
                    Term::hide(i.clone(), Term::prefix(a, x.clone())),
                    Term::tau(Term::hide(i, x)),
                )
            }
            Axiom::RenChoice => {
                let (r, x, y) = (g.renaming(), var(g), var(g));
                eq(
                    Term::rename(r.clone(), Term::choice(x.clone(), y.clone())),
                    Term::choice(Term::rename(r.clone(), x), Term::rename(r, y)),
                )
            }
            Axiom::RenTau | Axiom::RenTimeout => {
                let a = if self == Axiom::RenTau { Action::Tau } else { Action::Timeout };
                let (r, x) = (g.renaming(), var(g));
                eq(
                    Term::rename(r.clone(), Term::prefix(a.clone(), x.clone())),
                    Term::prefix(a, Term::rename(r, x)),
                )
            }
            Axiom::RenAction => {
                let (r, x) = (g.renaming(), var(g));
                let a = g.visible();
                let name = a.visible_name().expect("visible").clone();
                let rx = Term::rename(r.clone(), x.clone());
                let rhs = Term::sum(r.images(&name).map(|b| Term::act(b, rx.clone())).collect::<Vec<_>>());
                eq(Term::rename(r, Term::prefix(a, x)), rhs)
            }
            Axiom::Expansion => expansion(g),
            Axiom::Branching => {
                let (a, x, y) = (g.action(), var(g), var(g));
                let xy = Term::choice(x.clone(), y);
                eq(
                    Term::prefix(a.clone(), Term::choice(Term::tau(xy.clone()), x)),
                    Term::prefix(a, xy),
                )
            }
            Axiom::Rdp => {
                let spec = g.rec_spec(2);
                let v = pick_var(g, &spec);
                let rhs = spec.equations[&*v].close_with(&spec);
                eq(Term::rec_call(&v, spec), rhs)
            }
            Axiom::Rsp => rsp(g),
            Axiom::ThetaInert => {
                let (l, u) = g.env_bounds();
                let n = g.rng().gen_range(1..=3);
                let parts: Vec<Term> = (0..n)
                    .map(|_| {
                        let a = outside(g, &l, false);
                        Term::prefix(a, var(g))
                    })
                    .collect();
                let sum = Term::sum(parts);
                eq(Term::theta(l, u, sum.clone()), sum)
            }
            Axiom::ThetaDrop | Axiom::ThetaKeep => {
                let (l, u) = g.env_bounds();
                let a = inside(g, &l);
                let b = if self == Axiom::ThetaDrop { outside(g, &u, false) } else { inside(g, &u) };
                let (x, y, z) = (var(g), var(g), var(g));
                let xy = Term::choice(x, Term::prefix(a, y));
                let bz = Term::prefix(b, z);
                let lhs = Term::theta(l.clone(), u.clone(), Term::choice(xy.clone(), bz.clone()));
                let rhs = if self == Axiom::ThetaDrop {
                    Term::theta(l, u, xy)
                } else {
                    Term::choice(Term::theta(l.clone(), u.clone(), xy), Term::theta(l, u, bz))
                };
                eq(lhs, rhs)
            }
            Axiom::ThetaPrefix => {
                let (l, u) = g.env_bounds();
                let a = g.guard_action();
                let x = var(g);
                let ax = Term::prefix(a, x);
                eq(Term::theta(l, u, ax.clone()), ax)
            }
            Axiom::ThetaTau => {
                let (l, u) = g.env_bounds();
                let x = var(g);
                eq(
                    Term::theta(l.clone(), u.clone(), Term::tau(x.clone())),
                    Term::tau(Term::theta(l, u, x)),
                )
            }
            Axiom::PsiVisible => {
                let mut x_env = g.env();
                if x_env.len() == g.config().alphabet.len() {
                    let alphabet = g.config().alphabet.clone();
                    let drop = alphabet.choose(g.rng()).expect("nonempty").clone();
                    x_env = x_env.iter().filter(|n| **n != drop).cloned().collect();
                }
                let a = outside(g, &x_env, true);
                let (x, y) = (var(g), var(g));
                eq(
                    Term::psi(x_env.clone(), Term::choice(x.clone(), Term::prefix(a.clone(), y.clone()))),
                    Term::choice(Term::psi(x_env, x), Term::prefix(a, y)),
                )
            }
            Axiom::PsiDrop | Axiom::PsiKeep => {
                let x_env = g.env();
                let a = inside(g, &x_env);
                let b = if self == Axiom::PsiDrop { Action::Timeout } else { inside(g, &x_env) };
                let (x, y, z) = (var(g), var(g), var(g));
                let xy = Term::choice(x, Term::prefix(a, y));
                let bz = Term::prefix(b, z);
                let lhs = Term::psi(x_env.clone(), Term::choice(xy.clone(), bz.clone()));
                let rhs = if self == Axiom::PsiDrop {
                    Term::psi(x_env, xy)
                } else {
                    Term::choice(Term::psi(x_env, xy), bz)
                };
                eq(lhs, rhs)
            }
            Axiom::PsiPrefix => {
                let x_env = g.env();
                let a = g.step_action();
                let ax = Term::prefix(a, var(g));
                eq(Term::psi(x_env, ax.clone()), ax)
            }
            Axiom::PsiTimeout => {
                let x_env = g.env();
                let n = g.rng().gen_range(1..=3);
                let ys: Vec<Term> = (0..n).map(|_| var(g)).collect();
                eq(
                    Term::psi(x_env.clone(), Term::sum(ys.iter().cloned().map(Term::timeout).collect::<Vec<_>>())),
                    Term::sum(
                        ys.into_iter()
                            .map(|y| Term::timeout(Term::theta_x(x_env.clone(), y)))
                            .collect::<Vec<_>>(),
                    ),
                )
            }
            Axiom::LazyTimeout => {
                let (x, y) = (var(g), var(g));
                eq(Term::choice(Term::tau(x.clone()), Term::timeout(y)), Term::tau(x))
            }
            Axiom::ReactiveApprox => {
                let (x, y) = g.pair();
                let universe = x.alphabet().union(&y.alphabet());
                let premises = universe
                    .subsets()
                    .into_iter()
                    .map(|e| (Term::psi(e.clone(), x.clone()), Term::psi(e, y.clone())))
                    .collect();
                Instance::Implication {
                    premises,
                    conclusion: (x, y),
                }
            }
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = String;

    fn from_str(s: &str) -> Result<Axiom, String> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown axiom `{s}`"))
    }
}

/// A closed process to instantiate a law variable with.
fn var(g: &mut Gen) -> Term {
    loop {
        let depth = g.rng().gen_range(0..=2);
        let t = g.term_at(depth);
        if fits(&t, g.config().max_states) {
            return t;
        }
    }
}

fn pick_var(g: &mut Gen, spec: &RecSpec) -> String {
    let vars: Vec<_> = spec.variables().collect();
    vars.choose(g.rng()).expect("spec binds a variable").to_string()
}

/// An action of `set` or `tau`.
fn inside(g: &mut Gen, set: &EnvSet) -> Action {
    let names: Vec<_> = set.iter().cloned().collect();
    if names.is_empty() || g.rng().gen_bool(0.3) {
        Action::Tau
    } else {
        Action::Visible(names.choose(g.rng()).expect("nonempty").clone())
    }
}

/// A visible action outside `set`, or `t` unless `visible_only`.
fn outside(g: &mut Gen, set: &EnvSet, visible_only: bool) -> Action {
    let mut options: Vec<Action> = g
        .config()
        .alphabet
        .iter()
        .filter(|a| !set.contains(a))
        .map(|a| Action::Visible(a.clone()))
        .collect();
    if !visible_only {
        options.push(Action::Timeout);
    }
    options.choose(g.rng()).expect("an action outside the set").clone()
}

fn prefix_sum(g: &mut Gen) -> Vec<(Action, Term)> {
    let n = g.rng().gen_range(1..=3);
    (0..n)
        .map(|_| {
            let a = g.action();
            let d = g.rng().gen_range(0..=1);
            (a, g.basic(d))
        })
        .collect()
}

fn expansion(g: &mut Gen) -> Instance {
    let (ps, qs) = (prefix_sum(g), prefix_sum(g));
    let s = g.env();
    let synced = |a: &Action| a.visible_name().is_some_and(|n| s.contains(n));
    let sum = |v: &[(Action, Term)]| Term::sum(v.iter().map(|(a, t)| Term::prefix(a.clone(), t.clone())).collect::<Vec<_>>());
    let (p, q) = (sum(&ps), sum(&qs));
    let mut parts = Vec::new();
    for (a, pi) in &ps {
        if !synced(a) {
            parts.push(Term::prefix(a.clone(), Term::par(pi.clone(), s.clone(), q.clone())));
        }
    }
    for (b, qj) in &qs {
        if !synced(b) {
            parts.push(Term::prefix(b.clone(), Term::par(p.clone(), s.clone(), qj.clone())));
        }
    }
    for (a, pi) in &ps {
        for (b, qj) in &qs {
            if synced(a) && a == b {
                parts.push(Term::prefix(a.clone(), Term::par(pi.clone(), s.clone(), qj.clone())));
            }
        }
    }
    Instance::Equation(Term::par(p, s, q), Term::sum(parts))
}

fn rsp(g: &mut Gen) -> Instance {
    let spec = g.rec_spec(2);
    let vars: Vec<String> = spec.variables().map(|v| v.to_string()).collect();
    let rho: Substitution = if g.rng().gen_bool(0.7) {
        // one unfolding of every equation is again a solution
        let mut once = Substitution::new();
        for v in spec.variables() {
            once.insert(v.clone(), spec.equations[v].clone());
        }
        let unfolded = RecSpec::new(
            spec.equations
                .iter()
                .map(|(v, body)| (v.clone(), body.substitute(&once)))
                .collect(),
        );
        let unfolded = Arc::new(unfolded);
        let mut rho = Substitution::new();
        for v in unfolded.variables() {
            rho.insert(v.clone(), Term::rec_call(v, Arc::clone(&unfolded)));
        }
        rho
    } else {
        let mut rho = Substitution::new();
        for v in spec.variables() {
            rho.insert(v.clone(), var(g));
        }
        rho
    };
    let premises = vars
        .iter()
        .map(|v| {
            let lhs = rho.get(v).expect("rho covers the spec").clone();
            (lhs, spec.equations[v.as_str()].substitute(&rho))
        })
        .collect();
    let v = pick_var(g, &spec);
    let conclusion = (rho.get(&v).expect("rho covers the spec").clone(), Term::rec_call(&v, spec));
    Instance::Implication { premises, conclusion }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Equation(Term, Term),
    /// All premises imply the conclusion.
    Implication {
        premises: Vec<(Term, Term)>,
        conclusion: (Term, Term),
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceResult {
    Held,
    /// Some premise fails for every relation checked.
    Vacuous,
    Failed(Counterexample),
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub relation: String,
    pub lhs: String,
    pub rhs: String,
}

/// Check `inst` against every relation in `relations`.
pub fn check_instance(inst: &Instance, relations: &[Relation], opts: &CheckOptions) -> InstanceResult {
    let holds = |r: Relation, l: &Term, q: &Term| check(r, l, q, None, opts).map(|v| v.equivalent);
    let mut vacuous = 0;
    for &r in relations {
        let (premises, (lhs, rhs)) = match inst {
            Instance::Equation(l, q) => (&[][..], (l, q)),
            Instance::Implication { premises, conclusion } => (&premises[..], (&conclusion.0, &conclusion.1)),
        };
        let mut premise_failed = false;
        for (l, q) in premises {
            match holds(r, l, q) {
                Ok(true) => {}
                Ok(false) => {
                    premise_failed = true;
                    break;
                }
                Err(e) => return InstanceResult::Error(e.to_string()),
            }
        }
        if premise_failed {
            vacuous += 1;
            continue;
        }
        match holds(r, lhs, rhs) {
            Ok(true) => {}
            Ok(false) => {
                return InstanceResult::Failed(Counterexample {
                    relation: r.name().into(),
                    lhs: lhs.to_string(),
                    rhs: rhs.to_string(),
                })
            }
            Err(e) => return InstanceResult::Error(e.to_string()),
        }
    }
    if vacuous == relations.len() {
        InstanceResult::Vacuous
    } else {
        InstanceResult::Held
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomOutcome {
    pub axiom: String,
    pub law: String,
    pub relations: Vec<String>,
    pub instances: usize,
    pub held: usize,
    pub vacuous: usize,
    pub failed: usize,
    pub errors: usize,
    pub expected_to_fail: bool,
    /// No failures for a sound law, at least one for the expected failure.
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub seed: u64,
    pub count: usize,
    pub axioms: Vec<AxiomOutcome>,
}

impl AxiomReport {
    pub fn all_ok(&self) -> bool {
        self.axioms.iter().all(|a| a.ok)
    }

    pub fn outcome(&self, axiom: Axiom) -> Option<&AxiomOutcome> {
        self.axioms.iter().find(|a| a.axiom == axiom.name())
    }
}

fn axiom_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// `count` instances of each of `axioms`, checked in a batch.
pub fn fuzz_axioms(
    seed: u64,
    count: usize,
    axioms: &[Axiom],
    opts: &CheckOptions,
    mode: Parallelism,
) -> AxiomReport {
    let mut jobs: Vec<(usize, Instance)> = Vec::with_capacity(axioms.len() * count);
    for (i, &ax) in axioms.iter().enumerate() {
        let mut g = Gen::new(axiom_seed(seed, Axiom::ALL.iter().position(|a| *a == ax).unwrap_or(i)));
        jobs.extend((0..count).map(|_| (i, ax.instance(&mut g))));
    }
    let results = par::map(mode, &jobs, |(i, inst)| check_instance(inst, axioms[*i].relations(), opts));
    let mut outcomes: Vec<AxiomOutcome> = axioms
        .iter()
        .map(|&ax| AxiomOutcome {
            axiom: ax.name().into(),
            law: ax.law().into(),
            relations: ax.relations().iter().map(|r| r.name().to_string()).collect(),
            instances: 0,
            held: 0,
            vacuous: 0,
            failed: 0,
            errors: 0,
            expected_to_fail: ax.expected_to_fail(),
            ok: false,
            counterexample: None,
            first_error: None,
        })
        .collect();
    for ((i, _), res) in jobs.iter().zip(results) {
        let o = &mut outcomes[*i];
        o.instances += 1;
        match res {
            InstanceResult::Held => o.held += 1,
            InstanceResult::Vacuous => o.vacuous += 1,
            InstanceResult::Failed(c) => {
                o.failed += 1;
                o.counterexample.get_or_insert(c);
            }
            InstanceResult::Error(e) => {
                o.errors += 1;
                o.first_error.get_or_insert(e);
            }
        }
    }
    for o in &mut outcomes {
        o.ok = o.errors == 0 && if o.expected_to_fail { o.failed > 0 } else { o.failed == 0 };
    }
    AxiomReport {
        seed,
        count,
        axioms: outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::explore;

    #[test]
    fn instances_are_processes() {
        for ax in Axiom::ALL {
            let mut g = Gen::new(11);
            for _ in 0..10 {
                let terms = match ax.instance(&mut g) {
                    Instance::Equation(l, r) => vec![l, r],
                    Instance::Implication { premises, conclusion } => premises
                        .into_iter()
                        .flat_map(|(l, r)| [l, r])
                        .chain([conclusion.0, conclusion.1])
                        .collect(),
                };
                for t in terms {
                    assert!(explore(std::slice::from_ref(&t), 10_000).is_ok(), "{ax}: {t}");
                }
            }
        }
    }

    #[test]
    fn literal_zero_law_fails() {
        let r = fuzz_axioms(1, 3, &[Axiom::IdemZero, Axiom::Idem], &CheckOptions::default(), Parallelism::Sequential);
        assert!(r.all_ok());
        assert_eq!(r.outcome(Axiom::IdemZero).unwrap().failed, 3);
    }

    #[test]
    fn names_round_trip() {
        for ax in Axiom::ALL {
            assert_eq!(ax.name().parse::<Axiom>().unwrap(), ax);
        }
    }
}
