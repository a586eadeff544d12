//! Structural operational semantics and state-space exploration.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::lts::{Label, Lts, StateId};
use crate::term::{Action, EnvSet, Name, RecSpec, Term, ValidationError};

pub const DEFAULT_MAX_STATES: usize = 10_000;

const MAX_UNFOLD_DEPTH: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unguarded recursion: deriving {term} requires deriving it again")]
    Unguarded { term: String },
    #[error("expression is not closed: variable `{var}` is free")]
    Open { var: String },
    #[error("recursive call <{var}|..> has no equation for `{var}`")]
    NoEquation { var: String },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("state budget of {max} exceeded while exploring {frontier}")]
    Budget { max: usize, frontier: String },
    #[error("recursion unfolding nested deeper than {MAX_UNFOLD_DEPTH} levels")]
    Depth,
}

/// Outgoing transitions, ordered by label and then target.
pub type TransitionSet = BTreeSet<(Action, Term)>;

pub fn derive(term: &Term) -> Result<TransitionSet, SemanticsError> {
    derive_in(term, &mut Vec::new())
}

/// Initial actions other than the time-out.
pub fn init_set(term: &Term) -> Result<BTreeSet<Action>, SemanticsError> {
    Ok(derive(term)?
        .into_iter()
        .map(|(a, _)| a)
        .filter(|a| *a != Action::Timeout)
        .collect())
}

/// `init(P) ∩ (X ∪ {tau}) = ∅`.
pub fn deadend(term: &Term, env: &EnvSet) -> Result<bool, SemanticsError> {
    Ok(idles(&derive(term)?, env))
}

fn idles(moves: &TransitionSet, env: &EnvSet) -> bool {
    moves.iter().all(|(a, _)| match a {
        Action::Tau => false,
        Action::Visible(n) => !env.contains(n),
        Action::Timeout => true,
    })
}

/// `<x|S>` to `<S_x|S>`.
pub fn unfold(term: &Term) -> Result<Term, SemanticsError> {
    match term {
        Term::RecCall(y, spec) => unfold_call(y, spec),
        other => Ok(other.clone()),
    }
}

fn unfold_call(y: &Name, spec: &Arc<RecSpec>) -> Result<Term, SemanticsError> {
    let body = spec
        .equations
        .get(y)
        .ok_or_else(|| SemanticsError::NoEquation { var: y.to_string() })?;
    Ok(body.close_with(spec))
}

/// Head-normal form: the sum of `alpha.Q` over all transitions.
pub fn head_normal_form(term: &Term) -> Result<Term, SemanticsError> {
    Ok(Term::sum(
        derive(term)?
            .into_iter()
            .map(|(a, target)| Term::prefix(a, target)),
    ))
}

fn derive_in(
    t: &Term,
    unfolding: &mut Vec<(Name, Arc<RecSpec>)>,
) -> Result<TransitionSet, SemanticsError> {
    let mut out = TransitionSet::new();
    match t {
        Term::Nil => {}
        Term::Var(x) => return Err(SemanticsError::Open { var: x.to_string() }),
        Term::Prefix(a, body) => {
            out.insert((a.clone(), (**body).clone()));
        }
        Term::Choice(l, r) => {
            out = derive_in(l, unfolding)?;
            out.extend(derive_in(r, unfolding)?);
        }
        Term::Par(l, sync, r) => {
            let dl = derive_in(l, unfolding)?;
            let dr = derive_in(r, unfolding)?;
            let synced = |a: &Action| a.visible_name().is_some_and(|n| sync.contains(n));
            for (a, l2) in &dl {
                if !synced(a) {
                    out.insert((a.clone(), Term::par(l2.clone(), sync.clone(), (**r).clone())));
                }
            }
            for (a, r2) in &dr {
                if !synced(a) {
                    out.insert((a.clone(), Term::par((**l).clone(), sync.clone(), r2.clone())));
                }
            }
            for (a, l2) in dl.iter().filter(|(a, _)| synced(a)) {
                for (_, r2) in dr.iter().filter(|(b, _)| b == a) {
                    out.insert((a.clone(), Term::par(l2.clone(), sync.clone(), r2.clone())));
                }
            }
        }
        Term::Abstract(hide, body) => {
            for (a, b2) in derive_in(body, unfolding)? {
                let a2 = match &a {
                    Action::Visible(n) if hide.contains(n) => Action::Tau,
                    _ => a,
                };
                out.insert((a2, Term::hide(hide.clone(), b2)));
            }
        }
        Term::Rename(ren, body) => {
            for (a, b2) in derive_in(body, unfolding)? {
                match &a {
                    Action::Visible(n) => {
                        for target in ren.images(n) {
                            out.insert((
                                Action::Visible(Arc::clone(target)),
                                Term::rename(ren.clone(), b2.clone()),
                            ));
                        }
                    }
                    _ => {
                        out.insert((a, Term::rename(ren.clone(), b2)));
                    }
                }
            }
        }
        Term::Theta(lower, upper, body) => {
            let moves = derive_in(body, unfolding)?;
            let dead = idles(&moves, lower);
            for (a, b2) in moves {
                match &a {
                    Action::Tau => {
                        out.insert((a, Term::theta(lower.clone(), upper.clone(), b2)));
                    }
                    Action::Visible(n) if upper.contains(n) || dead => {
                        out.insert((a, b2));
                    }
                    Action::Timeout if dead => {
                        out.insert((a, b2));
                    }
                    _ => {}
                }
            }
        }
        Term::Psi(env, body) => {
            let moves = derive_in(body, unfolding)?;
            let dead = idles(&moves, env);
            for (a, b2) in moves {
                if a != Action::Timeout {
                    out.insert((a, b2));
                } else if dead {
                    out.insert((a, Term::theta_x(env.clone(), b2)));
                }
            }
        }
        Term::RecCall(y, spec) => {
            if unfolding
                .iter()
                .any(|(v, s)| v == y && (Arc::ptr_eq(s, spec) || s == spec))
            {
                return Err(SemanticsError::Unguarded {
                    term: abbreviate(&t.to_string()),
                });
            }
            if unfolding.len() >= MAX_UNFOLD_DEPTH {
                return Err(SemanticsError::Depth);
            }
            let body = unfold_call(y, spec)?;
            unfolding.push((Arc::clone(y), Arc::clone(spec)));
            let r = derive_in(&body, unfolding);
            unfolding.pop();
            out = r?;
        }
    }
    Ok(out)
}

fn abbreviate(s: &str) -> String {
    const LIMIT: usize = 160;
    if s.chars().count() <= LIMIT {
        s.to_string()
    } else {
        let head: String = s.chars().take(LIMIT).collect();
        format!("{head}...")
    }
}

/// Reachable state space of one or more closed, valid roots.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub lts: Lts,
    /// The interned (normalised) term of every state.
    pub terms: Vec<Term>,
    /// Some reachable state lies on a cycle of tau transitions.
    pub divergent: bool,
    /// All roots are well-guarded and no tau cycle is reachable.
    pub strongly_guarded: bool,
    index: HashMap<Term, StateId>,
}

impl Exploration {
    pub fn state_of(&self, term: &Term) -> Option<StateId> {
        self.index.get(&term.normalize()).copied()
    }
}

pub fn explore(roots: &[Term], max_states: usize) -> Result<Exploration, SemanticsError> {
    for r in roots {
        r.validate()?;
        if let Some(var) = r.free_vars().into_iter().next() {
            return Err(SemanticsError::Open { var: var.to_string() });
        }
    }
    let mut lts = Lts::new();
    let mut terms: Vec<Term> = Vec::new();
    let mut index: HashMap<Term, StateId> = HashMap::new();
    let mut queue: VecDeque<StateId> = VecDeque::new();

    let mut intern = |t: Term,
                      lts: &mut Lts,
                      terms: &mut Vec<Term>,
                      queue: &mut VecDeque<StateId>|
     -> Result<StateId, SemanticsError> {
        if let Some(&s) = index.get(&t) {
            return Ok(s);
        }
        if terms.len() >= max_states {
            return Err(SemanticsError::Budget {
                max: max_states,
                frontier: abbreviate(&t.to_string()),
            });
        }
        let s = lts.add_state(Some(t.to_string()));
        terms.push(t.clone());
        index.insert(t, s);
        queue.push_back(s);
        Ok(s)
    };

    let mut root_ids = Vec::new();
    for r in roots {
        root_ids.push(intern(r.normalize(), &mut lts, &mut terms, &mut queue)?);
    }
    lts.set_roots(root_ids);
    while let Some(s) = queue.pop_front() {
        let moves = derive(&terms[s])?;
        for (a, target) in moves {
            let t = intern(target.normalize(), &mut lts, &mut terms, &mut queue)?;
            lts.add_transition(s, &Label::from(&a), t);
        }
    }
    let divergent = lts.has_tau_cycle();
    let strongly_guarded = !divergent && roots.iter().all(Term::is_guarded);
    let index = terms.iter().cloned().zip(0..).collect();
    Ok(Exploration {
        lts,
        terms,
        divergent,
        strongly_guarded,
        index,
    })
}
