//! Most-general-environment closure of a base LTS.
//!
//! Every base state `p` gives rise to a triggered state `E(p)` and, for
//! each subset `X` of the universe, an allowing state `E{X}(p)`. Fresh
//! labels `eps_{X}` (the environment settles on `X`) and `t_eps` (the
//! environment times out) make reactive equivalences ordinary ones.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::lts::{Label, LabelId, Lts, StateId};
use crate::term::EnvSet;

pub const DEFAULT_MAX_ALPHABET: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error(
        "alphabet {universe} has {size} actions, more than the limit of {max}; \
         restrict the alphabet (hide or rename actions) or raise the limit"
    )]
    AlphabetTooLarge {
        universe: EnvSet,
        size: usize,
        max: usize,
    },
    #[error("action `{action}` occurs in the system but not in the alphabet {universe}")]
    MissingAction { action: String, universe: EnvSet },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EncState {
    Triggered(StateId),
    /// Environment allows exactly the subset with this bitmask over the
    /// universe (bit `i` is the `i`-th action in order).
    Allowing(usize, StateId),
}

impl EncState {
    pub fn inner(&self) -> StateId {
        match *self {
            EncState::Triggered(p) | EncState::Allowing(_, p) => p,
        }
    }
}

/// Per-state facts about a base LTS relative to a universe of actions.
#[derive(Debug, Clone)]
pub struct Reactive {
    pub universe: EnvSet,
    /// Visible label id to universe bit.
    pub bit_of_label: Vec<Option<usize>>,
    /// Visible initial actions of each state as a bitmask.
    pub init_mask: Vec<usize>,
    pub stable: Vec<bool>,
}

impl Reactive {
    pub fn new(base: &Lts, universe: &EnvSet, max_alphabet: usize) -> Result<Reactive, EncodingError> {
        if universe.len() > max_alphabet {
            return Err(EncodingError::AlphabetTooLarge {
                universe: universe.clone(),
                size: universe.len(),
                max: max_alphabet,
            });
        }
        let names: Vec<&str> = universe.iter().map(|a| a.as_ref()).collect();
        let mut bit_of_label = vec![None; base.labels().len()];
        for (id, label) in base.labels().iter().enumerate() {
            if let Label::Visible(a) = label {
                bit_of_label[id] = names.iter().position(|n| *n == a.as_ref());
            }
        }
        let mut init_mask = vec![0usize; base.num_states()];
        let mut stable = vec![true; base.num_states()];
        for (s, l, _) in base.transitions() {
            match base.label(l) {
                Label::Visible(a) => match bit_of_label[l] {
                    Some(bit) => init_mask[s] |= 1 << bit,
                    None => {
                        return Err(EncodingError::MissingAction {
                            action: a.to_string(),
                            universe: universe.clone(),
                        })
                    }
                },
                Label::Tau => stable[s] = false,
                _ => {}
            }
        }
        Ok(Reactive {
            universe: universe.clone(),
            bit_of_label,
            init_mask,
            stable,
        })
    }

    pub fn num_subsets(&self) -> usize {
        1 << self.universe.len()
    }

    /// `init(p) ∩ (X ∪ {tau}) = ∅` for the subset with mask `x`.
    pub fn deadend(&self, p: StateId, x: usize) -> bool {
        self.stable[p] && self.init_mask[p] & x == 0
    }

    pub fn subset(&self, mask: usize) -> EnvSet {
        self.universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect()
    }

    /// Mask of `x ∩ universe`.
    pub fn mask_of(&self, x: &EnvSet) -> usize {
        self.universe
            .iter()
            .enumerate()
            .filter(|(_, a)| x.contains(a))
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    /// Universe bit of a visible label id, if any.
    pub fn bit(&self, label: LabelId) -> Option<usize> {
        self.bit_of_label.get(label).copied().flatten()
    }
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub lts: Lts,
    pub reactive: Reactive,
    pub states: Vec<EncState>,
    index: HashMap<EncState, StateId>,
}

impl Encoded {
    pub fn state(&self, s: EncState) -> Option<StateId> {
        self.index.get(&s).copied()
    }

    pub fn triggered(&self, p: StateId) -> Option<StateId> {
        self.state(EncState::Triggered(p))
    }

    pub fn allowing(&self, x: &EnvSet, p: StateId) -> Option<StateId> {
        self.state(EncState::Allowing(self.reactive.mask_of(x), p))
    }
}

/// Reachable closure from the triggered copies of the base roots.
pub fn encode(base: &Lts, universe: &EnvSet, max_alphabet: usize) -> Result<Encoded, EncodingError> {
    let reactive = Reactive::new(base, universe, max_alphabet)?;
    let mut lts = Lts::new();
    let eps: Vec<LabelId> = (0..reactive.num_subsets())
        .map(|m| lts.intern_label(&Label::Eps(reactive.subset(m))))
        .collect();
    let t_eps = lts.intern_label(&Label::TimeoutEps);
    let own: Vec<LabelId> = base.labels().iter().map(|l| lts.intern_label(l)).collect();

    let mut states = Vec::new();
    let mut index: HashMap<EncState, StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |e: EncState, lts: &mut Lts, states: &mut Vec<EncState>, queue: &mut VecDeque<StateId>| {
        *index.entry(e).or_insert_with(|| {
            let name = base.state_name(e.inner()).map(|n| match e {
                EncState::Triggered(_) => format!("E({n})"),
                EncState::Allowing(m, _) => format!("E{}({n})", reactive.subset(m)),
            });
            let id = lts.add_state(name);
            states.push(e);
            queue.push_back(id);
            id
        })
    };
    let roots: Vec<StateId> = base
        .roots()
        .iter()
        .map(|&r| intern(EncState::Triggered(r), &mut lts, &mut states, &mut queue))
        .collect();
    lts.set_roots(roots);
    while let Some(s) = queue.pop_front() {
        match states[s] {
            EncState::Triggered(p) => {
                for &(l, p2) in base.successors(p) {
                    if matches!(base.label(l), Label::Tau | Label::Visible(_)) {
                        let t = intern(EncState::Triggered(p2), &mut lts, &mut states, &mut queue);
                        lts.add_transition_id(s, own[l], t);
                    }
                }
                for (m, &label) in eps.iter().enumerate() {
                    let t = intern(EncState::Allowing(m, p), &mut lts, &mut states, &mut queue);
                    lts.add_transition_id(s, label, t);
                }
            }
            EncState::Allowing(m, p) => {
                let dead = reactive.deadend(p, m);
                for &(l, p2) in base.successors(p) {
                    let target = match base.label(l) {
                        Label::Tau => Some(EncState::Allowing(m, p2)),
                        Label::Visible(_) => reactive
                            .bit(l)
                            .filter(|b| m & (1 << b) != 0)
                            .map(|_| EncState::Triggered(p2)),
                        Label::Timeout if dead => Some(EncState::Allowing(m, p2)),
                        _ => None,
                    };
                    if let Some(e) = target {
                        let t = intern(e, &mut lts, &mut states, &mut queue);
                        lts.add_transition_id(s, own[l], t);
                    }
                }
                if dead {
                    let t = intern(EncState::Triggered(p), &mut lts, &mut states, &mut queue);
                    lts.add_transition_id(s, t_eps, t);
                }
            }
        }
    }
    Ok(Encoded {
        lts,
        reactive,
        states,
        index,
    })
}

/// Upper bound `|S| * (1 + 2^|universe|)` and the reachable count.
pub fn encoded_state_count(
    base: &Lts,
    universe: &EnvSet,
    max_alphabet: usize,
) -> Result<(usize, usize), EncodingError> {
    let bound = base.num_states() * (1 + (1usize << universe.len()));
    let enc = encode(base, universe, max_alphabet)?;
    Ok((bound, enc.lts.num_states()))
}
