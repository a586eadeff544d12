//! Finite labelled transition systems.

mod aut;
mod quotient;

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::term::{Action, EnvSet, Name};

pub use aut::AutError;
pub use quotient::{quotient, quotient_least, Partition, QuotientError};

pub type StateId = usize;
pub type LabelId = usize;

/// Transition labels: process actions plus the two environment labels
/// introduced by the encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Visible(Name),
    Tau,
    Timeout,
    TimeoutEps,
    Eps(EnvSet),
}

impl Label {
    pub fn is_visible(&self) -> bool {
        matches!(self, Label::Visible(_))
    }

    pub fn visible_name(&self) -> Option<&Name> {
        match self {
            Label::Visible(a) => Some(a),
            _ => None,
        }
    }

    /// Spelling used in Aldebaran files.
    pub fn spelling(&self) -> String {
        match self {
            Label::Visible(a) => a.to_string(),
            Label::Tau => "tau".into(),
            Label::Timeout => "t".into(),
            Label::TimeoutEps => "t_eps".into(),
            Label::Eps(x) => format!("eps_{x}"),
        }
    }

    pub fn parse(spelling: &str) -> Label {
        match spelling {
            "tau" => Label::Tau,
            "t" => Label::Timeout,
            "t_eps" => Label::TimeoutEps,
            s => match s.strip_prefix("eps_{").and_then(|r| r.strip_suffix('}')) {
                Some(inner) => Label::Eps(EnvSet::from_names(
                    inner.split(',').map(str::trim).filter(|a| !a.is_empty()),
                )),
                None => Label::Visible(Name::from(s)),
            },
        }
    }
}

impl From<&Action> for Label {
    fn from(a: &Action) -> Label {
        match a {
            Action::Visible(n) => Label::Visible(n.clone()),
            Action::Tau => Label::Tau,
            Action::Timeout => Label::Timeout,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spelling())
    }
}

#[derive(Debug, Clone)]
pub struct Lts {
    labels: Vec<Label>,
    label_ids: HashMap<Label, LabelId>,
    succ: Vec<Vec<(LabelId, StateId)>>,
    roots: Vec<StateId>,
    names: Vec<Option<String>>,
}

impl Default for Lts {
    fn default() -> Self {
        Lts::new()
    }
}

impl Lts {
    /// Label id of `tau`, interned in every LTS.
    pub const TAU: LabelId = 0;
    /// Label id of `t`, interned in every LTS.
    pub const TIMEOUT: LabelId = 1;

    pub fn new() -> Lts {
        let mut lts = Lts {
            labels: Vec::new(),
            label_ids: HashMap::new(),
            succ: Vec::new(),
            roots: Vec::new(),
            names: Vec::new(),
        };
        lts.intern_label(&Label::Tau);
        lts.intern_label(&Label::Timeout);
        lts
    }

    pub fn intern_label(&mut self, label: &Label) -> LabelId {
        if let Some(&id) = self.label_ids.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.clone());
        self.label_ids.insert(label.clone(), id);
        id
    }

    pub fn label(&self, id: LabelId) -> &Label {
        &self.labels[id]
    }

    pub fn label_id(&self, label: &Label) -> Option<LabelId> {
        self.label_ids.get(label).copied()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn add_state(&mut self, name: Option<String>) -> StateId {
        self.succ.push(Vec::new());
        self.names.push(name);
        self.succ.len() - 1
    }

    pub fn add_transition(&mut self, source: StateId, label: &Label, target: StateId) {
        let l = self.intern_label(label);
        self.add_transition_id(source, l, target);
    }

    pub fn add_transition_id(&mut self, source: StateId, label: LabelId, target: StateId) {
        assert!(target < self.succ.len(), "transition target out of range");
        let edges = &mut self.succ[source];
        if let Err(pos) = edges.binary_search(&(label, target)) {
            edges.insert(pos, (label, target));
        }
    }

    pub fn set_roots(&mut self, roots: Vec<StateId>) {
        self.roots = roots;
    }

    pub fn roots(&self) -> &[StateId] {
        &self.roots
    }

    pub fn root(&self) -> Option<StateId> {
        self.roots.first().copied()
    }

    pub fn num_states(&self) -> usize {
        self.succ.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn state_name(&self, s: StateId) -> Option<&str> {
        self.names[s].as_deref()
    }

    pub fn set_state_name(&mut self, s: StateId, name: Option<String>) {
        self.names[s] = name;
    }

    /// Outgoing transitions, sorted by (label id, target).
    pub fn successors(&self, s: StateId) -> &[(LabelId, StateId)] {
        &self.succ[s]
    }

    pub fn successors_by(&self, s: StateId, label: LabelId) -> impl Iterator<Item = StateId> + '_ {
        let edges = &self.succ[s];
        let start = edges.partition_point(|&(l, _)| l < label);
        edges[start..]
            .iter()
            .take_while(move |(l, _)| *l == label)
            .map(|(_, t)| *t)
    }

    pub fn tau_successors(&self, s: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.successors_by(s, Lts::TAU)
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, LabelId, StateId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(s, es)| es.iter().map(move |&(l, t)| (s, l, t)))
    }

    pub fn is_stable(&self, s: StateId) -> bool {
        self.tau_successors(s).next().is_none()
    }

    /// States reachable from `s` by zero or more `tau` steps, ascending.
    pub fn tau_closure(&self, s: StateId) -> Vec<StateId> {
        let mut seen = FixedBitSet::with_capacity(self.num_states());
        let mut stack = vec![s];
        seen.insert(s);
        while let Some(u) = stack.pop() {
            for v in self.tau_successors(u) {
                if !seen.put(v) {
                    stack.push(v);
                }
            }
        }
        seen.ones().collect()
    }

    /// `tau_closure` for every state.
    pub fn tau_closures(&self) -> Vec<Vec<StateId>> {
        (0..self.num_states()).map(|s| self.tau_closure(s)).collect()
    }

    /// States reachable from `from` by any transitions.
    pub fn reachable(&self, from: &[StateId]) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.num_states());
        let mut stack: Vec<StateId> = Vec::new();
        for &s in from {
            if !seen.put(s) {
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            for &(_, v) in &self.succ[u] {
                if !seen.put(v) {
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Visible actions occurring on transitions.
    pub fn visible_actions(&self) -> EnvSet {
        let used: FixedBitSet = {
            let mut b = FixedBitSet::with_capacity(self.labels.len());
            for (_, l, _) in self.transitions() {
                b.insert(l);
            }
            b
        };
        used.ones()
            .filter_map(|l| self.labels[l].visible_name().cloned())
            .collect()
    }

    /// Whether some state lies on a cycle of `tau` transitions.
    pub fn has_tau_cycle(&self) -> bool {
        // Kahn's algorithm on the tau subgraph.
        let n = self.num_states();
        let mut indeg = vec![0usize; n];
        for s in 0..n {
            for t in self.tau_successors(s) {
                indeg[t] += 1;
            }
        }
        let mut queue: Vec<StateId> = (0..n).filter(|&s| indeg[s] == 0).collect();
        let mut removed = 0;
        while let Some(s) = queue.pop() {
            removed += 1;
            for t in self.tau_successors(s) {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    queue.push(t);
                }
            }
        }
        removed < n
    }

    /// Both systems side by side; states of `other` are shifted by the
    /// returned offset. Roots are concatenated.
    pub fn disjoint_union(&self, other: &Lts) -> (Lts, usize) {
        let mut out = self.clone();
        let offset = out.num_states();
        for s in 0..other.num_states() {
            out.add_state(other.names[s].clone());
        }
        for (s, l, t) in other.transitions() {
            out.add_transition(s + offset, other.label(l), t + offset);
        }
        out.roots.extend(other.roots.iter().map(|r| r + offset));
        (out, offset)
    }

    pub fn to_json(&self, with_names: bool) -> serde_json::Value {
        #[derive(Serialize)]
        struct Edge<'a> {
            source: StateId,
            label: &'a str,
            target: StateId,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            states: usize,
            roots: &'a [StateId],
            transitions: Vec<Edge<'a>>,
            #[serde(skip_serializing_if = "Option::is_none")]
            names: Option<Vec<Option<&'a str>>>,
        }
        let spellings: Vec<String> = self.labels.iter().map(Label::spelling).collect();
        let doc = Doc {
            states: self.num_states(),
            roots: &self.roots,
            transitions: self
                .transitions()
                .map(|(s, l, t)| Edge {
                    source: s,
                    label: &spellings[l],
                    target: t,
                })
                .collect(),
            names: with_names.then(|| self.names.iter().map(|n| n.as_deref()).collect()),
        };
        serde_json::to_value(doc).expect("LTS documents always serialise")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(labels: &[Label]) -> Lts {
        let mut lts = Lts::new();
        let mut prev = lts.add_state(None);
        lts.set_roots(vec![prev]);
        for l in labels {
            let next = lts.add_state(None);
            lts.add_transition(prev, l, next);
            prev = next;
        }
        lts
    }

    #[test]
    fn tau_closure_examples() {
        let lts = chain(&[Label::Visible("a".into())]);
        assert_eq!(lts.tau_closure(0), vec![0]);
        let lts = chain(&[Label::Tau, Label::Tau]);
        assert_eq!(lts.tau_closure(0), vec![0, 1, 2]);
        let mut cyc = chain(&[Label::Tau]);
        cyc.add_transition(1, &Label::Tau, 0);
        assert_eq!(cyc.tau_closure(0), vec![0, 1]);
        assert!(cyc.has_tau_cycle());
        assert!(!lts.has_tau_cycle());
    }

    #[test]
    fn label_spellings_round_trip() {
        for l in [
            Label::Visible("a".into()),
            Label::Tau,
            Label::Timeout,
            Label::TimeoutEps,
            Label::Eps(EnvSet::from_names(["a", "b"])),
            Label::Eps(EnvSet::empty()),
        ] {
            assert_eq!(Label::parse(&l.spelling()), l);
        }
        assert_eq!(Label::Eps(EnvSet::from_names(["a", "b"])).spelling(), "eps_{a,b}");
    }

    #[test]
    fn duplicate_transitions_are_merged() {
        let mut lts = chain(&[Label::Tau]);
        lts.add_transition(0, &Label::Tau, 1);
        assert_eq!(lts.num_transitions(), 1);
    }

    #[test]
    fn disjoint_union_shifts_states() {
        let a = chain(&[Label::Visible("a".into())]);
        let b = chain(&[Label::Timeout]);
        let (u, off) = a.disjoint_union(&b);
        assert_eq!(off, 2);
        assert_eq!(u.roots(), &[0, 2]);
        assert_eq!(u.successors(2), &[(Lts::TIMEOUT, 3)]);
    }
}
