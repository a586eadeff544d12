//! Quotients over equivalence classes with a chosen representative.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{Label, Lts, StateId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuotientError {
    #[error("representative {state} is not a member of block {block}")]
    Representative { block: usize, state: StateId },
    #[error("state {0} occurs in more than one block")]
    Overlap(StateId),
    #[error("state {0} is reachable from a representative but belongs to no block")]
    Uncovered(StateId),
}

/// Disjoint blocks covering a subset of the states of an LTS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<StateId>>,
    block_of: Vec<Option<usize>>,
}

impl Partition {
    pub fn from_blocks(num_states: usize, blocks: Vec<Vec<StateId>>) -> Result<Partition, QuotientError> {
        let mut block_of = vec![None; num_states];
        let mut blocks = blocks;
        for (i, b) in blocks.iter_mut().enumerate() {
            b.sort_unstable();
            b.dedup();
            for &s in b.iter() {
                if block_of[s].replace(i).is_some() {
                    return Err(QuotientError::Overlap(s));
                }
            }
        }
        Ok(Partition { blocks, block_of })
    }

    /// Group `states` by an equivalence; blocks are ordered by least member.
    pub fn from_equivalence(
        num_states: usize,
        states: impl IntoIterator<Item = StateId>,
        mut related: impl FnMut(StateId, StateId) -> bool,
    ) -> Partition {
        let mut blocks: Vec<Vec<StateId>> = Vec::new();
        let mut members: Vec<StateId> = states.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        for s in members {
            match blocks.iter_mut().find(|b| related(b[0], s)) {
                Some(b) => b.push(s),
                None => blocks.push(vec![s]),
            }
        }
        Partition::from_blocks(num_states, blocks).expect("grouping yields disjoint blocks")
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn block_of(&self, s: StateId) -> Option<usize> {
        self.block_of.get(s).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Class transition system: `R -a-> R'` and `R -tau-> R'` (for `R != R'`)
/// whenever the representative of `R` reaches by tau steps a member of `R`
/// with such a step into `R'`; `R -t-> R'` likewise from a stable member.
pub fn quotient(
    lts: &Lts,
    partition: &Partition,
    mut choice: impl FnMut(usize, &[StateId]) -> StateId,
) -> Result<Lts, QuotientError> {
    let mut out = Lts::new();
    let mut reps = Vec::with_capacity(partition.len());
    for (i, block) in partition.blocks().iter().enumerate() {
        let rep = choice(i, block);
        if partition.block_of(rep) != Some(i) {
            return Err(QuotientError::Representative { block: i, state: rep });
        }
        reps.push(rep);
        out.add_state(lts.state_name(rep).map(str::to_string));
    }
    for (i, &rep) in reps.iter().enumerate() {
        let mut edges: BTreeSet<(Label, usize)> = BTreeSet::new();
        for p1 in lts.tau_closure(rep) {
            if partition.block_of(p1) != Some(i) {
                continue;
            }
            let stable = lts.is_stable(p1);
            for &(l, p2) in lts.successors(p1) {
                let j = partition.block_of(p2).ok_or(QuotientError::Uncovered(p2))?;
                let keep = match lts.label(l) {
                    Label::Tau => j != i,
                    Label::Timeout => stable,
                    _ => true,
                };
                if keep {
                    edges.insert((lts.label(l).clone(), j));
                }
            }
        }
        for (label, j) in edges {
            out.add_transition(i, &label, j);
        }
    }
    out.set_roots(
        lts.roots()
            .iter()
            .filter_map(|&r| partition.block_of(r))
            .collect(),
    );
    Ok(out)
}

/// `quotient` with the least member of each block as representative.
pub fn quotient_least(lts: &Lts, partition: &Partition) -> Result<Lts, QuotientError> {
    quotient(lts, partition, |_, block| block[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lts(n: usize, edges: &[(usize, Label, usize)]) -> Lts {
        let mut l = Lts::new();
        for _ in 0..n {
            l.add_state(None);
        }
        for (s, lab, t) in edges {
            l.add_transition(*s, lab, *t);
        }
        l.set_roots(vec![0]);
        l
    }

    #[test]
    fn tau_inside_a_class_is_dropped() {
        let a = Label::Visible("a".into());
        let l = lts(3, &[(0, Label::Tau, 1), (1, a.clone(), 2)]);
        let p = Partition::from_blocks(3, vec![vec![0, 1], vec![2]]).unwrap();
        let q = quotient_least(&l, &p).unwrap();
        assert_eq!(q.num_states(), 2);
        assert_eq!(q.num_transitions(), 1);
        assert_eq!(q.successors(0), &[(q.label_id(&a).unwrap(), 1)]);
    }

    #[test]
    fn singleton_classes_are_isomorphic() {
        let l = lts(2, &[(0, Label::Visible("a".into()), 1)]);
        let p = Partition::from_blocks(2, vec![vec![0], vec![1]]).unwrap();
        let q = quotient_least(&l, &p).unwrap();
        assert_eq!(q.export_aut(), l.export_aut());
    }

    #[test]
    fn timeout_from_stable_member() {
        let l = lts(3, &[(0, Label::Timeout, 1), (1, Label::Visible("b".into()), 2)]);
        let p = Partition::from_blocks(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        let q = quotient_least(&l, &p).unwrap();
        assert_eq!(q.successors(0), &[(Lts::TIMEOUT, 1)]);
    }

    #[test]
    fn bad_representative() {
        let l = lts(2, &[]);
        let p = Partition::from_blocks(2, vec![vec![0], vec![1]]).unwrap();
        assert!(matches!(
            quotient(&l, &p, |_, _| 1),
            Err(QuotientError::Representative { block: 0, .. })
        ));
    }
}
