use fixedbitset::FixedBitSet;

use crate::lts::{Lts, StateId};
use crate::term::EnvSet;

/// `n x n` bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitMatrix {
    n: usize,
    bits: FixedBitSet,
}

impl BitMatrix {
    pub fn full(n: usize) -> BitMatrix {
        let mut bits = FixedBitSet::with_capacity(n * n);
        bits.insert_range(..);
        BitMatrix { n, bits }
    }

    pub fn empty(n: usize) -> BitMatrix {
        BitMatrix {
            n,
            bits: FixedBitSet::with_capacity(n * n),
        }
    }

    #[inline]
    pub fn get(&self, p: StateId, q: StateId) -> bool {
        self.bits.contains(p * self.n + q)
    }

    #[inline]
    pub fn set(&mut self, p: StateId, q: StateId, value: bool) {
        self.bits.set(p * self.n + q, value);
    }

    pub fn set_sym(&mut self, p: StateId, q: StateId, value: bool) {
        self.set(p, q, value);
        self.set(q, p, value);
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn ones(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        let n = self.n;
        self.bits.ones().map(move |i| (i / n, i % n))
    }
}

/// A candidate or final relation over the states of one LTS: pairs and,
/// for reactive relations, triples indexed by environment subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationStore {
    n: usize,
    pub(crate) pairs: BitMatrix,
    envs: Vec<EnvSet>,
    pub(crate) triples: Vec<BitMatrix>,
}

impl RelationStore {
    pub(crate) fn new(pairs: BitMatrix, envs: Vec<EnvSet>, triples: Vec<BitMatrix>) -> RelationStore {
        RelationStore {
            n: pairs.n,
            pairs,
            envs,
            triples,
        }
    }

    pub(crate) fn pairs_only(pairs: BitMatrix) -> RelationStore {
        RelationStore::new(pairs, Vec::new(), Vec::new())
    }

    /// Build from explicit entries; triples refer to `envs` by index.
    pub fn from_entries(
        n: usize,
        envs: Vec<EnvSet>,
        pairs: impl IntoIterator<Item = (StateId, StateId)>,
        triples: impl IntoIterator<Item = (StateId, usize, StateId)>,
    ) -> RelationStore {
        let mut pm = BitMatrix::empty(n);
        for (p, q) in pairs {
            pm.set(p, q, true);
        }
        let mut tm = vec![BitMatrix::empty(n); envs.len()];
        for (p, x, q) in triples {
            tm[x].set(p, q, true);
        }
        RelationStore::new(pm, envs, tm)
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    /// Environment subsets indexing the triples.
    pub fn envs(&self) -> &[EnvSet] {
        &self.envs
    }

    pub fn env_index(&self, x: &EnvSet) -> Option<usize> {
        self.envs.iter().position(|e| e == x)
    }

    pub fn contains_pair(&self, p: StateId, q: StateId) -> bool {
        self.pairs.get(p, q)
    }

    pub fn contains_triple(&self, p: StateId, x: usize, q: StateId) -> bool {
        self.triples[x].get(p, q)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.pairs.ones()
    }

    pub fn triples(&self) -> impl Iterator<Item = (StateId, usize, StateId)> + '_ {
        self.triples
            .iter()
            .enumerate()
            .flat_map(|(x, m)| m.ones().map(move |(p, q)| (p, x, q)))
    }

    /// Number of entries, pairs and triples together.
    pub fn len(&self) -> usize {
        self.pairs.count() + self.triples.iter().map(BitMatrix::count).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(p, q)| self.contains_pair(q, p))
            && self.triples().all(|(p, x, q)| self.contains_triple(q, x, p))
    }
}

/// Reusable visited-marks for repeated small searches.
pub(crate) struct Marks {
    stamp: Vec<u32>,
    epoch: u32,
}

impl Marks {
    pub fn new(n: usize) -> Marks {
        Marks {
            stamp: vec![0; n],
            epoch: 0,
        }
    }

    fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    /// Mark `s`; true if it was unmarked.
    fn visit(&mut self, s: StateId) -> bool {
        if self.stamp[s] == self.epoch {
            false
        } else {
            self.stamp[s] = self.epoch;
            true
        }
    }

    /// States reachable from `q` by tau steps through states satisfying
    /// `allowed` (`q` itself is always included).
    pub fn closure(
        &mut self,
        lts: &Lts,
        q: StateId,
        mut allowed: impl FnMut(StateId) -> bool,
        out: &mut Vec<StateId>,
    ) {
        self.reset();
        out.clear();
        self.visit(q);
        out.push(q);
        let mut i = 0;
        while i < out.len() {
            let u = out[i];
            i += 1;
            for v in lts.tau_successors(u) {
                if allowed(v) && self.visit(v) {
                    out.push(v);
                }
            }
        }
    }
}

/// States from which a stable state is reachable by tau steps.
pub(crate) fn can_reach_stable(lts: &Lts) -> Vec<bool> {
    let n = lts.num_states();
    let mut pred: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in 0..n {
        for t in lts.tau_successors(s) {
            pred[t].push(s);
        }
    }
    let mut ok: Vec<bool> = (0..n).map(|s| lts.is_stable(s)).collect();
    let mut stack: Vec<StateId> = (0..n).filter(|&s| ok[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &pred[t] {
            if !ok[s] {
                ok[s] = true;
                stack.push(s);
            }
        }
    }
    ok
}
