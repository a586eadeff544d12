use fixedbitset::FixedBitSet;

use crate::lts::{Label, Lts, StateId};
use crate::term::{Action, EnvSet};

use super::{EnvMode, Formula};

/// Per-state facts of a base LTS used to evaluate formulas as sets.
pub struct Model<'a> {
    lts: &'a Lts,
    /// Visible initial actions of each state.
    init: Vec<EnvSet>,
    stable: Vec<bool>,
    /// Predecessors by label id.
    pred: Vec<Vec<Vec<StateId>>>,
}

impl<'a> Model<'a> {
    pub fn new(lts: &'a Lts) -> Model<'a> {
        let n = lts.num_states();
        let mut init = vec![EnvSet::empty(); n];
        let mut pred = vec![vec![Vec::new(); n]; lts.labels().len()];
        for (s, l, t) in lts.transitions() {
            if let Label::Visible(a) = lts.label(l) {
                init[s].insert(a.clone());
            }
            pred[l][t].push(s);
        }
        let stable = (0..n).map(|s| lts.is_stable(s)).collect();
        Model { lts, init, stable, pred }
    }

    pub fn lts(&self) -> &Lts {
        self.lts
    }

    pub fn deadend(&self, s: StateId, x: &EnvSet) -> bool {
        self.stable[s] && self.init[s].intersection(x).is_empty()
    }

    fn empty(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.lts.num_states())
    }

    /// States with a `label` step into `targets`, filtered by `keep`.
    fn pre(&self, label: Option<usize>, targets: &FixedBitSet, keep: impl Fn(StateId) -> bool) -> FixedBitSet {
        let mut out = self.empty();
        if let Some(l) = label {
            for t in targets.ones() {
                for &s in &self.pred[l][t] {
                    if keep(s) {
                        out.insert(s);
                    }
                }
            }
        }
        out
    }

    fn label_of(&self, a: &Action) -> Option<usize> {
        self.lts.label_id(&Label::from(a))
    }

    /// States satisfying `phi` in `mode`.
    pub fn sat(&self, phi: &Formula, mode: &EnvMode) -> FixedBitSet {
        match phi {
            Formula::Top => {
                let mut all = self.empty();
                all.insert_range(..);
                all
            }
            Formula::And(cs) => {
                let mut acc = self.sat(&Formula::Top, mode);
                for c in cs {
                    acc.intersect_with(&self.sat(c, mode));
                }
                acc
            }
            Formula::Not(c) => {
                let mut s = self.sat(c, mode);
                s.toggle_range(..);
                s
            }
            Formula::Diamond(Action::Visible(a), c) => {
                let targets = self.sat(c, &EnvMode::Triggered);
                let label = self.label_of(&Action::Visible(a.clone()));
                match mode {
                    EnvMode::Triggered => self.pre(label, &targets, |_| true),
                    EnvMode::Allows(y) => self.pre(label, &targets, |s| y.contains(a) || self.deadend(s, y)),
                }
            }
            Formula::Diamond(a, c) => {
                let targets = self.sat(c, mode);
                self.pre(self.label_of(a), &targets, |_| true)
            }
            Formula::EnvDiamond(x, c) => {
                let targets = self.sat(c, &EnvMode::Allows(x.clone()));
                let idle = match mode {
                    EnvMode::Triggered => x.clone(),
                    EnvMode::Allows(y) => x.union(y),
                };
                self.pre(Some(Lts::TIMEOUT), &targets, |s| self.deadend(s, &idle))
            }
            Formula::Eps(c) => {
                let mut reach = self.sat(c, mode);
                let mut stack: Vec<StateId> = reach.ones().collect();
                while let Some(t) = stack.pop() {
                    for &s in &self.pred[Lts::TAU][t] {
                        if !reach.put(s) {
                            stack.push(s);
                        }
                    }
                }
                reach
            }
            Formula::Hat(Action::Tau, c) => {
                let mut body = self.sat(c, mode);
                let step = self.pre(Some(Lts::TAU), &body, |_| true);
                body.union_with(&step);
                body
            }
            Formula::Hat(a, c) => self.sat(&Formula::Diamond(a.clone(), c.clone()), mode),
        }
    }
}

/// Whether state `s` satisfies `phi` in `mode`.
pub fn satisfies(lts: &Lts, s: StateId, phi: &Formula, mode: &EnvMode) -> bool {
    Model::new(lts).sat(phi, mode).contains(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::parse_formula;
    use crate::semantics::explore;
    use crate::term::parse_term;

    fn holds(term: &str, formula: &str, mode: &EnvMode) -> bool {
        let e = explore(&[parse_term(term).unwrap()], 1000).unwrap();
        satisfies(&e.lts, e.lts.roots()[0], &parse_formula(formula).unwrap(), mode)
    }

    #[test]
    fn table_examples() {
        let trig = EnvMode::Triggered;
        assert!(holds("a.0", "T", &trig));
        assert!(holds("t.b.0", "<{}><b>T", &trig));
        assert!(holds("tau.a.0", "<eps>~<tau>T", &trig));
        assert!(!holds("tau.a.0 + t.b.0", "<{}>T", &trig));
    }

    #[test]
    fn allowing_mode() {
        let y = EnvMode::Allows(EnvSet::from_names(["b"]));
        // a is not allowed, but the process idles, so it may be triggered
        assert!(holds("a.0", "<a>T", &y));
        assert!(!holds("a.0 + b.0", "<a>T", &y));
        assert!(holds("a.0 + b.0", "<b>T", &y));
        assert!(holds("a.0 + t.c.0", "<{}>T", &y));
        assert!(!holds("a.0 + t.c.0", "<{a}>T", &y));
        assert!(holds("a.0 + t.c.0", "<{c}><c>T", &EnvMode::Allows(EnvSet::empty())));
    }

    #[test]
    fn hat_matches_expansion() {
        let e = explore(&[parse_term("tau.(a.0 + tau.b.0) + c.0").unwrap()], 100).unwrap();
        let m = Model::new(&e.lts);
        for f in ["<^tau><b>T", "<^a>T", "<eps>(T & <^tau>~<tau>T)"] {
            let f = parse_formula(f).unwrap();
            for mode in [EnvMode::Triggered, EnvMode::Allows(EnvSet::from_names(["a"]))] {
                assert_eq!(m.sat(&f, &mode), m.sat(&f.expand_hat(), &mode));
            }
        }
    }
}
