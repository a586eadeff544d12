//! Reactive Hennessy-Milner formulas with triggered and
//! environment-indexed satisfaction.

mod distinguish;
mod parse;
mod sat;

use std::fmt;

use crate::term::{Action, EnvSet};

pub use distinguish::{distinguish, distinguish_states, Distinguished, ModalError};
pub use parse::{parse_formula, FormulaError};
pub use sat::{satisfies, Model};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    /// Finite conjunction; empty means `T`.
    And(Vec<Formula>),
    Not(Box<Formula>),
    /// `<a>` or `<tau>`. A time-out here is outside the logic: it is
    /// rejected by the parser and evaluated as a plain step.
    Diamond(Action, Box<Formula>),
    EnvDiamond(EnvSet, Box<Formula>),
    /// `<eps>`: some tau path leads to a state satisfying the body.
    Eps(Box<Formula>),
    /// `<^tau>` is "body or <tau> body"; `<^a>` is `<a>`.
    Hat(Action, Box<Formula>),
}

impl Formula {
    /// Conjunction with trivial cases collapsed.
    pub fn and(mut children: Vec<Formula>) -> Formula {
        children.retain(|c| *c != Formula::Top);
        match children.len() {
            0 => Formula::Top,
            1 => children.pop().expect("one child"),
            _ => Formula::And(children),
        }
    }

    /// Negation; a double negation cancels.
    pub fn negate(self) -> Formula {
        match self {
            Formula::Not(inner) => *inner,
            f => Formula::Not(Box::new(f)),
        }
    }

    pub fn diamond(a: Action, body: Formula) -> Formula {
        Formula::Diamond(a, Box::new(body))
    }

    pub fn env_diamond(x: EnvSet, body: Formula) -> Formula {
        Formula::EnvDiamond(x, Box::new(body))
    }

    pub fn eps(body: Formula) -> Formula {
        Formula::Eps(Box::new(body))
    }

    pub fn hat(a: Action, body: Formula) -> Formula {
        Formula::Hat(a, Box::new(body))
    }

    /// `<eps>~<tau>T`: a stable state is reachable.
    pub fn can_stabilise() -> Formula {
        Formula::eps(Formula::Not(Box::new(Formula::diamond(Action::Tau, Formula::Top))))
    }

    /// Rewrites `<^alpha>` into core modalities; `<eps>` is kept.
    pub fn expand_hat(&self) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::And(cs) => Formula::And(cs.iter().map(Formula::expand_hat).collect()),
            Formula::Not(f) => Formula::Not(Box::new(f.expand_hat())),
            Formula::Diamond(a, f) => Formula::diamond(a.clone(), f.expand_hat()),
            Formula::EnvDiamond(x, f) => Formula::env_diamond(x.clone(), f.expand_hat()),
            Formula::Eps(f) => Formula::eps(f.expand_hat()),
            Formula::Hat(Action::Tau, f) => {
                let body = f.expand_hat();
                Formula::Not(Box::new(Formula::And(vec![
                    Formula::Not(Box::new(body.clone())),
                    Formula::Not(Box::new(Formula::diamond(Action::Tau, body))),
                ])))
            }
            Formula::Hat(a, f) => Formula::diamond(a.clone(), f.expand_hat()),
        }
    }

    /// Nesting depth of modalities.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Top => 0,
            Formula::And(cs) => cs.iter().map(Formula::depth).max().unwrap_or(0),
            Formula::Not(f) => f.depth(),
            Formula::Diamond(_, f) | Formula::EnvDiamond(_, f) | Formula::Eps(f) | Formula::Hat(_, f) => {
                1 + f.depth()
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top => 1,
            Formula::And(cs) => 1 + cs.iter().map(Formula::size).sum::<usize>(),
            Formula::Not(f)
            | Formula::Diamond(_, f)
            | Formula::EnvDiamond(_, f)
            | Formula::Eps(f)
            | Formula::Hat(_, f) => 1 + f.size(),
        }
    }
}

/// How the environment stands when a formula is evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EnvMode {
    Triggered,
    Allows(EnvSet),
}

impl fmt::Display for EnvMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvMode::Triggered => f.write_str("triggered"),
            EnvMode::Allows(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subclass {
    /// Characterises the unrooted relation.
    Lbc,
    /// Characterises the rooted relation.
    Lbcr,
}

impl Subclass {
    pub fn name(self) -> &'static str {
        match self {
            Subclass::Lbc => "Lbc",
            Subclass::Lbcr => "Lbcr",
        }
    }
}

impl fmt::Display for Subclass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn is_step_action(a: &Action) -> bool {
    !matches!(a, Action::Timeout)
}

/// Structural membership in a subclass.
pub fn in_subclass(phi: &Formula, which: Subclass) -> bool {
    match which {
        Subclass::Lbc => in_lbc(phi),
        Subclass::Lbcr => in_lbcr(phi),
    }
}

fn in_lbc(phi: &Formula) -> bool {
    match phi {
        Formula::Top => true,
        Formula::And(cs) => cs.iter().all(in_lbc),
        Formula::Not(f) => in_lbc(f),
        Formula::Eps(inner) => match inner.as_ref() {
            Formula::And(cs) => match cs.as_slice() {
                [first, Formula::Hat(a, second)] => is_step_action(a) && in_lbc(first) && in_lbc(second),
                _ => false,
            },
            Formula::EnvDiamond(_, f) => in_lbc(f),
            Formula::Not(f) => matches!(f.as_ref(), Formula::Diamond(Action::Tau, top) if **top == Formula::Top),
            _ => false,
        },
        _ => false,
    }
}

fn in_lbcr(phi: &Formula) -> bool {
    match phi {
        Formula::Top => true,
        Formula::And(cs) => cs.iter().all(in_lbcr),
        Formula::Not(f) => in_lbcr(f),
        Formula::Diamond(a, f) => is_step_action(a) && in_lbc(f),
        Formula::EnvDiamond(_, f) => in_lbc(f),
        _ => false,
    }
}

fn write_modality(f: &mut fmt::Formatter<'_>, a: &Action) -> fmt::Result {
    match a {
        Action::Visible(n) => f.write_str(n),
        Action::Tau => f.write_str("tau"),
        Action::Timeout => f.write_str("t"),
    }
}

impl Formula {
    fn fmt_unary(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::And(cs) if cs.is_empty() => f.write_str("T"),
            Formula::And(_) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("T"),
            Formula::And(cs) if cs.is_empty() => f.write_str("T"),
            Formula::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    c.fmt_unary(f)?;
                }
                Ok(())
            }
            Formula::Not(c) => {
                f.write_str("~")?;
                c.fmt_unary(f)
            }
            Formula::Diamond(a, c) => {
                f.write_str("<")?;
                write_modality(f, a)?;
                f.write_str(">")?;
                c.fmt_unary(f)
            }
            Formula::EnvDiamond(x, c) => {
                write!(f, "<{x}>")?;
                c.fmt_unary(f)
            }
            Formula::Eps(c) => {
                f.write_str("<eps>")?;
                c.fmt_unary(f)
            }
            Formula::Hat(a, c) => {
                f.write_str("<^")?;
                write_modality(f, a)?;
                f.write_str(">")?;
                c.fmt_unary(f)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn subclass_membership() {
        assert!(in_subclass(&p("<eps>~<tau>T"), Subclass::Lbc));
        assert!(in_subclass(&p("<a>T"), Subclass::Lbcr));
        assert!(!in_subclass(&p("<a>T"), Subclass::Lbc));
        assert!(in_subclass(&Formula::Top, Subclass::Lbc));
        assert!(in_subclass(&Formula::Top, Subclass::Lbcr));
        assert!(in_subclass(&p("<eps>(T & <^a>T)"), Subclass::Lbc));
        assert!(in_subclass(&p("~<eps><{}>(<eps>~<tau>T)"), Subclass::Lbc));
        assert!(in_subclass(&p("<{a}><eps>~<tau>T"), Subclass::Lbcr));
        assert!(!in_subclass(&p("<eps><a>T"), Subclass::Lbc));
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "T",
            "<a>T",
            "~<tau>T",
            "<{}>T",
            "<{a,b}><^a>T",
            "<eps>(T & <^tau>~<b>T)",
            "(<a>T & <b>T) & ~(<a>T & T)",
            "<eps>~<tau>T",
        ] {
            let f = p(s);
            assert_eq!(p(&f.to_string()), f, "{s}");
        }
    }

    #[test]
    fn negate_cancels() {
        let f = p("<a>T");
        assert_eq!(f.clone().negate().negate(), f);
    }
}
