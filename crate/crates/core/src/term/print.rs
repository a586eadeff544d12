use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use super::{Definitions, Name, RecSpec, Renaming, Term};

const SUM: u8 = 0;
const PAR: u8 = 1;
const PREFIX: u8 = 2;

/// How recursive calls are rendered.
enum SpecStyle<'a> {
    /// `<x|S>` with names assigned up front (file output).
    Named(&'a BTreeMap<Arc<RecSpec>, Name>),
    /// `<x|S>` for named specifications, the equations inline otherwise.
    Inline,
}

fn write_term(out: &mut String, t: &Term, level: u8, style: &SpecStyle<'_>) {
    match t {
        Term::Nil => out.push('0'),
        Term::Var(x) => out.push_str(x),
        Term::Prefix(a, b) => {
            let _ = write!(out, "{a}.");
            write_term(out, b, PREFIX, style);
        }
        Term::Choice(l, r) => {
            let paren = level > SUM;
            if paren {
                out.push('(');
            }
            write_term(out, l, SUM, style);
            out.push_str(" + ");
            write_term(out, r, PAR, style);
            if paren {
                out.push(')');
            }
        }
        Term::Par(l, s, r) => {
            let paren = level > PAR;
            if paren {
                out.push('(');
            }
            write_term(out, l, PAR, style);
            let _ = write!(out, " ||{s} ");
            write_term(out, r, PREFIX, style);
            if paren {
                out.push(')');
            }
        }
        Term::Abstract(i, b) => operator(out, &format!("tau{i}"), b, style),
        Term::Rename(r, b) => operator(out, &format!("ren{{{}}}", renaming_spelling(r)), b, style),
        Term::Theta(l, u, b) => operator(
            out,
            &format!("theta{{{};{}}}", l.spelling(), u.spelling()),
            b,
            style,
        ),
        Term::Psi(x, b) => operator(out, &format!("psi{x}"), b, style),
        Term::RecCall(y, spec) => match style {
            SpecStyle::Named(names) => {
                let _ = write!(out, "<{y}|{}>", names[spec]);
            }
            SpecStyle::Inline => match &spec.name {
                Some(n) => {
                    let _ = write!(out, "<{y}|{n}>");
                }
                None => {
                    let _ = write!(out, "<{y}|{{");
                    for (i, (v, body)) in spec.equations.iter().enumerate() {
                        if i > 0 {
                            out.push_str("; ");
                        }
                        let _ = write!(out, "{v} = ");
                        write_term(out, body, SUM, style);
                    }
                    out.push_str("}>");
                }
            },
        },
    }
}

fn operator(out: &mut String, head: &str, body: &Term, style: &SpecStyle<'_>) {
    out.push_str(head);
    out.push('(');
    write_term(out, body, SUM, style);
    out.push(')');
}

fn renaming_spelling(r: &Renaming) -> String {
    let parts: Vec<String> = r.pairs().map(|(a, b)| format!("{a}->{b}")).collect();
    parts.join(",")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_term(&mut out, self, SUM, &SpecStyle::Inline);
        f.write_str(&out)
    }
}

fn collect_specs(t: &Term, out: &mut Vec<Arc<RecSpec>>, seen: &mut BTreeSet<Arc<RecSpec>>) {
    match t {
        Term::Nil | Term::Var(_) => {}
        Term::Prefix(_, b)
        | Term::Abstract(_, b)
        | Term::Rename(_, b)
        | Term::Theta(_, _, b)
        | Term::Psi(_, b) => collect_specs(b, out, seen),
        Term::Choice(l, r) | Term::Par(l, _, r) => {
            collect_specs(l, out, seen);
            collect_specs(r, out, seen);
        }
        Term::RecCall(_, spec) => {
            if seen.insert(Arc::clone(spec)) {
                out.push(Arc::clone(spec));
                for body in spec.equations.values() {
                    collect_specs(body, out, seen);
                }
            }
        }
    }
}

/// Render definitions as a file that parses back to the same terms.
/// Specifications without a display name, or whose name is taken, get a
/// generated one.
pub fn print_definitions(defs: &Definitions) -> String {
    let mut specs = Vec::new();
    let mut seen = BTreeSet::new();
    for (_, s) in defs.specs() {
        if seen.insert(Arc::clone(s)) {
            specs.push(Arc::clone(s));
        }
    }
    for (_, t) in defs.defs() {
        collect_specs(t, &mut specs, &mut seen);
    }
    let mut taken: BTreeSet<String> = defs.defs().map(|(n, _)| n.to_string()).collect();
    let mut names: BTreeMap<Arc<RecSpec>, Name> = BTreeMap::new();
    let mut order = Vec::new();
    for spec in &specs {
        let wanted = spec.name.as_ref().map(|n| n.to_string());
        let name = match wanted {
            Some(n) if !taken.contains(&n) => n,
            _ => (1..)
                .map(|i| format!("S{i}"))
                .find(|n| !taken.contains(n))
                .expect("unbounded supply of names"),
        };
        taken.insert(name.clone());
        names.insert(Arc::clone(spec), Arc::from(name.as_str()));
        order.push((name, Arc::clone(spec)));
    }
    let style = SpecStyle::Named(&names);
    let mut out = String::new();
    for (name, spec) in &order {
        let _ = write!(out, "spec {name} {{");
        for (v, body) in &spec.equations {
            let _ = write!(out, " {v} = ");
            write_term(&mut out, body, SUM, &style);
            out.push(';');
        }
        out.push_str(" }\n");
    }
    for (name, t) in defs.defs() {
        let _ = write!(out, "def {name} = ");
        write_term(&mut out, t, SUM, &style);
        out.push_str(";\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_file;
    use super::*;

    #[test]
    fn round_trip_file() {
        let text = "spec S { x = a.y; y = b.x + t.(c.0 ||{c} tau{c}(c.x)) }\n\
                    def P = (a.0 + b.0) ||{a} ren{a->b}(<x|S>);\n\
                    def Q = theta{;a}(psi{a}(a.0 + t.0)) + a.(b.0 + c.0);\n";
        let d = parse_file(text).unwrap();
        let printed = print_definitions(&d);
        let again = parse_file(&printed).unwrap();
        assert_eq!(d.get("P"), again.get("P"));
        assert_eq!(d.get("Q"), again.get("Q"));
    }

    #[test]
    fn choice_on_the_right_is_parenthesised() {
        let t = Term::choice(
            Term::act("a", Term::Nil),
            Term::choice(Term::act("b", Term::Nil), Term::act("c", Term::Nil)),
        );
        assert_eq!(t.to_string(), "a.0 + (b.0 + c.0)");
    }
}
