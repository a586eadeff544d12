//! Concrete syntax for process files.
//!
//! ```text
//! item   := "def" NAME "=" proc ";" | "spec" NAME "{" (VAR "=" proc ";")+ "}"
//! proc   := par ("+" par)*
//! par    := prefix ("||{" acts? "}" prefix)*
//! prefix := ACT "." prefix | atom
//! atom   := "0" | VAR | "<" VAR "|" NAME ">" | "(" proc ")"
//!         | "tau{" acts "}(" proc ")" | "ren{" ACT "->" ACT ("," ACT "->" ACT)* "}(" proc ")"
//!         | "theta{" acts? ";" acts? "}(" proc ")" | "psi{" acts? "}(" proc ")"
//! ```
//!
//! An identifier immediately followed by `.` is an action; any other
//! identifier in atom position is a variable, or a reference to a `def`
//! when one with that name exists. `//` and `#` start line comments.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use super::{Action, EnvSet, Name, RecSpec, Renaming, Term, ValidationError};

const RESERVED: &[&str] = &["tau", "t", "def", "spec", "ren", "theta", "psi"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: reserved word `{word}` used as an action")]
    Reserved { line: usize, col: usize, word: String },
    #[error("{line}:{col}: undefined name `{name}`")]
    Undefined { line: usize, col: usize, name: String },
    #[error("`{name}` is defined more than once")]
    Duplicate { name: String },
    #[error("definitions refer to each other cyclically through `{name}`")]
    Cycle { name: String },
    #[error("definition `{name}`: {source}")]
    Invalid {
        name: String,
        #[source]
        source: ValidationError,
    },
}

/// Named process terms and named recursive specifications of one file.
#[derive(Debug, Clone, Default)]
pub struct Definitions {
    defs: Vec<(Name, Term)>,
    specs: Vec<(Name, Arc<RecSpec>)>,
}

impl Definitions {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.defs
            .iter()
            .find(|(n, _)| n.as_ref() == name)
            .map(|(_, t)| t)
    }

    pub fn spec(&self, name: &str) -> Option<&Arc<RecSpec>> {
        self.specs
            .iter()
            .find(|(n, _)| n.as_ref() == name)
            .map(|(_, s)| s)
    }

    pub fn defs(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.defs.iter().map(|(n, t)| (n, t))
    }

    pub fn specs(&self) -> impl Iterator<Item = (&Name, &Arc<RecSpec>)> {
        self.specs.iter().map(|(n, s)| (n, s))
    }

    pub fn names(&self) -> Vec<&str> {
        self.defs.iter().map(|(n, _)| n.as_ref()).collect()
    }

    /// Add (or replace) a named term.
    pub fn insert(&mut self, name: &str, term: Term) {
        match self.defs.iter_mut().find(|(n, _)| n.as_ref() == name) {
            Some(slot) => slot.1 = term,
            None => self.defs.push((Arc::from(name), term)),
        }
    }

    /// Parse one process expression that may refer to this file's
    /// definitions and specifications.
    pub fn parse_term(&self, text: &str) -> Result<Term, ParseError> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let raw = p.proc()?;
        p.expect(Tok::Eof, "end of input")?;
        let mut r = Resolver::from_definitions(self);
        r.resolve(&raw, &BTreeSet::new())
    }
}

pub fn parse_file(text: &str) -> Result<Definitions, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let items = p.items()?;
    let mut r = Resolver::new(&items)?;
    let mut out = Definitions::default();
    for item in &items {
        match item {
            Item::Spec { name, .. } => {
                let spec = r.spec(name, item_pos(item))?;
                out.specs.push((Arc::from(name.as_str()), spec));
            }
            Item::Def { name, .. } => {
                let term = r.def(name)?;
                term.validate().map_err(|source| ParseError::Invalid {
                    name: name.clone(),
                    source,
                })?;
                out.defs.push((Arc::from(name.as_str()), term));
            }
        }
    }
    Ok(out)
}

/// Parse a single standalone process expression.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    Definitions::default().parse_term(text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Zero,
    Dot,
    Plus,
    OrOr,
    Bar,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Lt,
    Gt,
    Semi,
    Comma,
    Eq,
    Arrow,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let next = chars.get(i + 1).copied();
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && next == Some('/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(word), pos));
            continue;
        }
        let (tok, width) = match (c, next) {
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('0', _) => (Tok::Zero, 1),
            ('.', _) => (Tok::Dot, 1),
            ('+', _) => (Tok::Plus, 1),
            ('|', _) => (Tok::Bar, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            (';', _) => (Tok::Semi, 1),
            (',', _) => (Tok::Comma, 1),
            ('=', _) => (Tok::Eq, 1),
            _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
        };
        if tok == Tok::Zero && next.is_some_and(|n| n.is_ascii_alphanumeric()) {
            return Err(syntax(pos, "identifiers must start with a letter"));
        }
        i += width;
        col += width;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[derive(Debug, Clone)]
enum Raw {
    Nil,
    Prefix(Action, Box<Raw>),
    Choice(Box<Raw>, Box<Raw>),
    Par(Box<Raw>, EnvSet, Box<Raw>),
    Abstract(EnvSet, Box<Raw>),
    Rename(Renaming, Box<Raw>),
    Theta(EnvSet, EnvSet, Box<Raw>, Pos),
    Psi(EnvSet, Box<Raw>),
    Ident(String),
    Call(String, String, Pos),
}

#[derive(Debug, Clone)]
enum Item {
    Def {
        name: String,
        body: Raw,
        pos: Pos,
    },
    Spec {
        name: String,
        equations: Vec<(String, Raw, Pos)>,
        pos: Pos,
    },
}

fn item_pos(item: &Item) -> Pos {
    match item {
        Item::Def { pos, .. } | Item::Spec { pos, .. } => *pos,
    }
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].0
    }

    fn here(&self) -> Pos {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(syntax(self.here(), format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().1;
                Ok((s, pos))
            }
            other => Err(syntax(self.here(), format!("expected {what}, found {}", describe(&other)))),
        }
    }

    fn items(&mut self) -> Result<Vec<Item>, ParseError> {
        let mut items = Vec::new();
        loop {
            let pos = self.here();
            match self.peek().clone() {
                Tok::Eof => return Ok(items),
                Tok::Ident(k) if k == "def" => {
                    self.bump();
                    let (name, _) = self.ident("a definition name")?;
                    check_name(&name, pos)?;
                    self.expect(Tok::Eq, "`=`")?;
                    let body = self.proc()?;
                    self.expect(Tok::Semi, "`;`")?;
                    items.push(Item::Def { name, body, pos });
                }
                Tok::Ident(k) if k == "spec" => {
                    self.bump();
                    let (name, _) = self.ident("a specification name")?;
                    check_name(&name, pos)?;
                    self.expect(Tok::LBrace, "`{`")?;
                    let mut equations = Vec::new();
                    while *self.peek() != Tok::RBrace {
                        let (var, vpos) = self.ident("a recursion variable")?;
                        check_name(&var, vpos)?;
                        self.expect(Tok::Eq, "`=`")?;
                        let body = self.proc()?;
                        if equations.iter().any(|(v, _, _)| *v == var) {
                            return Err(syntax(vpos, format!("variable `{var}` has two equations")));
                        }
                        equations.push((var, body, vpos));
                        if *self.peek() == Tok::Semi {
                            self.bump();
                        } else if *self.peek() != Tok::RBrace {
                            return Err(syntax(self.here(), "expected `;` or `}`"));
                        }
                    }
                    self.bump();
                    if equations.is_empty() {
                        return Err(syntax(pos, format!("specification `{name}` has no equations")));
                    }
                    items.push(Item::Spec {
                        name,
                        equations,
                        pos,
                    });
                }
                other => {
                    return Err(syntax(
                        pos,
                        format!("expected `def` or `spec`, found {}", describe(&other)),
                    ))
                }
            }
        }
    }

    fn proc(&mut self) -> Result<Raw, ParseError> {
        let mut left = self.par()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let right = self.par()?;
            left = Raw::Choice(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn par(&mut self) -> Result<Raw, ParseError> {
        let mut left = self.prefix()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            self.expect(Tok::LBrace, "`{` after `||`")?;
            let sync = self.acts_until(Tok::RBrace)?;
            self.expect(Tok::RBrace, "`}`")?;
            let right = self.prefix()?;
            left = Raw::Par(Box::new(left), sync, Box::new(right));
        }
        Ok(left)
    }

    fn prefix(&mut self) -> Result<Raw, ParseError> {
        if let (Tok::Ident(word), Tok::Dot) = (self.peek().clone(), self.peek2().clone()) {
            let pos = self.bump().1;
            self.bump();
            let action = match word.as_str() {
                "tau" => Action::Tau,
                "t" => Action::Timeout,
                w if RESERVED.contains(&w) => {
                    return Err(ParseError::Reserved {
                        line: pos.line,
                        col: pos.col,
                        word,
                    })
                }
                w if w.starts_with(|c: char| c.is_ascii_uppercase()) => {
                    return Err(syntax(pos, format!("action `{w}` must start with a lowercase letter")))
                }
                _ => Action::Visible(Arc::from(word.as_str())),
            };
            let body = self.prefix()?;
            return Ok(Raw::Prefix(action, Box::new(body)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Raw, ParseError> {
        let pos = self.here();
        match self.peek().clone() {
            Tok::Zero => {
                self.bump();
                Ok(Raw::Nil)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.proc()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Lt => {
                self.bump();
                let (var, _) = self.ident("a recursion variable")?;
                self.expect(Tok::Bar, "`|`")?;
                let (spec, _) = self.ident("a specification name")?;
                self.expect(Tok::Gt, "`>`")?;
                Ok(Raw::Call(var, spec, pos))
            }
            Tok::Ident(word) if self.peek2() == &Tok::LBrace && is_operator(&word) => {
                self.bump();
                self.bump();
                match word.as_str() {
                    "tau" => {
                        let hide = self.acts_until(Tok::RBrace)?;
                        self.expect(Tok::RBrace, "`}`")?;
                        let body = self.operand()?;
                        Ok(Raw::Abstract(hide, Box::new(body)))
                    }
                    "ren" => {
                        let mut pairs = Vec::new();
                        loop {
                            let a = self.action_name()?;
                            self.expect(Tok::Arrow, "`->`")?;
                            let b = self.action_name()?;
                            pairs.push((a, b));
                            if *self.peek() == Tok::Comma {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                        self.expect(Tok::RBrace, "`}`")?;
                        let body = self.operand()?;
                        Ok(Raw::Rename(Renaming::from_pairs(pairs), Box::new(body)))
                    }
                    "theta" => {
                        let lower = self.acts_until(Tok::Semi)?;
                        self.expect(Tok::Semi, "`;`")?;
                        let upper = self.acts_until(Tok::RBrace)?;
                        self.expect(Tok::RBrace, "`}`")?;
                        let body = self.operand()?;
                        Ok(Raw::Theta(lower, upper, Box::new(body), pos))
                    }
                    _ => {
                        let env = self.acts_until(Tok::RBrace)?;
                        self.expect(Tok::RBrace, "`}`")?;
                        let body = self.operand()?;
                        Ok(Raw::Psi(env, Box::new(body)))
                    }
                }
            }
            Tok::Ident(word) => {
                self.bump();
                if RESERVED.contains(&word.as_str()) {
                    return Err(syntax(pos, format!("reserved word `{word}` cannot be used here")));
                }
                Ok(Raw::Ident(word))
            }
            other => Err(syntax(pos, format!("expected a process, found {}", describe(&other)))),
        }
    }

    fn operand(&mut self) -> Result<Raw, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let inner = self.proc()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(inner)
    }

    fn action_name(&mut self) -> Result<String, ParseError> {
        let (word, pos) = self.ident("an action")?;
        if RESERVED.contains(&word.as_str()) {
            return Err(ParseError::Reserved {
                line: pos.line,
                col: pos.col,
                word,
            });
        }
        if word.starts_with(|c: char| c.is_ascii_uppercase()) {
            return Err(syntax(pos, format!("action `{word}` must start with a lowercase letter")));
        }
        Ok(word)
    }

    fn acts_until(&mut self, end: Tok) -> Result<EnvSet, ParseError> {
        let mut set = EnvSet::empty();
        if *self.peek() == end {
            return Ok(set);
        }
        loop {
            set.insert(Arc::from(self.action_name()?.as_str()));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                return Ok(set);
            }
        }
    }
}

fn is_operator(word: &str) -> bool {
    matches!(word, "tau" | "ren" | "theta" | "psi")
}

fn check_name(name: &str, pos: Pos) -> Result<(), ParseError> {
    if RESERVED.contains(&name) {
        Err(syntax(pos, format!("reserved word `{name}` cannot be used as a name")))
    } else {
        Ok(())
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Zero => "`0`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Plus => "`+`".into(),
        Tok::OrOr => "`||`".into(),
        Tok::Bar => "`|`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Lt => "`<`".into(),
        Tok::Gt => "`>`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Eof => "end of input".into(),
    }
}

enum Slot<T> {
    Pending(T),
    Busy,
    Done,
}

struct Resolver<'a> {
    raw_defs: BTreeMap<String, Slot<&'a Raw>>,
    raw_specs: BTreeMap<String, Slot<&'a [(String, Raw, Pos)]>>,
    defs: BTreeMap<String, Term>,
    specs: BTreeMap<String, Arc<RecSpec>>,
}

impl<'a> Resolver<'a> {
    fn new(items: &'a [Item]) -> Result<Resolver<'a>, ParseError> {
        let mut r = Resolver {
            raw_defs: BTreeMap::new(),
            raw_specs: BTreeMap::new(),
            defs: BTreeMap::new(),
            specs: BTreeMap::new(),
        };
        for item in items {
            let name = match item {
                Item::Def { name, body, .. } => {
                    if r.raw_defs.insert(name.clone(), Slot::Pending(body)).is_some() {
                        return Err(ParseError::Duplicate { name: name.clone() });
                    }
                    name
                }
                Item::Spec {
                    name, equations, ..
                } => {
                    if r
                        .raw_specs
                        .insert(name.clone(), Slot::Pending(equations.as_slice()))
                        .is_some()
                    {
                        return Err(ParseError::Duplicate { name: name.clone() });
                    }
                    name
                }
            };
            if r.raw_defs.contains_key(name) && r.raw_specs.contains_key(name) {
                return Err(ParseError::Duplicate { name: name.clone() });
            }
        }
        Ok(r)
    }

    fn from_definitions(defs: &Definitions) -> Resolver<'a> {
        Resolver {
            raw_defs: defs
                .defs
                .iter()
                .map(|(n, _)| (n.to_string(), Slot::Done))
                .collect(),
            raw_specs: defs
                .specs
                .iter()
                .map(|(n, _)| (n.to_string(), Slot::Done))
                .collect(),
            defs: defs
                .defs
                .iter()
                .map(|(n, t)| (n.to_string(), t.clone()))
                .collect(),
            specs: defs
                .specs
                .iter()
                .map(|(n, s)| (n.to_string(), Arc::clone(s)))
                .collect(),
        }
    }

    fn def(&mut self, name: &str) -> Result<Term, ParseError> {
        match self.raw_defs.insert(name.to_string(), Slot::Busy) {
            Some(Slot::Pending(raw)) => {
                let term = self.resolve(raw, &BTreeSet::new())?;
                self.defs.insert(name.to_string(), term.clone());
                self.raw_defs.insert(name.to_string(), Slot::Done);
                Ok(term)
            }
            Some(Slot::Done) => {
                self.raw_defs.insert(name.to_string(), Slot::Done);
                Ok(self.defs[name].clone())
            }
            Some(Slot::Busy) => Err(ParseError::Cycle {
                name: name.to_string(),
            }),
            None => unreachable!("caller checks that the definition exists"),
        }
    }

    fn spec(&mut self, name: &str, pos: Pos) -> Result<Arc<RecSpec>, ParseError> {
        match self.raw_specs.insert(name.to_string(), Slot::Busy) {
            Some(Slot::Pending(equations)) => {
                let bound: BTreeSet<String> = equations.iter().map(|(v, _, _)| v.clone()).collect();
                let mut eqs = BTreeMap::new();
                for (var, raw, _) in equations {
                    eqs.insert(Arc::from(var.as_str()), self.resolve(raw, &bound)?);
                }
                let spec = Arc::new(RecSpec::named(name, eqs));
                self.specs.insert(name.to_string(), Arc::clone(&spec));
                self.raw_specs.insert(name.to_string(), Slot::Done);
                Ok(spec)
            }
            Some(Slot::Done) => {
                self.raw_specs.insert(name.to_string(), Slot::Done);
                Ok(Arc::clone(&self.specs[name]))
            }
            Some(Slot::Busy) => Err(ParseError::Cycle {
                name: name.to_string(),
            }),
            None => {
                self.raw_specs.remove(name);
                Err(ParseError::Undefined {
                    line: pos.line,
                    col: pos.col,
                    name: name.to_string(),
                })
            }
        }
    }

    fn resolve(&mut self, raw: &Raw, bound: &BTreeSet<String>) -> Result<Term, ParseError> {
        Ok(match raw {
            Raw::Nil => Term::Nil,
            Raw::Prefix(a, b) => Term::prefix(a.clone(), self.resolve(b, bound)?),
            Raw::Choice(l, r) => Term::choice(self.resolve(l, bound)?, self.resolve(r, bound)?),
            Raw::Par(l, s, r) => {
                Term::par(self.resolve(l, bound)?, s.clone(), self.resolve(r, bound)?)
            }
            Raw::Abstract(i, b) => Term::hide(i.clone(), self.resolve(b, bound)?),
            Raw::Rename(ren, b) => Term::rename(ren.clone(), self.resolve(b, bound)?),
            Raw::Theta(l, u, b, pos) => {
                if !l.is_subset(u) {
                    return Err(syntax(*pos, format!("theta lower bound {l} is not a subset of {u}")));
                }
                Term::theta(l.clone(), u.clone(), self.resolve(b, bound)?)
            }
            Raw::Psi(x, b) => Term::psi(x.clone(), self.resolve(b, bound)?),
            Raw::Ident(name) => {
                if bound.contains(name) || !self.raw_defs.contains_key(name) {
                    Term::var(name)
                } else {
                    self.def(name)?
                }
            }
            Raw::Call(var, spec_name, pos) => {
                let spec = self.spec(spec_name, *pos)?;
                if !spec.binds(var) {
                    return Err(ParseError::Undefined {
                        line: pos.line,
                        col: pos.col,
                        name: format!("{var} in {spec_name}"),
                    });
                }
                Term::RecCall(Arc::from(var.as_str()), spec)
            }
        })
    }
}
