use thiserror::Error;

use crate::term::{Action, EnvSet, TAU_SPELLING, TIMEOUT_SPELLING};

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("column {col}: {message}")]
    Syntax { col: usize, message: String },
    #[error("column {col}: `<t>` is not a modality; time-outs are observed through `<{{...}}>`")]
    TimeoutDiamond { col: usize },
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn col(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax {
            col: self.col(),
            message: message.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FormulaError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<&'a str, FormulaError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return self.err("expected an action name");
        }
        Ok(&self.text[start..self.pos])
    }

    fn action(&mut self) -> Result<Action, FormulaError> {
        let col = {
            self.skip_ws();
            self.col()
        };
        let name = self.ident()?;
        match name {
            TAU_SPELLING => Ok(Action::Tau),
            TIMEOUT_SPELLING => Err(FormulaError::TimeoutDiamond { col }),
            n if n.starts_with(|c: char| c.is_ascii_lowercase()) => Ok(Action::visible(n)),
            n => Err(FormulaError::Syntax {
                col,
                message: format!("`{n}` is not an action name"),
            }),
        }
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        let first = self.unary()?;
        let mut rest = Vec::new();
        while self.eat('&') {
            rest.push(self.unary()?);
        }
        if rest.is_empty() {
            Ok(first)
        } else {
            rest.insert(0, first);
            Ok(Formula::And(rest))
        }
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        self.skip_ws();
        match self.peek() {
            Some('T') => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some('~') => {
                self.pos += 1;
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Some('(') => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(')')?;
                Ok(f)
            }
            Some('<') => {
                self.pos += 1;
                self.skip_ws();
                let modal = match self.peek() {
                    Some('{') => {
                        self.pos += 1;
                        let mut names = Vec::new();
                        if !self.eat('}') {
                            loop {
                                match self.action()? {
                                    Action::Visible(n) => names.push(n),
                                    _ => return self.err("environment sets hold visible actions only"),
                                }
                                if self.eat('}') {
                                    break;
                                }
                                self.expect(',')?;
                            }
                        }
                        Modal::Env(names.into_iter().collect::<EnvSet>())
                    }
                    Some('^') => {
                        self.pos += 1;
                        Modal::Hat(self.action()?)
                    }
                    _ => {
                        let save = self.pos;
                        if self.ident().ok() == Some("eps") {
                            Modal::Eps
                        } else {
                            self.pos = save;
                            Modal::Diamond(self.action()?)
                        }
                    }
                };
                self.expect('>')?;
                let body = self.unary()?;
                Ok(match modal {
                    Modal::Env(x) => Formula::env_diamond(x, body),
                    Modal::Hat(a) => Formula::hat(a, body),
                    Modal::Eps => Formula::eps(body),
                    Modal::Diamond(a) => Formula::diamond(a, body),
                })
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of formula"),
        }
    }
}

enum Modal {
    Env(EnvSet),
    Hat(Action),
    Eps,
    Diamond(Action),
}

/// Parse `T`, `~f`, `f & g`, `<a>f`, `<tau>f`, `<{a,b}>f`, `<eps>f` and
/// `<^a>f`; prefix operators bind tighter than `&`.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut c = Cursor { text, pos: 0 };
    let f = c.formula()?;
    c.skip_ws();
    if c.pos < text.len() {
        return c.err("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(
            parse_formula("<a>T").unwrap(),
            Formula::diamond(Action::visible("a"), Formula::Top)
        );
        assert_eq!(
            parse_formula("<{}>T").unwrap(),
            Formula::env_diamond(EnvSet::empty(), Formula::Top)
        );
        assert_eq!(parse_formula("<eps>~<tau>T").unwrap(), Formula::can_stabilise());
    }

    #[test]
    fn timeout_is_rejected() {
        assert!(matches!(
            parse_formula("<t>T"),
            Err(FormulaError::TimeoutDiamond { col: 2 })
        ));
        assert!(matches!(parse_formula("<^t>T"), Err(FormulaError::TimeoutDiamond { .. })));
    }

    #[test]
    fn syntax_errors() {
        assert!(parse_formula("").is_err());
        assert!(parse_formula("<a>").is_err());
        assert!(parse_formula("T T").is_err());
        assert!(parse_formula("<{a,tau}>T").is_err());
        assert!(parse_formula("<A>T").is_err());
    }

    #[test]
    fn precedence() {
        let f = parse_formula("~<a>T & <b>T").unwrap();
        assert!(matches!(f, Formula::And(ref cs) if cs.len() == 2));
    }
}
