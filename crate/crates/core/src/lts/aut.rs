//! Aldebaran (`.aut`) import and export.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Label, Lts};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutError {
    #[error("line {line}: malformed header, expected `des (root, transitions, states)`")]
    Header { line: usize },
    #[error("line {line}: malformed transition `{text}`")]
    Transition { line: usize, text: String },
    #[error("line {line}: state {state} out of range (declared {states} states)")]
    StateRange {
        line: usize,
        state: usize,
        states: usize,
    },
    #[error("header declares {declared} transitions, found {found}")]
    Count { declared: usize, found: usize },
}

impl Lts {
    /// Aldebaran text. The header root is the first root (0 if none).
    pub fn export_aut(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "des ({},{},{})",
            self.root().unwrap_or(0),
            self.num_transitions(),
            self.num_states()
        );
        for (s, l, t) in self.transitions() {
            let _ = writeln!(out, "({},\"{}\",{})", s, self.label(l).spelling(), t);
        }
        out
    }

    pub fn import_aut(text: &str) -> Result<Lts, AutError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(AutError::Header { line: 1 })?;
        let fields = header
            .strip_prefix("des")
            .map(str::trim)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or(AutError::Header { line: hline })?;
        let nums: Vec<usize> = fields
            .split(',')
            .map(|f| f.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| AutError::Header { line: hline })?;
        let [root, declared, states] = nums[..] else {
            return Err(AutError::Header { line: hline });
        };
        let mut lts = Lts::new();
        for _ in 0..states {
            lts.add_state(None);
        }
        if states > 0 {
            if root >= states {
                return Err(AutError::StateRange {
                    line: hline,
                    state: root,
                    states,
                });
            }
            lts.set_roots(vec![root]);
        }
        let mut found = 0;
        for (line, text) in lines {
            let bad = || AutError::Transition {
                line,
                text: text.to_string(),
            };
            let inner = text
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(bad)?;
            let first = inner.find(',').ok_or_else(bad)?;
            let last = inner.rfind(',').ok_or_else(bad)?;
            if first == last {
                return Err(bad());
            }
            let src: usize = inner[..first].trim().parse().map_err(|_| bad())?;
            let dst: usize = inner[last + 1..].trim().parse().map_err(|_| bad())?;
            let raw = inner[first + 1..last].trim();
            let label = raw
                .strip_prefix('"')
                .and_then(|r| r.strip_suffix('"'))
                .unwrap_or(raw);
            for s in [src, dst] {
                if s >= states {
                    return Err(AutError::StateRange {
                        line,
                        state: s,
                        states,
                    });
                }
            }
            lts.add_transition(src, &Label::parse(label), dst);
            found += 1;
        }
        if found != declared {
            return Err(AutError::Count { declared, found });
        }
        Ok(lts)
    }
}
