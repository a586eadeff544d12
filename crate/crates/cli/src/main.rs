mod cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use txbisim::encoding::DEFAULT_MAX_ALPHABET;
use txbisim::equiv::{CheckOptions, Method, Relation};
use txbisim::fuzz::Axiom;
use txbisim::semantics::DEFAULT_MAX_STATES;
use txbisim::term::EnvSet;

/// Equivalence checking, model checking and export for CCSP with time-outs.
///
/// Exit status: 0 when the answer is yes (equivalent, satisfied, all laws
/// behave as expected), 1 when it is no, 2 on any error.
#[derive(Debug, Parser)]
#[command(name = "txbisim", version)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunConfig {
    /// State budget for exploration.
    #[arg(long, global = true, env = "TXBISIM_MAX_STATES", default_value_t = DEFAULT_MAX_STATES, value_parser = positive)]
    max_states: usize,
    /// Largest alphabet the environment encoding accepts.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ALPHABET, value_parser = positive)]
    max_alphabet: usize,
    /// encode, direct or both (both cross-checks the two).
    #[arg(long, global = true, default_value = "both")]
    method: Method,
    #[arg(long, global = true, value_enum, default_value_t = Output::Text)]
    output: Output,
}

impl RunConfig {
    fn options(&self) -> CheckOptions {
        CheckOptions {
            method: self.method,
            max_states: self.max_states,
            max_alphabet: self.max_alphabet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Aut,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a file and print its definitions back.
    Parse { file: PathBuf },
    /// Explore a process and export its LTS.
    Lts {
        file: PathBuf,
        name: String,
        /// Defaults to json when --output json is given, aut otherwise.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Export the environment encoding instead of the process LTS.
        #[arg(long)]
        encoded: bool,
        /// Extra actions for the encoding universe, e.g. `{a,b}`.
        #[arg(long, value_parser = parse_env)]
        alphabet: Option<EnvSet>,
    },
    /// Decide a relation between two processes.
    Check {
        file: PathBuf,
        name1: String,
        name2: String,
        /// brb, rbrb, brb-x, rbrb-x, strong, srbb or rsrbb.
        relation: Relation,
        /// Environment set for the -x relations, e.g. `{a}`.
        #[arg(long, value_parser = parse_env)]
        env: Option<EnvSet>,
    },
    /// Evaluate a formula at a process.
    Modal {
        file: PathBuf,
        name: String,
        #[arg(long)]
        formula: String,
        /// `triggered` or the set the environment allows, e.g. `{b}`.
        #[arg(long, default_value = "triggered")]
        env: String,
    },
    /// Produce a formula telling two processes apart.
    Distinguish {
        file: PathBuf,
        name1: String,
        name2: String,
        /// Distinguish up to the rooted relation.
        #[arg(long)]
        rooted: bool,
        /// Start with the environment allowing this set.
        #[arg(long, value_parser = parse_env)]
        env: Option<EnvSet>,
    },
    /// Minimise a strongly guarded process modulo brb.
    Quotient {
        file: PathBuf,
        name: String,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Check the axioms on random instances.
    FuzzAxioms {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Restrict to these axioms (repeatable); all by default.
        #[arg(long = "axiom")]
        axioms: Vec<Axiom>,
        /// Check instances on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// `{a,b}`, `a,b` or `{}`.
pub fn parse_env(s: &str) -> Result<EnvSet, String> {
    let s = s.trim();
    let inner = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')).unwrap_or(s);
    let mut names = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let ident = part.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
        if !ident {
            return Err(format!("`{part}` is not an action name"));
        }
        if part == "tau" || part == "t" {
            return Err(format!("`{part}` cannot occur in an environment set"));
        }
        names.push(part);
    }
    Ok(EnvSet::from_names(names))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cmd::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_sets() {
        assert_eq!(parse_env("{a, b}").unwrap(), EnvSet::from_names(["a", "b"]));
        assert_eq!(parse_env("a").unwrap(), EnvSet::from_names(["a"]));
        assert!(parse_env("{}").unwrap().is_empty());
        assert!(parse_env("{tau}").is_err());
        assert!(parse_env("{a.b}").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
