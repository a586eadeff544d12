use std::io::Read as _;
use std::path::Path;

use anyhow::{bail, Context as _, Result};
use serde::Serialize;
use serde_json::json;
use txbisim::encoding::encode;
use txbisim::equiv::{brb_quotient, check, Verdict};
use txbisim::fuzz::{fuzz_axioms, Axiom, AxiomReport};
use txbisim::lts::Lts;
use txbisim::modal::{distinguish, parse_formula, satisfies, Distinguished, EnvMode};
use txbisim::par::Parallelism;
use txbisim::semantics::explore;
use txbisim::term::{parse_file, print_definitions, Definitions, Term};

use crate::{parse_env, Cli, Command, Format, Output};

/// Runs the subcommand; `Ok(false)` is a negative answer.
pub fn run(cli: &Cli) -> Result<bool> {
    let opts = cli.run.options();
    let json = cli.run.output == Output::Json;
    let format = |f: Option<Format>| f.unwrap_or(if json { Format::Json } else { Format::Aut });
    match &cli.command {
        Command::Parse { file } => {
            let defs = load(file)?;
            if json {
                let items: Vec<_> = defs
                    .defs()
                    .map(|(n, t)| {
                        json!({
                            "name": n.as_ref(),
                            "term": t.to_string(),
                            "closed": t.is_closed(),
                            "guarded": t.is_guarded(),
                        })
                    })
                    .collect();
                let specs: Vec<&str> = defs.specs().map(|(n, _)| n.as_ref()).collect();
                print_json(&json!({ "definitions": items, "specs": specs }))?;
            } else {
                print!("{}", print_definitions(&defs));
            }
            Ok(true)
        }
        Command::Lts {
            file,
            name,
            format: f,
            encoded,
            alphabet,
        } => {
            let defs = load(file)?;
            let p = resolve(&defs, name, file)?;
            let e = explore(std::slice::from_ref(&p), opts.max_states)?;
            let lts = if *encoded {
                let mut universe = p.alphabet();
                if let Some(extra) = alphabet {
                    universe = universe.union(extra);
                }
                encode(&e.lts, &universe, opts.max_alphabet)?.lts
            } else {
                e.lts
            };
            export(&lts, format(*f))?;
            Ok(true)
        }
        Command::Check {
            file,
            name1,
            name2,
            relation,
            env,
        } => {
            let defs = load(file)?;
            let p = resolve(&defs, name1, file)?;
            let q = resolve(&defs, name2, file)?;
            let v = check(*relation, &p, &q, env.as_ref(), &opts)?;
            if json {
                #[derive(Serialize)]
                struct Report<'a> {
                    relation: &'a str,
                    left: &'a str,
                    right: &'a str,
                    #[serde(skip_serializing_if = "Option::is_none")]
                    env: Option<String>,
                    states: usize,
                    #[serde(flatten)]
                    verdict: &'a Verdict,
                }
                print_json(&Report {
                    relation: relation.name(),
                    left: name1,
                    right: name2,
                    env: env.as_ref().map(|x| x.to_string()),
                    states: v.states,
                    verdict: &v,
                })?;
            } else {
                let word = if v.equivalent { "equivalent" } else { "not equivalent" };
                println!("{name1} and {name2} are {word} under {relation}");
                println!("method: {}", v.method);
                println!("states: {}", v.states);
                match v.witness_size() {
                    Some(n) => println!("witness size: {n}"),
                    None => {
                        for line in &v.removal_trace {
                            println!("hint: {line}");
                        }
                    }
                }
            }
            Ok(v.equivalent)
        }
        Command::Modal {
            file,
            name,
            formula,
            env,
        } => {
            let defs = load(file)?;
            let p = resolve(&defs, name, file)?;
            let phi = parse_formula(formula).with_context(|| format!("formula `{formula}`"))?;
            let mode = if env.trim() == "triggered" {
                EnvMode::Triggered
            } else {
                EnvMode::Allows(parse_env(env).map_err(anyhow::Error::msg)?)
            };
            let e = explore(std::slice::from_ref(&p), opts.max_states)?;
            let holds = satisfies(&e.lts, e.lts.roots()[0], &phi, &mode);
            if json {
                print_json(&json!({
                    "name": name,
                    "formula": phi.to_string(),
                    "env": mode.to_string(),
                    "holds": holds,
                }))?;
            } else {
                println!("{holds}");
            }
            Ok(holds)
        }
        Command::Distinguish {
            file,
            name1,
            name2,
            rooted,
            env,
        } => {
            let defs = load(file)?;
            let p = resolve(&defs, name1, file)?;
            let q = resolve(&defs, name2, file)?;
            let d = distinguish(&p, &q, *rooted, env.as_ref(), &opts)?;
            if json {
                #[derive(Serialize)]
                struct Report<'a> {
                    equivalent: bool,
                    #[serde(flatten)]
                    detail: Option<&'a Distinguished>,
                }
                print_json(&Report {
                    equivalent: d.is_none(),
                    detail: d.as_ref(),
                })?;
            } else {
                match &d {
                    None => println!("equivalent"),
                    Some(d) => {
                        println!("{}", d.formula);
                        println!("subclass: {}", d.subclass);
                        println!("holds in {name1}: {}", d.holds_in_p);
                        println!("holds in {name2}: {}", d.holds_in_q);
                    }
                }
            }
            Ok(d.is_none())
        }
        Command::Quotient { file, name, format: f } => {
            let defs = load(file)?;
            let p = resolve(&defs, name, file)?;
            let q = brb_quotient(&p, &opts)?;
            export(&q.lts, format(*f))?;
            Ok(true)
        }
        Command::FuzzAxioms {
            seed,
            count,
            axioms,
            sequential,
        } => {
            let axioms = if axioms.is_empty() { Axiom::ALL.to_vec() } else { axioms.clone() };
            let mode = if *sequential {
                Parallelism::Sequential
            } else {
                Parallelism::Parallel
            };
            let report = fuzz_axioms(*seed, *count, &axioms, &opts, mode);
            if json {
                print_json(&report)?;
            } else {
                print_report(&report);
            }
            Ok(report.all_ok())
        }
    }
}

fn load(file: &Path) -> Result<Definitions> {
    let text = if file.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        s
    } else {
        std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?
    };
    parse_file(&text).with_context(|| format!("parsing {}", file.display()))
}

/// A definition name, or failing that a term written inline.
fn resolve(defs: &Definitions, name: &str, file: &Path) -> Result<Term> {
    if let Some(t) = defs.get(name) {
        return Ok(t.clone());
    }
    if name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && name != "0" {
        bail!("`{name}` is not defined in {}", file.display());
    }
    defs.parse_term(name).with_context(|| format!("term `{name}`"))
}

fn export(lts: &Lts, format: Format) -> Result<()> {
    match format {
        Format::Aut => print!("{}", lts.export_aut()),
        Format::Json => print_json(&lts.to_json(true))?,
    }
    Ok(())
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn print_report(report: &AxiomReport) {
    println!("seed {} count {}", report.seed, report.count);
    for o in &report.axioms {
        let status = match (o.ok, o.expected_to_fail) {
            (true, false) => "ok",
            (true, true) => "fails as expected",
            (false, _) => "UNEXPECTED",
        };
        println!(
            "{:16} {:18} held {:3} vacuous {:3} failed {:3} errors {:3}  {}",
            o.axiom,
            status,
            o.held,
            o.vacuous,
            o.failed,
            o.errors,
            o.law
        );
        if let Some(c) = &o.counterexample {
            println!("    {}: {} vs {}", c.relation, c.lhs, c.rhs);
        }
        if let Some(e) = &o.first_error {
            println!("    error: {e}");
        }
    }
}
