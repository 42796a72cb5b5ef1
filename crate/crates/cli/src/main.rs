//! Command-line front end for the AUF1 satisfiability toolkit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use auf1::forest::{build_model, extract_forest, parse_forest, render_forest, verify_forest};
use auf1::formula::{check_fragment, parse_problem, render_formula, to_nnf, Fragment, Problem};
use auf1::normal_form::{
    branch_at, branch_of_model, branch_with_bits, expand_model, to_weak_normal_form,
    valuation_count, zero_ary_branches, Branch, WeakNormalForm,
};
use auf1::semantics::{Evaluator, Structure};
use auf1::smallmodel::{build_ext, shrink};
use auf1::solver::{decide, solve_bounded, SearchConfig, SolveError, Status};

const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "auf1",
    version,
    about = "Satisfiability tools for the AUF1 fragment"
)]
struct Cli {
    /// Accept `=` in formulas.
    #[arg(long, global = true)]
    allow_equality: bool,
    /// Write the main output here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fragment membership: ACCEPT or REJECT.
    Check {
        #[arg(long)]
        fragment: Fragment,
        file: PathBuf,
    },
    /// Negation normal form.
    Nnf { file: PathBuf },
    /// Weak normal form, or the normal form of one or all 0-ary branches.
    Normalize {
        file: PathBuf,
        #[arg(long, conflicts_with = "all")]
        branch: Option<String>,
        #[arg(long)]
        all: bool,
        /// With `--all`, write one file per branch into this directory.
        #[arg(long, requires = "all")]
        out_dir: Option<PathBuf>,
    },
    /// Finite satisfiability up to a domain size.
    Solve {
        file: PathBuf,
        #[arg(long)]
        max_size: usize,
        #[arg(long)]
        prune_iso: bool,
        /// Wall-clock budget in whole seconds.
        #[arg(long)]
        time_budget: Option<u64>,
    },
    /// Does STRUCT satisfy FORMULA: PASS or FAIL.
    ModelCheck {
        formula: PathBuf,
        structure: PathBuf,
    },
    /// Satisfaction forest read off a model.
    ForestExtract {
        formula: PathBuf,
        structure: PathBuf,
        #[command(flatten)]
        branch: BranchArg,
    },
    /// Checks a forest against its conditions: PASS or FAIL.
    ForestVerify {
        formula: PathBuf,
        forest: PathBuf,
        #[command(flatten)]
        branch: BranchArg,
    },
    /// Model built from a verified forest.
    ForestToModel {
        formula: PathBuf,
        forest: PathBuf,
        #[command(flatten)]
        branch: BranchArg,
    },
    /// Rebuilds a model over the bounded small domain.
    Shrink {
        formula: PathBuf,
        structure: PathBuf,
    },
    /// Extension function for K.
    ExtFn { k: usize },
}

#[derive(Args, Debug)]
struct BranchArg {
    /// 0-ary valuation selecting the normal form, one bit per 0-ary symbol.
    #[arg(long)]
    branch: Option<String>,
}

/// Main output plus exit code.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn new(text: String, code: u8) -> Self {
        Outcome { text, code }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_problem(path: &Path, eq: bool) -> Result<Problem> {
    let text = read(path)?;
    parse_problem(&text, eq).map_err(|e| anyhow!("{}:{e}", path.display()))
}

fn load_structure(path: &Path, p: &Problem) -> Result<Structure> {
    let text = read(path)?;
    Structure::parse(&text, &p.signature).map_err(|e| anyhow!("{}:{e}", path.display()))
}

fn weak_normal_form(p: &Problem) -> Result<WeakNormalForm> {
    Ok(to_weak_normal_form(&p.formula, &p.signature)?)
}

/// The branch named by `bits`, or else the first satisfiable-looking one.
fn select_branch(w: &WeakNormalForm, bits: Option<&str>) -> Result<Branch> {
    if let Some(bits) = bits {
        return branch_with_bits(w, bits)
            .ok_or_else(|| anyhow!("no branch with valuation {bits:?}"));
    }
    let count = valuation_count(w).ok_or_else(|| anyhow!("too many 0-ary symbols"))?;
    let b = (0..count)
        .find_map(|i| branch_at(w, i))
        .ok_or_else(|| anyhow!("every 0-ary valuation falsifies the formula"))?;
    if count > 1 {
        eprintln!("using branch {:?}", b.bits);
    }
    Ok(b)
}

/// The expanded model restricted to the branch its 0-ary values select.
fn model_branch(p: &Problem, s: &Structure, bits: Option<&str>) -> Result<(Branch, Structure)> {
    let w = weak_normal_form(p)?;
    let expanded = expand_model(s, &p.formula, &w)?;
    let b = match bits {
        Some(bits) => branch_with_bits(&w, bits)
            .ok_or_else(|| anyhow!("no branch with valuation {bits:?}"))?,
        None => branch_of_model(&w, &expanded).ok_or_else(|| anyhow!("model selects no branch"))?,
    };
    if !b.bits.is_empty() {
        eprintln!("branch {:?}", b.bits);
    }
    let restricted = b.restrict(&expanded);
    Ok((b, restricted))
}

fn problem_text(sig: &auf1::formula::Signature, f: &auf1::formula::Formula) -> String {
    format!("{}{}\n", sig.render_decls(), render_formula(f))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let eq = cli.allow_equality;
    match &cli.command {
        Command::Check { fragment, file } => {
            let p = load_problem(file, eq)?;
            let r = check_fragment(&p.formula, *fragment, eq);
            let mut out = String::new();
            writeln!(out, "{}", if r.accepted { "ACCEPT" } else { "REJECT" })?;
            for v in &r.violations {
                writeln!(out, "{v}")?;
            }
            for n in &r.notes {
                writeln!(out, "note: {n}")?;
            }
            Ok(Outcome::new(out, if r.accepted { 0 } else { 1 }))
        }
        Command::Nnf { file } => {
            let p = load_problem(file, eq)?;
            Ok(Outcome::new(
                problem_text(&p.signature, &to_nnf(&p.formula)),
                0,
            ))
        }
        Command::Normalize {
            file,
            branch,
            all,
            out_dir,
        } => {
            let p = load_problem(file, eq)?;
            let w = weak_normal_form(&p)?;
            if let Some(bits) = branch {
                let b = branch_with_bits(&w, bits)
                    .ok_or_else(|| anyhow!("no branch with valuation {bits:?}"))?;
                let nf = &b.normal_form;
                return Ok(Outcome::new(
                    problem_text(&nf.signature, &nf.to_formula()),
                    0,
                ));
            }
            if !*all {
                return Ok(Outcome::new(problem_text(&w.signature, &w.to_formula()), 0));
            }
            let mut out = String::new();
            for b in zero_ary_branches(&w) {
                let text = problem_text(&b.normal_form.signature, &b.normal_form.to_formula());
                match out_dir {
                    Some(dir) => {
                        fs::create_dir_all(dir)
                            .with_context(|| format!("cannot create {}", dir.display()))?;
                        let path = dir.join(format!("branch_{}.fol", b.bits));
                        fs::write(&path, &text)
                            .with_context(|| format!("cannot write {}", path.display()))?;
                        writeln!(out, "{}", path.display())?;
                    }
                    None => {
                        writeln!(out, "; branch {:?}", b.bits)?;
                        out.push_str(&text);
                    }
                }
            }
            Ok(Outcome::new(out, 0))
        }
        Command::Solve {
            file,
            max_size,
            prune_iso,
            time_budget,
        } => {
            let p = load_problem(file, eq)?;
            let cfg = SearchConfig {
                max_size: *max_size,
                isomorphism_pruning: *prune_iso,
                time_budget: time_budget.map(Duration::from_secs),
            };
            let r = match decide(&p.formula, &p.signature, &cfg) {
                Err(SolveError::Fragment(report)) => {
                    eprintln!("outside AUF1-; bounded search only");
                    for v in &report.violations {
                        eprintln!("  {v}");
                    }
                    solve_bounded(&p.formula, &p.signature, &cfg)?
                }
                other => other?,
            };
            let mut out = format!("{}\n", r.status);
            if let Some(m) = &r.model {
                out.push_str(&m.to_string());
            }
            if let Some(b) = r.branch.as_ref().filter(|b| !b.is_empty()) {
                eprintln!("branch {b:?}");
            }
            eprintln!(
                "searches {}, nodes {}, {:.3}s",
                r.stats.searches,
                r.stats.nodes,
                r.stats.elapsed.as_secs_f64()
            );
            let code = match r.status {
                Status::Sat => 0,
                Status::UnsatComplete => 1,
                Status::UnsatUpTo(_) | Status::Unknown(_) => 2,
            };
            Ok(Outcome::new(out, code))
        }
        Command::ModelCheck { formula, structure } => {
            let p = load_problem(formula, eq)?;
            let s = load_structure(structure, &p)?;
            let holds = Evaluator::new(&p.formula).holds(&s)?;
            Ok(Outcome::new(
                format!("{}\n", if holds { "PASS" } else { "FAIL" }),
                if holds { 0 } else { 1 },
            ))
        }
        Command::ForestExtract {
            formula,
            structure,
            branch,
        } => {
            let p = load_problem(formula, eq)?;
            let s = load_structure(structure, &p)?;
            let (b, restricted) = model_branch(&p, &s, branch.branch.as_deref())?;
            let fst = extract_forest(&restricted, &b.normal_form)?;
            Ok(Outcome::new(render_forest(&fst), 0))
        }
        Command::ForestVerify {
            formula,
            forest,
            branch,
        } => {
            let p = load_problem(formula, eq)?;
            let w = weak_normal_form(&p)?;
            let b = select_branch(&w, branch.branch.as_deref())?;
            let text = read(forest)?;
            let fst = parse_forest(&text, &b.normal_form.signature)
                .map_err(|e| anyhow!("{}:{e}", forest.display()))?;
            let report = verify_forest(&fst, &b.normal_form);
            let ok = report.passed();
            Ok(Outcome::new(
                format!("{}\n{report}\n", if ok { "PASS" } else { "FAIL" }),
                if ok { 0 } else { 1 },
            ))
        }
        Command::ForestToModel {
            formula,
            forest,
            branch,
        } => {
            let p = load_problem(formula, eq)?;
            let w = weak_normal_form(&p)?;
            let b = select_branch(&w, branch.branch.as_deref())?;
            let text = read(forest)?;
            let fst = parse_forest(&text, &b.normal_form.signature)
                .map_err(|e| anyhow!("{}:{e}", forest.display()))?;
            let model = build_model(&fst, &b.normal_form)?;
            Ok(Outcome::new(
                b.project(&model, &p.signature)?.to_string(),
                0,
            ))
        }
        Command::Shrink { formula, structure } => {
            let p = load_problem(formula, eq)?;
            let s = load_structure(structure, &p)?;
            let (b, restricted) = model_branch(&p, &s, None)?;
            let small = shrink(&restricted, &b.normal_form)?;
            eprintln!(
                "source size {}, small domain size {}",
                s.size(),
                small.model.size()
            );
            Ok(Outcome::new(
                b.project(&small.model, &p.signature)?.to_string(),
                0,
            ))
        }
        Command::ExtFn { k } => {
            let e = build_ext(*k)?;
            if let Err(why) = e.check() {
                bail!("extension function invariant broken: {why}");
            }
            Ok(Outcome::new(e.to_string(), 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let written = match &cli.output {
                Some(path) => fs::write(path, &outcome.text)
                    .with_context(|| format!("cannot write {}", path.display())),
                None => {
                    print!("{}", outcome.text);
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::from(outcome.code),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_INPUT)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
