use std::time::Instant;

use super::enumerate::{atom_permutation, structure_from_bits, table_layout};
use super::{SearchConfig, SearchStats, SolveError, SolveResult, Status};
use crate::formula::{free_variables, Formula, Signature};
use crate::ground::{ground, solve, Cnf, Limits, Lit, Outcome, Val};
use crate::normal_form::NormalForm;
use crate::semantics::eval::{compile, Compiled};
use crate::semantics::{tuple_index, EvalError, Structure};

pub(crate) enum SizeOutcome {
    Model(Structure),
    NoModel,
    Timeout,
}

/// A closed formula compiled for repeated searches over one signature.
pub(crate) struct Problem<'a> {
    compiled: Compiled,
    sig: &'a Signature,
    /// Position in `sig` of every relation referenced by `compiled`.
    rel_pos: Vec<usize>,
}

impl<'a> Problem<'a> {
    pub fn new(f: &Formula, sig: &'a Signature) -> Result<Self, SolveError> {
        let fv = free_variables(f);
        if !fv.is_empty() {
            return Err(SolveError::NotClosed(fv.into_iter().collect()));
        }
        let compiled = compile(f);
        let names: Vec<(&str, usize)> = sig.relations().collect();
        let rel_pos = compiled
            .relations
            .iter()
            .map(|(name, arity)| {
                let pos = names
                    .iter()
                    .position(|(n, _)| n == name)
                    .ok_or_else(|| EvalError::UnknownRelation(name.clone()))?;
                if names[pos].1 != *arity {
                    return Err(EvalError::Arity {
                        rel: name.clone(),
                        expected: names[pos].1,
                        found: *arity,
                    });
                }
                Ok(pos)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Problem {
            compiled,
            sig,
            rel_pos,
        })
    }

    /// The least model of size `n` in enumeration order, if any.
    pub fn search(
        &self,
        n: usize,
        prune: bool,
        deadline: Option<Instant>,
        nodes: &mut u64,
    ) -> Result<SizeOutcome, SolveError> {
        Structure::empty(self.sig, n)?;
        let layout = table_layout(self.sig, n);
        let mut offsets = Vec::with_capacity(layout.len());
        let mut total = 0;
        for &(_, len) in &layout {
            offsets.push(total);
            total += len;
        }
        let mut cnf = Cnf::new(total);
        let mut env = vec![0; self.compiled.slots];
        let mut atom = |rel: usize, tuple: &[usize]| -> Result<Val, SolveError> {
            let pos = self.rel_pos[rel];
            Ok(Val::Lit(Lit::new(
                offsets[pos] + tuple_index(n, tuple),
                true,
            )))
        };
        let v = ground(&mut cnf, &self.compiled.root, n, &mut env, &mut atom)?;
        cnf.assert(v);
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Ok(SizeOutcome::Timeout);
        }
        let symmetries = if prune {
            (0..n.saturating_sub(1))
                .map(|i| {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.swap(i, i + 1);
                    atom_permutation(&layout, n, &p)
                })
                .collect()
        } else {
            Vec::new()
        };
        let limits = Limits {
            deadline,
            symmetries,
        };
        Ok(match solve(&cnf, &limits, nodes) {
            Outcome::Sat(bits) => SizeOutcome::Model(structure_from_bits(self.sig, n, &bits)?),
            Outcome::Unsat => SizeOutcome::NoModel,
            Outcome::Timeout => SizeOutcome::Timeout,
        })
    }
}

/// Searches sizes `1..=cfg.max_size` in order and returns the first model
/// found, which is the least one of its size in enumeration order.
pub fn solve_bounded(
    f: &Formula,
    sig: &Signature,
    cfg: &SearchConfig,
) -> Result<SolveResult, SolveError> {
    if cfg.max_size == 0 {
        return Err(SolveError::ZeroSize);
    }
    let start = Instant::now();
    let deadline = cfg.time_budget.map(|b| start + b);
    let problem = Problem::new(f, sig)?;
    let mut stats = SearchStats::default();
    for n in 1..=cfg.max_size {
        stats.searches += 1;
        let outcome = problem.search(n, cfg.isomorphism_pruning, deadline, &mut stats.nodes)?;
        stats.elapsed = start.elapsed();
        match outcome {
            SizeOutcome::Model(m) => {
                return Ok(SolveResult {
                    status: Status::Sat,
                    model: Some(m),
                    branch: None,
                    witness: None,
                    stats,
                })
            }
            SizeOutcome::NoModel => {}
            SizeOutcome::Timeout => {
                return Ok(SolveResult {
                    status: Status::Unknown(format!("time budget exhausted at size {n}")),
                    model: None,
                    branch: None,
                    witness: None,
                    stats,
                })
            }
        }
    }
    stats.elapsed = start.elapsed();
    Ok(SolveResult {
        status: Status::UnsatUpTo(cfg.max_size),
        model: None,
        branch: None,
        witness: None,
        stats,
    })
}

pub fn solve_normal_form(nf: &NormalForm, cfg: &SearchConfig) -> Result<SolveResult, SolveError> {
    solve_bounded(&nf.to_formula(), &nf.signature, cfg)
}
