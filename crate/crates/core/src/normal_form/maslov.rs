use std::collections::BTreeSet;

use super::NormalForm;
use crate::formula::{Binder, Formula, Quantifier, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConjunctKind {
    Existential,
    Universal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjunctShape {
    pub kind: ConjunctKind,
    pub index: usize,
    pub conforms: bool,
    /// Rendered atoms (or equalities) that break the shape.
    pub offending: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaslovReport {
    pub conforms: bool,
    pub conjuncts: Vec<ConjunctShape>,
}

fn literals(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::Atom(_) | Formula::Eq(..) => vec![f],
        _ => f.children().into_iter().flat_map(literals).collect(),
    }
}

/// Universal conjunct `∀x̄ ψ`: every atom has at most one variable of x̄ or
/// all of them.
fn check_universal(vars: &[Var], matrix: &Formula) -> Vec<String> {
    let all: BTreeSet<&Var> = vars.iter().collect();
    literals(matrix)
        .into_iter()
        .filter(|l| match l {
            Formula::Atom(a) => {
                let used: BTreeSet<&Var> = a.args.iter().filter(|v| all.contains(v)).collect();
                !(used.len() <= 1 || used == all)
            }
            _ => true,
        })
        .map(Formula::to_string)
        .collect()
}

/// Conjunct `Q₁z₁ … Q_lz_l ψ`: every atom has at most one z-variable, or its
/// highest-indexed z-variable is existentially quantified.
fn check_existential(prefix: &[Binder], matrix: &Formula) -> Vec<String> {
    literals(matrix)
        .into_iter()
        .filter(|l| match l {
            Formula::Atom(a) => {
                let positions: BTreeSet<usize> = a
                    .args
                    .iter()
                    .filter_map(|v| prefix.iter().position(|b| &b.var == v))
                    .collect();
                match positions.last() {
                    _ if positions.len() <= 1 => false,
                    Some(&j) => prefix[j].quantifier != Quantifier::Exists,
                    None => false,
                }
            }
            _ => true,
        })
        .map(Formula::to_string)
        .collect()
}

/// Checks every conjunct against the prenex shape of the Maslov class K̄:
/// universal conjuncts with atoms of kinds (i)/(ii), existential conjuncts
/// with atoms of kinds (i)/(iii). Equality is not allowed.
pub fn check_maslov_shape(nf: &NormalForm) -> MaslovReport {
    let mut conjuncts = Vec::new();
    for (index, c) in nf.existential.iter().enumerate() {
        let offending = check_existential(&c.prefix, &c.matrix);
        conjuncts.push(ConjunctShape {
            kind: ConjunctKind::Existential,
            index,
            conforms: offending.is_empty(),
            offending,
        });
    }
    for (index, c) in nf.universal.iter().enumerate() {
        let offending = check_universal(&c.vars, &c.matrix);
        conjuncts.push(ConjunctShape {
            kind: ConjunctKind::Universal,
            index,
            conforms: offending.is_empty(),
            offending,
        });
    }
    MaslovReport {
        conforms: conjuncts.iter().all(|c| c.conforms),
        conjuncts,
    }
}
