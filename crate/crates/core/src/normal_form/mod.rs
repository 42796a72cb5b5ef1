//! Weak normal form, 0-ary branch elimination and the normal form proper:
//! a conjunction of existential conjuncts (prefix ending with an
//! existential quantifier) and universal conjuncts (all-universal prefix)
//! over quantifier-free uniform matrices.

mod branches;
mod maslov;
mod simplify;
mod wnf;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::formula::{Binder, Formula, MembershipReport, Quantifier, Signature, Var};

pub use branches::{
    branch_at, branch_of_model, branch_with_bits, valuation_count, zero_ary_branches, Branch,
};
pub use maslov::{check_maslov_shape, ConjunctKind, ConjunctShape, MaslovReport};
pub use simplify::{substitute_nullary, Simplified};
pub use wnf::{expand_model, to_weak_normal_form};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalFormError {
    #[error("formula is outside the fragment: {0:?}")]
    Fragment(MembershipReport),
    #[error("formula has free variables: {0:?}")]
    NotClosed(Vec<Var>),
    #[error(
        "quantifier block with free variables {0:?} cannot be abbreviated by one fresh symbol"
    )]
    TooManyFree(Vec<Var>),
    #[error("structure does not satisfy the input formula")]
    NotAModel,
    #[error("structure error: {0}")]
    Structure(String),
}

/// One conjunct of a weak normal form: `guard → prefix matrix`. An empty
/// prefix marks the quantifier-free conjunct over 0-ary symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WnfConjunct {
    pub guard: Option<String>,
    pub prefix: Vec<Binder>,
    pub matrix: Formula,
}

impl WnfConjunct {
    /// The conjunct as a formula, with the guard folded in as `¬E ∨ …`.
    pub fn to_formula(&self) -> Formula {
        let body = if self.prefix.is_empty() {
            self.matrix.clone()
        } else {
            Formula::block(self.prefix.clone(), self.matrix.clone())
        };
        match &self.guard {
            None => body,
            Some(e) => Formula::Or(vec![
                Formula::not(Formula::atom(e, Vec::<Var>::new())),
                body,
            ]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreshKind {
    Unary,
    Nullary,
}

/// One abbreviation step: the block at `locator` (a child-index path in the
/// segmented input) was replaced by `symbol`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite {
    pub locator: Vec<usize>,
    pub symbol: String,
    pub kind: FreshKind,
    /// The free variable of the replaced block, for unary symbols.
    pub variable: Option<Var>,
    /// The replaced block after its own inner blocks were abbreviated.
    pub replaced: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakNormalForm {
    pub conjuncts: Vec<WnfConjunct>,
    /// Input signature plus every fresh symbol.
    pub signature: Signature,
    pub trace: Vec<Rewrite>,
}

impl WeakNormalForm {
    pub fn to_formula(&self) -> Formula {
        Formula::And(self.conjuncts.iter().map(WnfConjunct::to_formula).collect())
    }

    pub fn size(&self) -> usize {
        self.conjuncts.iter().map(|c| c.to_formula().size()).sum()
    }
}

/// `Q₁x₁ … Q_{k-1}x_{k-1} ∃x_k ψ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExistentialConjunct {
    pub prefix: Vec<Binder>,
    pub matrix: Formula,
}

impl ExistentialConjunct {
    pub fn k(&self) -> usize {
        self.prefix.len()
    }

    pub fn variables(&self) -> Vec<Var> {
        self.prefix.iter().map(|b| b.var.clone()).collect()
    }

    pub fn quantifier(&self, level: usize) -> Quantifier {
        self.prefix[level - 1].quantifier
    }

    /// `Q_{j+1}x_{j+1} … ψ`, free in `x₁ … x_j`.
    pub fn suffix(&self, j: usize) -> Formula {
        if j >= self.prefix.len() {
            self.matrix.clone()
        } else {
            Formula::block(self.prefix[j..].to_vec(), self.matrix.clone())
        }
    }

    pub fn to_formula(&self) -> Formula {
        self.suffix(0)
    }
}

/// `∀x₁ … x_l ψ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalConjunct {
    pub vars: Vec<Var>,
    pub matrix: Formula,
}

impl UniversalConjunct {
    pub fn l(&self) -> usize {
        self.vars.len()
    }

    pub fn to_formula(&self) -> Formula {
        Formula::block(
            self.vars.iter().cloned().map(Binder::forall).collect(),
            self.matrix.clone(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    /// Relations of positive arity only.
    pub signature: Signature,
    pub existential: Vec<ExistentialConjunct>,
    pub universal: Vec<UniversalConjunct>,
}

impl NormalForm {
    pub fn m_exists(&self) -> usize {
        self.existential.len()
    }

    /// The largest existential prefix length, 0 without existential conjuncts.
    pub fn k_max(&self) -> usize {
        self.existential.iter().map(|c| c.k()).max().unwrap_or(0)
    }

    /// Default bound on element-set sizes for compatibility checks: the
    /// largest universal prefix or relation arity, at least 1.
    pub fn m_max(&self) -> usize {
        let l = self.universal.iter().map(|c| c.l()).max().unwrap_or(0);
        l.max(self.signature.max_arity()).max(1)
    }

    pub fn to_formula(&self) -> Formula {
        Formula::And(
            self.existential
                .iter()
                .map(ExistentialConjunct::to_formula)
                .chain(self.universal.iter().map(UniversalConjunct::to_formula))
                .collect(),
        )
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

pub(crate) fn valuation_bits(valuation: &BTreeMap<String, bool>) -> String {
    valuation
        .values()
        .map(|&b| if b { '1' } else { '0' })
        .collect()
}
