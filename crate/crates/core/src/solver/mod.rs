//! Finite satisfiability: exhaustive structure enumeration, bounded model
//! search, and the full decision pipeline with its completeness bound.

mod decide;
mod enumerate;
mod search;

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::formula::{MembershipReport, Var};
use crate::normal_form::NormalFormError;
use crate::semantics::{EvalError, Structure, StructureError};

pub use decide::{decide, theoretical_bound};
pub use enumerate::{count_structures, enumerate_structures, StructureEnumerator};
pub use search::{solve_bounded, solve_normal_form};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_size: usize,
    /// Skip models that are not lexicographically least among their
    /// element permutations.
    pub isomorphism_pruning: bool,
    pub time_budget: Option<Duration>,
}

impl SearchConfig {
    pub fn new(max_size: usize) -> Self {
        SearchConfig {
            max_size,
            isomorphism_pruning: false,
            time_budget: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    /// No model of size at most the bound.
    UnsatUpTo(usize),
    /// No model at all.
    UnsatComplete,
    Unknown(String),
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Sat => write!(f, "SAT"),
            Status::UnsatUpTo(n) => write!(f, "UNSAT-UP-TO {n}"),
            Status::UnsatComplete => write!(f, "UNSAT"),
            Status::Unknown(why) => write!(f, "UNKNOWN {why}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Search decisions made across every size and branch.
    pub nodes: u64,
    /// `(branch index, size)` pairs searched.
    pub searches: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    /// A model of the input, present exactly when the status is SAT.
    pub model: Option<Structure>,
    /// Bit string of the 0-ary valuation whose branch produced the model.
    pub branch: Option<String>,
    /// The model of that branch's normal form, fresh symbols included.
    pub witness: Option<Structure>,
    pub stats: SearchStats,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        self.status == Status::Sat
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("formula has free variables: {0:?}")]
    NotClosed(Vec<Var>),
    #[error("formula is outside the fragment: {0:?}")]
    Fragment(MembershipReport),
    #[error(transparent)]
    NormalForm(NormalFormError),
    #[error("too many 0-ary symbols to enumerate their valuations")]
    TooManyNullary,
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("max_size must be at least 1")]
    ZeroSize,
    #[error("internal fault: {0}")]
    Internal(String),
}

impl From<NormalFormError> for SolveError {
    fn from(e: NormalFormError) -> Self {
        match e {
            NormalFormError::Fragment(r) => SolveError::Fragment(r),
            NormalFormError::NotClosed(v) => SolveError::NotClosed(v),
            other => SolveError::NormalForm(other),
        }
    }
}
