//! Shrinking a model of a normal form to one over a fixed product domain
//! whose size depends only on the normal form and the realized 1-types.

mod domain;
mod ext;
mod matching;
mod shrink;

use thiserror::Error;

use crate::forest::ForestError;
use crate::semantics::EvalError;

pub use domain::{build_small_domain, t_pool, SmallDomain};
pub use ext::{build_ext, subsets, ExtensionFunction};
pub use matching::{hall_matching, BipartiteGraph, HallViolation};
pub use shrink::{shrink, Shrunk};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmallModelError {
    #[error("K must be at least 1")]
    ZeroK,
    #[error("no covering matching at level {level}: {violation:?}")]
    Hall {
        level: usize,
        violation: HallViolation,
    },
    #[error("normal form has no existential conjunct")]
    NoExistential,
    #[error("source structure is empty")]
    EmptySource,
    #[error("source structure does not satisfy the normal form")]
    NotAModel,
    #[error("extension function undefined on layers {0:?}")]
    ExtUndefined(Vec<usize>),
    #[error("no unused leaf label left in the t-coordinate pool")]
    PoolExhausted,
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Forest(#[from] ForestError),
}
