//! Finite structures, pre-structures, evaluation and 1-types.

mod compat;
pub(crate) mod eval;
mod structure;
mod types;

pub use compat::{complete_pre, is_forall_compatible, is_typeset_compatible, CompatError};
pub(crate) use compat::{typeset_compatible_with, UniversalPart};
pub use eval::{evaluate, Assignment, EvalError, Evaluator};
pub use structure::{all_tuples, Relation, Structure, StructureError};
pub(crate) use structure::{index_tuple, tuple_index};
pub use types::{
    covering_tuples, defined_tuples, evaluate_pre, one_type_of, pre_substructure, Fact, OneType,
    PreError, PreStructure,
};
