//! Satisfiability tools for the uniform one-dimensional fragment with
//! alternating quantifier blocks ending existentially.

pub mod forest;
pub mod formula;
mod ground;
pub mod normal_form;
pub mod semantics;
pub mod sexpr;
pub mod smallmodel;
pub mod solver;
