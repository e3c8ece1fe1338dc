//! Bounded search for finite models of normal-form sentences in which the
//! order symbols are linear orders.
//!
//! Two independent routes are provided: a direct backtracking search over
//! structures ([`find_model`]) and a propositional grounding
//! ([`ground_to_cnf`]) solved by a small DPLL ([`solve_cnf`]). They are
//! checked against each other in the test suite.

mod cnf;
mod dpll;
mod search;

use thiserror::Error;

pub use cnf::{ground_to_cnf, ground_to_cnf_with, CnfInstance, GroundAtom, GroundOptions};
pub use dpll::{solve_clauses, solve_cnf, SolveResult};
pub use search::{
    find_model, find_model_up_to, find_model_up_to_with, find_model_with, SearchOptions, UpToResult,
};

use crate::qf::QfError;
use crate::structure::StructureError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FindError {
    #[error("structure size must be at least 1")]
    InvalidSize,
    #[error(transparent)]
    Compile(#[from] QfError),
    #[error("grounding needs {needed} variables, over the budget of {budget}")]
    VariableBudget { needed: usize, budget: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
