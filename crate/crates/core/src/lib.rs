//! Order-invariance for two-variable first-order logic.
//!
//! The pipeline: [`formula`] parses sentences, [`normal_form`] brings
//! `φ[<=/<=0] ∧ ¬φ[<=/<=1]` into Scott normal form, [`model_find`] searches
//! for finite models of it (directly or through CNF), and [`invariance`]
//! turns models into counterexamples. [`shrink`] implements the small-model
//! construction that bounds the search.

pub mod cli;
pub mod formula;
pub mod invariance;
pub mod model_check;
pub mod model_find;
pub mod normal_form;
pub mod qf;
pub mod shrink;
pub mod structure;
pub mod types;

pub use formula::{parse, render, Formula, OrderSym, Signature};
pub use invariance::{check_order_invariance, reduce_validity, Counterexample, InvarianceVerdict};
pub use model_check::evaluate;
pub use normal_form::{normalize, size_bound, NormalForm};
pub use structure::{Ranking, Structure};
