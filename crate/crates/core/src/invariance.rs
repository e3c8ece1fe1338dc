//! Order-invariance checking and the reduction from finite validity.
//!
//! A sentence over `<=` fails to be order-invariant exactly when
//! `φ[<=/<=0] ∧ ¬φ[<=/<=1]` has a finite model; the bounded search for such
//! a model is the decision procedure. Sizes are tried in increasing order,
//! so counterexamples are as small as possible.

use serde_json::json;
use thiserror::Error;

use crate::formula::{parse, signature_of, Arity, Formula, OrderSym, Signature, SignatureError};
use crate::model_check::{evaluate, EvalError};
use crate::model_find::{find_model_up_to_with, FindError, SearchOptions};
use crate::normal_form::{normalize, FreshNames, NormalizeError};
use crate::structure::{Ranking, Structure, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvarianceError {
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Find(#[from] FindError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("cap must be at least 1")]
    InvalidCap,
    #[error("validity input may not mention order symbols (found `{0}`)")]
    OrderInValidityInput(OrderSym),
    #[error("counterexample check failed: {0}")]
    BadCounterexample(String),
}

/// A structure and two linear orders on which a sentence disagrees: true
/// under `ord0`, false under `ord1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    base: Structure,
    ord0: Ranking,
    ord1: Ranking,
    sentence: Formula,
}

impl Counterexample {
    /// Checks both defining conditions. `base` must not interpret orders.
    pub fn new(
        base: Structure,
        ord0: Ranking,
        ord1: Ranking,
        sentence: Formula,
    ) -> Result<Counterexample, InvarianceError> {
        let bad = |msg: &str| Err(InvarianceError::BadCounterexample(msg.into()));
        if OrderSym::ALL.iter().any(|&o| base.order(o).is_some()) {
            return bad("base structure interprets an order");
        }
        if ord0.len() != base.size() || ord1.len() != base.size() {
            return bad("ranking size differs from the universe size");
        }
        let cx = Counterexample {
            base,
            ord0,
            ord1,
            sentence,
        };
        if !evaluate(&cx.under(0), &cx.sentence)? {
            return bad("sentence is false under the first order");
        }
        if evaluate(&cx.under(1), &cx.sentence)? {
            return bad("sentence is true under the second order");
        }
        Ok(cx)
    }

    pub fn base(&self) -> &Structure {
        &self.base
    }

    pub fn ranking(&self, i: usize) -> &Ranking {
        if i == 0 {
            &self.ord0
        } else {
            &self.ord1
        }
    }

    pub fn sentence(&self) -> &Formula {
        &self.sentence
    }

    /// The base structure with `<=` interpreted by ranking `i`.
    pub fn under(&self, i: usize) -> Structure {
        let mut s = self.base.clone();
        s.set_order(OrderSym::Leq, self.ranking(i).clone())
            .expect("ranking size checked at construction");
        s
    }

    /// `{"sentence": .., "satisfied": <structure>, "falsified": <structure>}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "sentence": self.sentence.to_string(),
            "satisfied": self.under(0).to_json_value(),
            "falsified": self.under(1).to_json_value(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvarianceVerdict {
    NotInvariant(Counterexample),
    /// No counterexample up to `cap`; `bound` is the size that would make
    /// the answer complete, when representable.
    InvariantUpTo {
        cap: usize,
        bound: Option<u128>,
    },
    /// No counterexample up to `cap >= bound`: invariant on all finite
    /// structures.
    Invariant {
        cap: usize,
        bound: u128,
    },
}

impl InvarianceVerdict {
    pub fn is_invariant(&self) -> bool {
        !matches!(self, InvarianceVerdict::NotInvariant(_))
    }

    pub fn is_complete(&self) -> bool {
        !matches!(self, InvarianceVerdict::InvariantUpTo { .. })
    }
}

pub fn check_order_invariance(
    phi: &Formula,
    cap: usize,
) -> Result<InvarianceVerdict, InvarianceError> {
    check_order_invariance_with(phi, cap, &SearchOptions::default())
}

pub fn check_order_invariance_with(
    phi: &Formula,
    cap: usize,
    opts: &SearchOptions,
) -> Result<InvarianceVerdict, InvarianceError> {
    if cap == 0 {
        return Err(InvarianceError::InvalidCap);
    }
    let nf = normalize(phi)?;
    let res = find_model_up_to_with(&nf, cap, opts)?;
    let Some(model) = res.model else {
        return Ok(match res.bound {
            Some(bound) if res.complete => InvarianceVerdict::Invariant { cap, bound },
            bound => InvarianceVerdict::InvariantUpTo { cap, bound },
        });
    };
    let n = model.size();
    let rank = |o| {
        model
            .order(o)
            .cloned()
            .unwrap_or_else(|| Ranking::identity(n))
    };
    let (ord0, ord1) = (rank(OrderSym::Leq0), rank(OrderSym::Leq1));
    let sig = signature_of(phi)?;
    let mut base = model;
    for o in OrderSym::ALL {
        base.remove_order(o);
    }
    for name in nf.fresh_symbols() {
        if !sig.contains_name(name) {
            base.remove_predicate(name);
        }
    }
    Ok(InvarianceVerdict::NotInvariant(Counterexample::new(
        base,
        ord0,
        ord1,
        phi.clone(),
    )?))
}

/// Answer of the validity reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityOutcome {
    pub valid: bool,
    /// The answer holds on all finite structures, not only up to the cap.
    pub exact: bool,
    /// A one-element model of `¬φ`, when the corner case decided the answer.
    pub single_element_countermodel: Option<Structure>,
    /// The invariance counterexample for `(¬φ) -> ψ`, when one was found.
    pub counterexample: Option<Counterexample>,
    /// The sentence whose invariance was checked.
    pub reduced: Option<Formula>,
}

/// All one-element structures over `sig`, in the order of the bit pattern
/// of their atoms.
fn one_element_structures(sig: &Signature) -> impl Iterator<Item = Structure> + '_ {
    let atoms: Vec<(&str, Arity)> = sig.predicates().collect();
    (0u64..1 << atoms.len()).map(move |bits| {
        let mut s = Structure::new(1).expect("non-empty");
        for (k, &(name, arity)) in atoms.iter().enumerate() {
            let on = bits >> k & 1 == 1;
            match arity {
                Arity::Unary => s.set_unary(name, on.then_some(0)),
                Arity::Binary => s.set_binary(name, on.then_some((0, 0))),
            }
            .expect("element in range");
        }
        s
    })
}

/// The gadget `exists x. (P(x) & forall y. (y <= x))` for a given `P`.
pub fn max_gadget(p: &str) -> Formula {
    parse(&format!("exists x. ({p}(x) & forall y. (y <= x))")).expect("gadget parses")
}

/// Finite validity of an order-free sentence through order-invariance:
/// `φ` is valid iff `¬φ` has no one-element model and `(¬φ) -> ψ` is
/// order-invariant, where `ψ` says a fresh `P` holds at the maximum.
pub fn reduce_validity(phi: &Formula, cap: usize) -> Result<ValidityOutcome, InvarianceError> {
    reduce_validity_with(phi, cap, &SearchOptions::default())
}

pub fn reduce_validity_with(
    phi: &Formula,
    cap: usize,
    opts: &SearchOptions,
) -> Result<ValidityOutcome, InvarianceError> {
    if let Some(&o) = phi.order_symbols().iter().next() {
        return Err(InvarianceError::OrderInValidityInput(o));
    }
    if let Some(v) = phi.free_vars().into_iter().next() {
        return Err(NormalizeError::NotASentence(v).into());
    }
    if cap == 0 {
        return Err(InvarianceError::InvalidCap);
    }
    let sig = signature_of(phi)?;
    for s in one_element_structures(&sig) {
        if !evaluate(&s, phi)? {
            return Ok(ValidityOutcome {
                valid: false,
                exact: true,
                single_element_countermodel: Some(s),
                counterexample: None,
                reduced: None,
            });
        }
    }
    let p = FreshNames::new("_P", &sig).fresh();
    let reduced = Formula::implies(Formula::not(phi.clone()), max_gadget(&p));
    let verdict = check_order_invariance_with(&reduced, cap, opts)?;
    let exact = verdict.is_complete();
    Ok(match verdict {
        InvarianceVerdict::NotInvariant(cx) => ValidityOutcome {
            valid: false,
            exact,
            single_element_countermodel: None,
            counterexample: Some(cx),
            reduced: Some(reduced),
        },
        _ => ValidityOutcome {
            valid: true,
            exact,
            single_element_countermodel: None,
            counterexample: None,
            reduced: Some(reduced),
        },
    })
}
