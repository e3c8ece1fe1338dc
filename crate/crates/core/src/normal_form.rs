//! Scott-style normal form for non-invariance formulas.
//!
//! [`normalize`] turns `φ` over `<=` into the normal form of
//! `φ[<=/<=0] ∧ ¬φ[<=/<=1]`:
//!
//! ```text
//! ∀x∀y χ0 ∧ ⋀_j ∀x∃y γ0^j ∧ ∀x∀y χ1 ∧ ⋀_j ∀x∃y γ1^j
//! ```
//!
//! with quantifier-free `χi`, `γi^j` and `<=i` absent from half `1-i`.
//! Each half is transformed separately: innermost quantified subformulas
//! `Qv θ` are replaced by fresh unary atoms `_Sk(u)` and defining conjuncts
//! are added according to the polarity of the occurrence. The output is
//! satisfiable over the same universe as the input: a model of the input
//! expands to a model of the output by interpreting `_Sk` as the truth set
//! of the replaced subformula.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{
    signature_of, substitute_order, Arity, Formula, OrderSym, Signature, SignatureError,
    SubstituteError, Var,
};
use crate::types::{TypeError, TypeLayout};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("input is not a sentence (free variable {0})")]
    NotASentence(Var),
    #[error(transparent)]
    Substitute(#[from] SubstituteError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("half {half} mentions `{order}`, which belongs to the other half")]
    OrderSeparation { half: usize, order: OrderSym },
    #[error("normal-form halves may not mention the plain order `<=`")]
    PlainOrder,
    #[error("normal-form component is not quantifier-free: {0}")]
    Quantified(String),
    #[error("normal-form component uses `{0}`, which is not in the signature")]
    MissingSymbol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Polarity {
    Positive,
    Negative,
    Both,
}

impl Polarity {
    fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
            Polarity::Both => Polarity::Both,
        }
    }

    fn positive(self) -> bool {
        self != Polarity::Negative
    }

    fn negative(self) -> bool {
        self != Polarity::Positive
    }
}

/// Deterministic fresh predicate names `<prefix>0`, `<prefix>1`, ...
/// skipping names that are already taken.
#[derive(Debug, Clone)]
pub struct FreshNames {
    prefix: &'static str,
    next: usize,
    taken: BTreeSet<String>,
}

impl FreshNames {
    pub fn new(prefix: &'static str, avoid: &Signature) -> FreshNames {
        FreshNames {
            prefix,
            next: 0,
            taken: avoid.predicates().map(|(n, _)| n.to_string()).collect(),
        }
    }

    pub fn fresh(&mut self) -> String {
        loop {
            let name = format!("{}{}", self.prefix, self.next);
            self.next += 1;
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

#[derive(Default)]
struct Half {
    chi: Vec<Formula>,
    gammas: Vec<Formula>,
    fresh: Vec<String>,
}

impl Half {
    /// Returns the quantifier-free replacement of `f`.
    fn scott(&mut self, f: &Formula, pol: Polarity, names: &mut FreshNames) -> Formula {
        match f {
            Formula::Unary(..) | Formula::Binary(..) | Formula::Eq(..) | Formula::Order(..) => {
                f.clone()
            }
            Formula::Not(a) => Formula::not(self.scott(a, pol.flip(), names)),
            Formula::And(a, b) => {
                Formula::and(self.scott(a, pol, names), self.scott(b, pol, names))
            }
            Formula::Or(a, b) => Formula::or(self.scott(a, pol, names), self.scott(b, pol, names)),
            Formula::Implies(a, b) => {
                Formula::implies(self.scott(a, pol.flip(), names), self.scott(b, pol, names))
            }
            Formula::Iff(a, b) => Formula::iff(
                self.scott(a, Polarity::Both, names),
                self.scott(b, Polarity::Both, names),
            ),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let inner = self.scott(body, pol, names);
                // Put the quantified variable in the y position.
                let theta = match v {
                    Var::Y => inner,
                    Var::X => inner.swap_vars(),
                };
                let name = names.fresh();
                self.fresh.push(name.clone());
                let fx = Formula::unary(name.clone(), Var::X);
                if matches!(f, Formula::Exists(..)) {
                    if pol.positive() {
                        self.gammas
                            .push(Formula::implies(fx.clone(), theta.clone()));
                    }
                    if pol.negative() {
                        self.chi.push(Formula::implies(theta, fx));
                    }
                } else {
                    if pol.positive() {
                        self.chi.push(Formula::implies(fx.clone(), theta.clone()));
                    }
                    if pol.negative() {
                        self.gammas.push(Formula::implies(theta, fx));
                    }
                }
                Formula::unary(name, v.other())
            }
        }
    }
}

/// The normal form `∀∀χ0 ∧ ⋀∀∃γ0 ∧ ∀∀χ1 ∧ ⋀∀∃γ1` over an extended signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    chi: [Formula; 2],
    gammas: [Vec<Formula>; 2],
    signature: Signature,
    /// Symbols introduced by normalization, in creation order.
    fresh: Vec<String>,
}

impl NormalForm {
    /// Builds and checks a normal form from its parts. `signature` must
    /// contain every symbol used.
    pub fn new(
        chi: [Formula; 2],
        gammas: [Vec<Formula>; 2],
        signature: Signature,
    ) -> Result<NormalForm, NormalizeError> {
        let nf = NormalForm {
            chi,
            gammas,
            signature,
            fresh: Vec::new(),
        };
        nf.check_shape()?;
        Ok(nf)
    }

    pub fn chi(&self, i: usize) -> &Formula {
        &self.chi[i]
    }

    pub fn gammas(&self, i: usize) -> &[Formula] {
        &self.gammas[i]
    }

    /// `m_i`, the number of ∀∃ conjuncts of half `i`.
    pub fn m(&self, i: usize) -> usize {
        self.gammas[i].len()
    }

    /// `M = max(m0, m1)`.
    pub fn max_m(&self) -> usize {
        self.m(0).max(self.m(1))
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn fresh_symbols(&self) -> &[String] {
        &self.fresh
    }

    /// All ∀∃ conjuncts as `(i, j, γ)` with `j` counted from 1.
    pub fn witness_conjuncts(&self) -> impl Iterator<Item = (usize, usize, &Formula)> {
        (0..2).flat_map(move |i| {
            self.gammas[i]
                .iter()
                .enumerate()
                .map(move |(j, g)| (i, j + 1, g))
        })
    }

    /// The normal form as a single sentence.
    pub fn sentence(&self) -> Formula {
        Formula::conjunction(self.conjuncts()).expect("two universal conjuncts always exist")
    }

    /// The conjuncts in order: ∀∀χ0, ∀∃γ0^j, ∀∀χ1, ∀∃γ1^j.
    pub fn conjuncts(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        for i in 0..2 {
            out.push(Formula::forall(
                Var::X,
                Formula::forall(Var::Y, self.chi[i].clone()),
            ));
            for g in &self.gammas[i] {
                out.push(Formula::forall(Var::X, Formula::exists(Var::Y, g.clone())));
            }
        }
        out
    }

    /// Checks quantifier-freeness, order separation and signature coverage.
    pub fn check_shape(&self) -> Result<(), NormalizeError> {
        for i in 0..2 {
            let other = OrderSym::indexed(1 - i);
            for part in std::iter::once(&self.chi[i]).chain(&self.gammas[i]) {
                if !part.is_quantifier_free() {
                    return Err(NormalizeError::Quantified(part.to_string()));
                }
                let orders = part.order_symbols();
                if orders.contains(&OrderSym::Leq) {
                    return Err(NormalizeError::PlainOrder);
                }
                if orders.contains(&other) {
                    return Err(NormalizeError::OrderSeparation {
                        half: i,
                        order: other,
                    });
                }
                let used = signature_of(part)?;
                if let Some((name, _)) = used
                    .predicates()
                    .find(|(n, a)| self.signature.arity(n) != Some(*a))
                {
                    return Err(NormalizeError::MissingSymbol(name.to_string()));
                }
                if let Some(o) = used.orders().difference(self.signature.orders()).next() {
                    return Err(NormalizeError::MissingSymbol(o.key().to_string()));
                }
            }
        }
        Ok(())
    }

    /// Reads a sentence that is already a conjunction of `forall x. forall
    /// y. χ` and `forall x. exists y. γ` conjuncts with quantifier-free
    /// matrices over `<=0`/`<=1`. Each conjunct goes to the half of the order
    /// it mentions. Returns `None` for any other shape.
    pub fn recognize(f: &Formula) -> Option<NormalForm> {
        fn flatten<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    flatten(a, out);
                    flatten(b, out);
                }
                other => out.push(other),
            }
        }
        let mut parts = Vec::new();
        flatten(f, &mut parts);
        let mut chis: [Vec<Formula>; 2] = Default::default();
        let mut gammas: [Vec<Formula>; 2] = Default::default();
        for part in parts {
            let Formula::Forall(Var::X, inner) = part else {
                return None;
            };
            let (universal, matrix) = match &**inner {
                Formula::Forall(Var::Y, m) => (true, m),
                Formula::Exists(Var::Y, m) => (false, m),
                _ => return None,
            };
            if !matrix.is_quantifier_free() {
                return None;
            }
            let orders = matrix.order_symbols();
            if orders.contains(&OrderSym::Leq)
                || (orders.contains(&OrderSym::Leq0) && orders.contains(&OrderSym::Leq1))
            {
                return None;
            }
            let i = usize::from(orders.contains(&OrderSym::Leq1));
            if universal {
                chis[i].push((**matrix).clone());
            } else {
                gammas[i].push((**matrix).clone());
            }
        }
        let [c0, c1] = chis.map(|c| Formula::conjunction(c).unwrap_or_else(Formula::top));
        NormalForm::new([c0, c1], gammas, signature_of(f).ok()?).ok()
    }

    /// Normal form of an arbitrary sentence over `<=0`/`<=1`. The sentence
    /// goes into the half of the order it mentions; the other half is
    /// trivial. Plain `<=` is rejected.
    pub fn from_sentence(f: &Formula) -> Result<NormalForm, NormalizeError> {
        let orders = f.order_symbols();
        if orders.contains(&OrderSym::Leq) {
            return Err(NormalizeError::PlainOrder);
        }
        if orders.contains(&OrderSym::Leq1) {
            if orders.contains(&OrderSym::Leq0) {
                return Err(NormalizeError::OrderSeparation {
                    half: 0,
                    order: OrderSym::Leq1,
                });
            }
            NormalForm::from_halves(&Formula::top(), f)
        } else {
            NormalForm::from_halves(f, &Formula::top())
        }
    }

    /// Normal form of `half0 ∧ half1`, where `half0` does not mention
    /// `<=1` and `half1` does not mention `<=0`.
    pub fn from_halves(half0: &Formula, half1: &Formula) -> Result<NormalForm, NormalizeError> {
        let halves = [half0, half1];
        let mut signature = Signature::new();
        for (i, h) in halves.iter().enumerate() {
            // `top()` is the constant true matrix; it stands for an empty half.
            let trivial = **h == Formula::top();
            if let Some(v) = h.free_vars().into_iter().next().filter(|_| !trivial) {
                return Err(NormalizeError::NotASentence(v));
            }
            let sig = signature_of(h)?;
            if sig.has_order(OrderSym::Leq) {
                return Err(NormalizeError::PlainOrder);
            }
            let other = OrderSym::indexed(1 - i);
            if sig.has_order(other) {
                return Err(NormalizeError::OrderSeparation {
                    half: i,
                    order: other,
                });
            }
            signature.merge(&sig)?;
        }
        let mut names = FreshNames::new("_S", &signature);
        let mut parts: Vec<Half> = Vec::new();
        for h in halves {
            let mut half = Half::default();
            let top = half.scott(h, Polarity::Positive, &mut names);
            half.chi.push(top);
            parts.push(half);
        }
        let mut fresh = Vec::new();
        for p in &parts {
            for name in &p.fresh {
                signature.add_predicate(name, Arity::Unary)?;
                fresh.push(name.clone());
            }
        }
        let [h0, h1]: [Half; 2] = parts.try_into().unwrap_or_else(|_| unreachable!());
        let nf = NormalForm {
            chi: [
                Formula::conjunction(h0.chi).expect("top conjunct"),
                Formula::conjunction(h1.chi).expect("top conjunct"),
            ],
            gammas: [h0.gammas, h1.gammas],
            signature,
            fresh,
        };
        debug_assert_eq!(nf.check_shape(), Ok(()));
        Ok(nf)
    }

    /// Number of 1-types over the extended signature.
    pub fn one_type_count(&self) -> Result<u64, TypeError> {
        Ok(TypeLayout::new(&self.signature)?.one_type_count())
    }
}

impl fmt::Display for NormalForm {
    /// One conjunct per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.conjuncts() {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// The non-invariance formula `φ[<=/<=0] ∧ ¬φ[<=/<=1]`.
pub fn build_noninv_formula(phi: &Formula) -> Result<Formula, SubstituteError> {
    Ok(Formula::and(
        substitute_order(phi, 0)?,
        Formula::not(substitute_order(phi, 1)?),
    ))
}

/// Normal form of `φ[<=/<=0] ∧ ¬φ[<=/<=1]`.
pub fn normalize(phi: &Formula) -> Result<NormalForm, NormalizeError> {
    if let Some(v) = phi.free_vars().into_iter().next() {
        return Err(NormalizeError::NotASentence(v));
    }
    let half0 = substitute_order(phi, 0)?;
    let half1 = Formula::not(substitute_order(phi, 1)?);
    NormalForm::from_halves(&half0, &half1)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("bound exceeds representable range")]
    Overflow,
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// `224 · M³ · |α|`, the size guaranteed by the shrinking construction,
/// with `M = max(m0, m1, 1)` and `|α|` the number of 1-types.
pub fn size_bound_from(m: usize, alpha: u64) -> Result<u128, BoundError> {
    let m = m.max(1) as u128;
    224u128
        .checked_mul(m)
        .and_then(|v| v.checked_mul(m))
        .and_then(|v| v.checked_mul(m))
        .and_then(|v| v.checked_mul(alpha as u128))
        .ok_or(BoundError::Overflow)
}

pub fn size_bound(nf: &NormalForm) -> Result<u128, BoundError> {
    size_bound_from(nf.max_m(), nf.one_type_count()?)
}

/// The coarser `224 · |φ|³ · 2^|φ|`, with `|φ|` the number of AST nodes.
pub fn coarse_size_bound(phi: &Formula) -> Result<u128, BoundError> {
    let len = phi.size() as u128;
    let pow = u32::try_from(phi.size())
        .ok()
        .and_then(|e| 2u128.checked_pow(e))
        .ok_or(BoundError::Overflow)?;
    224u128
        .checked_mul(len)
        .and_then(|v| v.checked_mul(len))
        .and_then(|v| v.checked_mul(len))
        .and_then(|v| v.checked_mul(pow))
        .ok_or(BoundError::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, render};

    #[test]
    fn bound_instantiations() {
        assert_eq!(size_bound_from(1, 2), Ok(448));
        assert_eq!(size_bound_from(1, 1), Ok(224));
        assert_eq!(size_bound_from(2, 4), Ok(7168));
        assert_eq!(size_bound_from(0, 1), Ok(224));
        assert_eq!(
            size_bound_from(usize::MAX, u64::MAX),
            Err(BoundError::Overflow)
        );
    }

    #[test]
    fn coarse_bound() {
        // P(x) has one node: 224 * 1 * 2
        assert_eq!(coarse_size_bound(&parse("P(x)").unwrap()), Ok(448));
        let mut big = parse("P(x)").unwrap();
        for _ in 0..200 {
            big = Formula::not(big);
        }
        assert_eq!(coarse_size_bound(&big), Err(BoundError::Overflow));
    }

    #[test]
    fn totality_normal_form() {
        let phi = parse("forall x. forall y. (x <= y | y <= x)").unwrap();
        let nf = normalize(&phi).unwrap();
        assert_eq!(nf.m(0), 0);
        assert!(nf.chi(0).order_symbols().contains(&OrderSym::Leq0));
        assert!(!nf.chi(1).order_symbols().contains(&OrderSym::Leq0));
        // the negated half needs witnesses for its existentials
        assert!(nf.m(1) > 0);
        assert_eq!(nf.check_shape(), Ok(()));
    }

    #[test]
    fn fresh_names_are_deterministic() {
        let phi = parse("exists x. (P(x) & forall y. (y <= x))").unwrap();
        let a = normalize(&phi).unwrap();
        let b = normalize(&phi).unwrap();
        assert_eq!(a.to_string(), b.to_string());
        assert_eq!(a.fresh_symbols()[0], "_S0");
        assert!(a.m(0) >= 1);
    }

    #[test]
    fn fresh_names_skip_taken_ones() {
        let phi = parse("exists x. _S0(x)").unwrap();
        let nf = normalize(&phi).unwrap();
        assert!(!nf.fresh_symbols().contains(&"_S0".to_string()));
    }

    #[test]
    fn order_free_input_has_order_free_halves() {
        let nf = normalize(&parse("forall x. exists y. R(x,y)").unwrap()).unwrap();
        assert!(nf.chi(0).order_symbols().is_empty());
        assert!(nf.chi(1).order_symbols().is_empty());
        assert!(nf.signature().orders().is_empty());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            normalize(&parse("P(x)").unwrap()),
            Err(NormalizeError::NotASentence(Var::X))
        ));
        assert!(matches!(
            normalize(&parse("forall x. x <=0 x").unwrap()),
            Err(NormalizeError::Substitute(_))
        ));
        assert!(matches!(
            NormalForm::from_sentence(&parse("forall x. forall y. (x <=0 y & y <=1 x)").unwrap()),
            Err(NormalizeError::OrderSeparation { .. })
        ));
        let bad = NormalForm::new(
            [parse("x <=1 y").unwrap(), Formula::top()],
            [vec![], vec![]],
            Signature::new().with_order(OrderSym::Leq1),
        );
        assert!(matches!(bad, Err(NormalizeError::OrderSeparation { .. })));
        let bad = NormalForm::new(
            [parse("P(x)").unwrap(), Formula::top()],
            [vec![], vec![]],
            Signature::new(),
        );
        assert_eq!(bad, Err(NormalizeError::MissingSymbol("P".into())));
    }

    #[test]
    fn recognize_normal_shape() {
        let f = parse(
            "forall x. forall y. (R(x,y) -> x <=0 y) & forall x. exists y. R(x,y) \
             & forall x. exists y. (y <=1 x & P(y))",
        )
        .unwrap();
        let nf = NormalForm::recognize(&f).unwrap();
        assert_eq!((nf.m(0), nf.m(1)), (1, 1));
        assert!(nf.fresh_symbols().is_empty());
        assert_eq!(render(nf.chi(1)), "x = x");
        assert!(NormalForm::recognize(&parse("exists x. P(x)").unwrap()).is_none());
        assert!(NormalForm::recognize(&parse("forall x. forall y. x <= y").unwrap()).is_none());
    }

    #[test]
    fn from_sentence_places_by_order() {
        let f = parse("forall x. exists y. (x <=1 y & !(y <=1 x))").unwrap();
        let nf = NormalForm::from_sentence(&f).unwrap();
        assert_eq!(nf.m(0), 0);
        assert_eq!(nf.m(1), 1);
        assert_eq!(render(nf.chi(0)), "x = x");
    }
}
