//! Bottom-up model checking of FO² formulas.
//!
//! Every subformula is evaluated to the set of assignments `(x, y)` that
//! satisfy it, stored as an `n * n` bit matrix. Each node costs `O(n²)`, so
//! a whole formula costs `O(|f| · n²)`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::{Formula, Var};
use crate::structure::Structure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("structure does not interpret `{0}`")]
    Uninterpreted(String),
    #[error("variable {0} is free; only sentences can be evaluated")]
    FreeVariable(Var),
}

/// Satisfying assignments of a formula, indexed by `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    n: usize,
    bits: Vec<bool>,
}

impl PairSet {
    fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> PairSet {
        let mut bits = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                bits.push(f(a, b));
            }
        }
        PairSet { n, bits }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.bits[x * self.n + y]
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_set(&self) -> BTreeSet<(usize, usize)> {
        (0..self.n * self.n)
            .filter(|&i| self.bits[i])
            .map(|i| (i / self.n, i % self.n))
            .collect()
    }

    fn zip(self, other: PairSet, op: impl Fn(bool, bool) -> bool) -> PairSet {
        PairSet {
            n: self.n,
            bits: self
                .bits
                .into_iter()
                .zip(other.bits)
                .map(|(a, b)| op(a, b))
                .collect(),
        }
    }
}

fn pick(v: Var, a: usize, b: usize) -> usize {
    match v {
        Var::X => a,
        Var::Y => b,
    }
}

/// The assignments `(x, y)` over the universe that make `f` true. Variables
/// that are not free in `f` range freely.
pub fn satisfying_pairs(s: &Structure, f: &Formula) -> Result<PairSet, EvalError> {
    let n = s.size();
    Ok(match f {
        Formula::Unary(p, v) => {
            let rel = s
                .unary_relation(p)
                .ok_or_else(|| EvalError::Uninterpreted(p.clone()))?;
            PairSet::from_fn(n, |a, b| rel[pick(*v, a, b)])
        }
        Formula::Binary(r, u, v) => {
            let rel = s
                .binary_relation(r)
                .ok_or_else(|| EvalError::Uninterpreted(r.clone()))?;
            PairSet::from_fn(n, |a, b| rel[pick(*u, a, b) * n + pick(*v, a, b)])
        }
        Formula::Eq(u, v) => PairSet::from_fn(n, |a, b| pick(*u, a, b) == pick(*v, a, b)),
        Formula::Order(o, u, v) => {
            let rank = s
                .order(*o)
                .ok_or_else(|| EvalError::Uninterpreted(o.key().to_string()))?;
            PairSet::from_fn(n, |a, b| rank.leq(pick(*u, a, b), pick(*v, a, b)))
        }
        Formula::Not(g) => {
            let mut set = satisfying_pairs(s, g)?;
            set.bits.iter_mut().for_each(|b| *b = !*b);
            set
        }
        Formula::And(g, h) => satisfying_pairs(s, g)?.zip(satisfying_pairs(s, h)?, |a, b| a && b),
        Formula::Or(g, h) => satisfying_pairs(s, g)?.zip(satisfying_pairs(s, h)?, |a, b| a || b),
        Formula::Implies(g, h) => {
            satisfying_pairs(s, g)?.zip(satisfying_pairs(s, h)?, |a, b| !a || b)
        }
        Formula::Iff(g, h) => satisfying_pairs(s, g)?.zip(satisfying_pairs(s, h)?, |a, b| a == b),
        Formula::Forall(v, g) | Formula::Exists(v, g) => {
            let body = satisfying_pairs(s, g)?;
            let universal = matches!(f, Formula::Forall(..));
            // Project out `v`: the result depends only on the other variable.
            let projected: Vec<bool> = (0..n)
                .map(|w| {
                    let mut values = (0..n).map(|u| match v {
                        Var::X => body.contains(u, w),
                        Var::Y => body.contains(w, u),
                    });
                    if universal {
                        values.all(|b| b)
                    } else {
                        values.any(|b| b)
                    }
                })
                .collect();
            PairSet::from_fn(n, |a, b| match v {
                Var::X => projected[b],
                Var::Y => projected[a],
            })
        }
    })
}

/// Whether `s` satisfies the sentence `f`.
pub fn evaluate(s: &Structure, f: &Formula) -> Result<bool, EvalError> {
    if let Some(v) = f.free_vars().into_iter().next() {
        return Err(EvalError::FreeVariable(v));
    }
    Ok(satisfying_pairs(s, f)?.contains(0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, substitute_order, OrderSym};
    use crate::structure::Ranking;

    fn psi0() -> Formula {
        substitute_order(&parse("exists x. (P(x) & forall y. (y <= x))").unwrap(), 0).unwrap()
    }

    #[test]
    fn order_gadget_follows_the_maximum() {
        let mut s = Structure::new(2).unwrap();
        s.set_unary("P", [0]).unwrap();
        s.set_order(OrderSym::Leq0, Ranking::new(vec![1, 0]).unwrap())
            .unwrap();
        assert_eq!(evaluate(&s, &psi0()), Ok(true));
        s.set_order(OrderSym::Leq0, Ranking::new(vec![0, 1]).unwrap())
            .unwrap();
        assert_eq!(evaluate(&s, &psi0()), Ok(false));
    }

    #[test]
    fn reflexive_equality_always_holds() {
        let f = parse("forall x. x = x").unwrap();
        for n in 1..5 {
            assert_eq!(evaluate(&Structure::new(n).unwrap(), &f), Ok(true));
        }
    }

    #[test]
    fn pair_sets() {
        let s = Structure::new(3).unwrap();
        let eq = satisfying_pairs(&s, &parse("x = y").unwrap()).unwrap();
        assert_eq!(eq.to_set(), BTreeSet::from([(0, 0), (1, 1), (2, 2)]));

        let mut s = Structure::new(2).unwrap();
        s.set_order(OrderSym::Leq0, Ranking::identity(2)).unwrap();
        let le = satisfying_pairs(&s, &parse("x <=0 y").unwrap()).unwrap();
        assert_eq!(le.to_set(), BTreeSet::from([(0, 0), (0, 1), (1, 1)]));

        let ne = satisfying_pairs(&s, &parse("!(x = y)").unwrap()).unwrap();
        assert_eq!(ne.to_set(), BTreeSet::from([(0, 1), (1, 0)]));
    }

    #[test]
    fn errors() {
        let s = Structure::new(2).unwrap();
        assert_eq!(
            evaluate(&s, &parse("exists x. P(x)").unwrap()),
            Err(EvalError::Uninterpreted("P".into()))
        );
        assert_eq!(
            evaluate(&s, &parse("exists x. x <=1 x").unwrap()),
            Err(EvalError::Uninterpreted("leq1".into()))
        );
        assert_eq!(
            evaluate(&s, &parse("x = y").unwrap()),
            Err(EvalError::FreeVariable(Var::X))
        );
    }

    #[test]
    fn quantifier_rebinding() {
        // exists y with x free, then x rebound
        let mut s = Structure::new(3).unwrap();
        s.set_binary("R", [(0, 1), (1, 2)]).unwrap();
        let f =
            parse("exists x. (exists y. R(x,y) & forall y. (R(y,x) -> exists x. R(y,x)))").unwrap();
        assert_eq!(evaluate(&s, &f), Ok(true));
        let g = parse("forall x. exists y. R(x,y)").unwrap();
        assert_eq!(evaluate(&s, &g), Ok(false));
    }
}
