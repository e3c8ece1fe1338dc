//! Quantifier-free formulas compiled against a symbol table, for fast
//! pointwise evaluation at a pair `(x, y)`.
//!
//! Used by the model finder (three-valued, over partial interpretations),
//! the grounder, and the shrinker.

use thiserror::Error;

use crate::formula::{Formula, OrderSym, Signature, Var};
use crate::structure::{Ranking, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QfError {
    #[error("expected a quantifier-free formula")]
    Quantified,
    #[error("symbol `{0}` is not in the signature")]
    UnknownSymbol(String),
    #[error("structure does not interpret `{0}`")]
    Uninterpreted(String),
}

/// Index assignment for the symbols of a signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    pub unary: Vec<String>,
    pub binary: Vec<String>,
    pub orders: Vec<OrderSym>,
}

impl SymbolTable {
    pub fn new(sig: &Signature) -> SymbolTable {
        SymbolTable {
            unary: sig.unary().map(str::to_string).collect(),
            binary: sig.binary().map(str::to_string).collect(),
            orders: sig.orders().iter().copied().collect(),
        }
    }

    pub fn unary_index(&self, name: &str) -> Option<usize> {
        self.unary.iter().position(|p| p == name)
    }

    pub fn binary_index(&self, name: &str) -> Option<usize> {
        self.binary.iter().position(|p| p == name)
    }

    pub fn order_index(&self, o: OrderSym) -> Option<usize> {
        self.orders.iter().position(|p| *p == o)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Qf {
    Unary(usize, Var),
    Binary(usize, Var, Var),
    Eq(Var, Var),
    Order(usize, Var, Var),
    Not(Box<Qf>),
    And(Box<Qf>, Box<Qf>),
    Or(Box<Qf>, Box<Qf>),
    Implies(Box<Qf>, Box<Qf>),
    Iff(Box<Qf>, Box<Qf>),
}

/// A total interpretation of the symbols of a table.
pub trait Interp {
    fn unary(&self, p: usize, a: usize) -> bool;
    fn binary(&self, r: usize, a: usize, b: usize) -> bool;
    fn order(&self, o: usize, a: usize, b: usize) -> bool;
}

/// A partial interpretation; `None` means not yet decided.
pub trait PartialInterp {
    fn unary(&self, p: usize, a: usize) -> Option<bool>;
    fn binary(&self, r: usize, a: usize, b: usize) -> Option<bool>;
    fn order(&self, o: usize, a: usize, b: usize) -> Option<bool>;
}

#[inline]
fn pick(v: Var, a: usize, b: usize) -> usize {
    match v {
        Var::X => a,
        Var::Y => b,
    }
}

impl Qf {
    pub fn compile(f: &Formula, table: &SymbolTable) -> Result<Qf, QfError> {
        let bx = |g: &Formula| Qf::compile(g, table).map(Box::new);
        Ok(match f {
            Formula::Unary(p, v) => Qf::Unary(
                table
                    .unary_index(p)
                    .ok_or_else(|| QfError::UnknownSymbol(p.clone()))?,
                *v,
            ),
            Formula::Binary(r, a, b) => Qf::Binary(
                table
                    .binary_index(r)
                    .ok_or_else(|| QfError::UnknownSymbol(r.clone()))?,
                *a,
                *b,
            ),
            Formula::Eq(a, b) => Qf::Eq(*a, *b),
            Formula::Order(o, a, b) => Qf::Order(
                table
                    .order_index(*o)
                    .ok_or_else(|| QfError::UnknownSymbol(o.key().to_string()))?,
                *a,
                *b,
            ),
            Formula::Not(g) => Qf::Not(bx(g)?),
            Formula::And(g, h) => Qf::And(bx(g)?, bx(h)?),
            Formula::Or(g, h) => Qf::Or(bx(g)?, bx(h)?),
            Formula::Implies(g, h) => Qf::Implies(bx(g)?, bx(h)?),
            Formula::Iff(g, h) => Qf::Iff(bx(g)?, bx(h)?),
            Formula::Forall(..) | Formula::Exists(..) => return Err(QfError::Quantified),
        })
    }

    /// Truth value with `x := a`, `y := b`.
    pub fn eval(&self, i: &impl Interp, a: usize, b: usize) -> bool {
        match self {
            Qf::Unary(p, v) => i.unary(*p, pick(*v, a, b)),
            Qf::Binary(r, u, v) => i.binary(*r, pick(*u, a, b), pick(*v, a, b)),
            Qf::Eq(u, v) => pick(*u, a, b) == pick(*v, a, b),
            Qf::Order(o, u, v) => i.order(*o, pick(*u, a, b), pick(*v, a, b)),
            Qf::Not(g) => !g.eval(i, a, b),
            Qf::And(g, h) => g.eval(i, a, b) && h.eval(i, a, b),
            Qf::Or(g, h) => g.eval(i, a, b) || h.eval(i, a, b),
            Qf::Implies(g, h) => !g.eval(i, a, b) || h.eval(i, a, b),
            Qf::Iff(g, h) => g.eval(i, a, b) == h.eval(i, a, b),
        }
    }

    /// Kleene three-valued evaluation.
    pub fn eval3(&self, i: &impl PartialInterp, a: usize, b: usize) -> Option<bool> {
        match self {
            Qf::Unary(p, v) => i.unary(*p, pick(*v, a, b)),
            Qf::Binary(r, u, v) => i.binary(*r, pick(*u, a, b), pick(*v, a, b)),
            Qf::Eq(u, v) => Some(pick(*u, a, b) == pick(*v, a, b)),
            Qf::Order(o, u, v) => i.order(*o, pick(*u, a, b), pick(*v, a, b)),
            Qf::Not(g) => g.eval3(i, a, b).map(|v| !v),
            Qf::And(g, h) => match g.eval3(i, a, b) {
                Some(false) => Some(false),
                Some(true) => h.eval3(i, a, b),
                None => match h.eval3(i, a, b) {
                    Some(false) => Some(false),
                    _ => None,
                },
            },
            Qf::Or(g, h) => match g.eval3(i, a, b) {
                Some(true) => Some(true),
                Some(false) => h.eval3(i, a, b),
                None => match h.eval3(i, a, b) {
                    Some(true) => Some(true),
                    _ => None,
                },
            },
            Qf::Implies(g, h) => match g.eval3(i, a, b) {
                Some(false) => Some(true),
                Some(true) => h.eval3(i, a, b),
                None => match h.eval3(i, a, b) {
                    Some(true) => Some(true),
                    _ => None,
                },
            },
            Qf::Iff(g, h) => match (g.eval3(i, a, b), h.eval3(i, a, b)) {
                (Some(u), Some(v)) => Some(u == v),
                _ => None,
            },
        }
    }
}

/// Index-based view of a structure.
pub struct StructureView<'a> {
    n: usize,
    unary: Vec<&'a [bool]>,
    binary: Vec<&'a [bool]>,
    orders: Vec<&'a Ranking>,
}

impl<'a> StructureView<'a> {
    pub fn new(s: &'a Structure, table: &SymbolTable) -> Result<StructureView<'a>, QfError> {
        let unary = table
            .unary
            .iter()
            .map(|p| {
                s.unary_relation(p)
                    .ok_or_else(|| QfError::Uninterpreted(p.clone()))
            })
            .collect::<Result<_, _>>()?;
        let binary = table
            .binary
            .iter()
            .map(|r| {
                s.binary_relation(r)
                    .ok_or_else(|| QfError::Uninterpreted(r.clone()))
            })
            .collect::<Result<_, _>>()?;
        let orders = table
            .orders
            .iter()
            .map(|o| {
                s.order(*o)
                    .ok_or_else(|| QfError::Uninterpreted(o.key().to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(StructureView {
            n: s.size(),
            unary,
            binary,
            orders,
        })
    }
}

impl Interp for StructureView<'_> {
    fn unary(&self, p: usize, a: usize) -> bool {
        self.unary[p][a]
    }

    fn binary(&self, r: usize, a: usize, b: usize) -> bool {
        self.binary[r][a * self.n + b]
    }

    fn order(&self, o: usize, a: usize, b: usize) -> bool {
        self.orders[o].leq(a, b)
    }
}
