//! Syntax of two-variable first-order logic with distinguished order symbols.
//!
//! Formulas range over the variables `x` and `y` only. Besides ordinary
//! unary and binary predicates there are three distinguished symbols `<=`,
//! `<=0` and `<=1`, always interpreted as linear orders, and built-in
//! equality.

mod parse;
mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use parse::{parse, ParseError};
pub use render::render;

/// One of the two variables of the logic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The distinguished linear-order symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrderSym {
    /// The plain order `<=` whose invariance is in question.
    Leq,
    /// `<=0`
    Leq0,
    /// `<=1`
    Leq1,
}

impl OrderSym {
    pub const ALL: [OrderSym; 3] = [OrderSym::Leq, OrderSym::Leq0, OrderSym::Leq1];

    /// Concrete syntax token.
    pub fn token(self) -> &'static str {
        match self {
            OrderSym::Leq => "<=",
            OrderSym::Leq0 => "<=0",
            OrderSym::Leq1 => "<=1",
        }
    }

    /// Key used in structure files and DIMACS decode maps.
    pub fn key(self) -> &'static str {
        match self {
            OrderSym::Leq => "leq",
            OrderSym::Leq0 => "leq0",
            OrderSym::Leq1 => "leq1",
        }
    }

    pub fn from_key(key: &str) -> Option<OrderSym> {
        OrderSym::ALL.into_iter().find(|o| o.key() == key)
    }

    /// The indexed copy `<=i` for `i` in {0, 1}.
    pub fn indexed(i: usize) -> OrderSym {
        match i {
            0 => OrderSym::Leq0,
            1 => OrderSym::Leq1,
            _ => panic!("order index must be 0 or 1, got {i}"),
        }
    }
}

impl fmt::Display for OrderSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arity {
    Unary,
    Binary,
}

impl Arity {
    pub fn as_usize(self) -> usize {
        match self {
            Arity::Unary => 1,
            Arity::Binary => 2,
        }
    }
}

/// Abstract syntax tree of an FO² formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Unary(String, Var),
    Binary(String, Var, Var),
    Eq(Var, Var),
    Order(OrderSym, Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
}

impl Formula {
    pub fn unary(name: impl Into<String>, v: Var) -> Formula {
        Formula::Unary(name.into(), v)
    }

    pub fn binary(name: impl Into<String>, a: Var, b: Var) -> Formula {
        Formula::Binary(name.into(), a, b)
    }

    /// `x = x`, the canonical true formula of the grammar.
    pub fn top() -> Formula {
        Formula::Eq(Var::X, Var::X)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Var, f: Formula) -> Formula {
        Formula::Forall(v, Box::new(f))
    }

    pub fn exists(v: Var, f: Formula) -> Formula {
        Formula::Exists(v, Box::new(f))
    }

    /// Left-nested conjunction; `None` for an empty iterator.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().map(Formula::size).sum::<usize>()
    }

    pub fn children(&self) -> impl Iterator<Item = &Formula> {
        let (a, b): (Option<&Formula>, Option<&Formula>) = match self {
            Formula::Unary(..) | Formula::Binary(..) | Formula::Eq(..) | Formula::Order(..) => {
                (None, None)
            }
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => (Some(a), None),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => (Some(a), Some(b)),
        };
        a.into_iter().chain(b)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => false,
            _ => self.children().all(Formula::is_quantifier_free),
        }
    }

    /// Free variables, in the order x, y.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        match self {
            Formula::Unary(_, v) => BTreeSet::from([*v]),
            Formula::Binary(_, a, b) | Formula::Eq(a, b) | Formula::Order(_, a, b) => {
                BTreeSet::from([*a, *b])
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let mut vars = body.free_vars();
                vars.remove(v);
                vars
            }
            _ => self.children().flat_map(Formula::free_vars).collect(),
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Order symbols occurring anywhere in the formula.
    pub fn order_symbols(&self) -> BTreeSet<OrderSym> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Order(o, _, _) = f {
                out.insert(*o);
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }

    /// Applies `f` bottom-up to every node, rebuilding the tree.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Formula) -> Formula) -> Formula {
        let rebuilt = match self {
            Formula::Unary(..) | Formula::Binary(..) | Formula::Eq(..) | Formula::Order(..) => {
                self.clone()
            }
            Formula::Not(a) => Formula::not(a.map_bottom_up(f)),
            Formula::And(a, b) => Formula::and(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Or(a, b) => Formula::or(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Implies(a, b) => Formula::implies(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Iff(a, b) => Formula::iff(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Forall(v, a) => Formula::forall(*v, a.map_bottom_up(f)),
            Formula::Exists(v, a) => Formula::exists(*v, a.map_bottom_up(f)),
        };
        f(rebuilt)
    }

    /// Exchanges `x` and `y` everywhere, bound occurrences included.
    pub fn swap_vars(&self) -> Formula {
        self.map_bottom_up(&mut |f| match f {
            Formula::Unary(p, v) => Formula::Unary(p, v.other()),
            Formula::Binary(r, a, b) => Formula::Binary(r, a.other(), b.other()),
            Formula::Eq(a, b) => Formula::Eq(a.other(), b.other()),
            Formula::Order(o, a, b) => Formula::Order(o, a.other(), b.other()),
            Formula::Forall(v, body) => Formula::Forall(v.other(), body),
            Formula::Exists(v, body) => Formula::Exists(v.other(), body),
            other => other,
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("predicate `{name}` is used with arities {first} and {second}")]
    ArityConflict {
        name: String,
        first: usize,
        second: usize,
    },
}

/// Ordinary predicates with their arities, plus the distinguished order
/// symbols in use. Equality is logical and never listed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    predicates: BTreeMap<String, Arity>,
    orders: BTreeSet<OrderSym>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn add_predicate(&mut self, name: &str, arity: Arity) -> Result<(), SignatureError> {
        match self.predicates.get(name) {
            Some(&known) if known != arity => Err(SignatureError::ArityConflict {
                name: name.to_string(),
                first: known.as_usize(),
                second: arity.as_usize(),
            }),
            Some(_) => Ok(()),
            None => {
                self.predicates.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn add_order(&mut self, o: OrderSym) {
        self.orders.insert(o);
    }

    pub fn with_predicate(mut self, name: &str, arity: Arity) -> Signature {
        self.add_predicate(name, arity)
            .expect("with_predicate: conflicting arity");
        self
    }

    pub fn with_order(mut self, o: OrderSym) -> Signature {
        self.add_order(o);
        self
    }

    pub fn arity(&self, name: &str) -> Option<Arity> {
        self.predicates.get(name).copied()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, Arity)> {
        self.predicates.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn unary(&self) -> impl Iterator<Item = &str> {
        self.predicates()
            .filter(|(_, a)| *a == Arity::Unary)
            .map(|(n, _)| n)
    }

    pub fn binary(&self) -> impl Iterator<Item = &str> {
        self.predicates()
            .filter(|(_, a)| *a == Arity::Binary)
            .map(|(n, _)| n)
    }

    pub fn orders(&self) -> &BTreeSet<OrderSym> {
        &self.orders
    }

    pub fn has_order(&self, o: OrderSym) -> bool {
        self.orders.contains(&o)
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.predicates.contains_key(name)
    }

    pub fn merge(&mut self, other: &Signature) -> Result<(), SignatureError> {
        for (name, arity) in other.predicates() {
            self.add_predicate(name, arity)?;
        }
        self.orders.extend(other.orders.iter().copied());
        Ok(())
    }

    /// `self` uses no symbol that `other` lacks.
    pub fn is_subset_of(&self, other: &Signature) -> bool {
        self.predicates().all(|(n, a)| other.arity(n) == Some(a))
            && self.orders.is_subset(&other.orders)
    }
}

/// Exactly the predicates and order symbols occurring in `f`.
pub fn signature_of(f: &Formula) -> Result<Signature, SignatureError> {
    let mut sig = Signature::new();
    let mut err = None;
    f.visit(&mut |node| {
        let res = match node {
            Formula::Unary(p, _) => sig.add_predicate(p, Arity::Unary),
            Formula::Binary(r, _, _) => sig.add_predicate(r, Arity::Binary),
            Formula::Order(o, _, _) => {
                sig.add_order(*o);
                Ok(())
            }
            _ => Ok(()),
        };
        if let (Err(e), None) = (res, &err) {
            err = Some(e);
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(sig),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula already mentions the indexed order `{0}`; substitution expects plain `<=` only")]
pub struct SubstituteError(pub OrderSym);

/// Replaces every plain `<=` by `<=i`.
pub fn substitute_order(f: &Formula, i: usize) -> Result<Formula, SubstituteError> {
    if let Some(o) = f.order_symbols().into_iter().find(|o| *o != OrderSym::Leq) {
        return Err(SubstituteError(o));
    }
    let target = OrderSym::indexed(i);
    Ok(f.map_bottom_up(&mut |node| match node {
        Formula::Order(OrderSym::Leq, a, b) => Formula::Order(target, a, b),
        other => other,
    }))
}
