//! Atomic 1-types and 2-types.
//!
//! A [`TypeLayout`] fixes, for a signature, which atom each bit of a type
//! encoding stands for. 1-type bits cover `P(x)` for every unary `P` and
//! `R(x,x)` for every ordinary binary `R`. Reflexive order atoms are part of
//! every 1-type positively and carry no bit. 2-type cross bits cover
//! `R(x,y)` and `R(y,x)` for every binary and order symbol; the literal
//! `x != y` is implicit.

use std::fmt;

use thiserror::Error;

use crate::formula::{OrderSym, Signature, Var};
use crate::structure::Structure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("signature has too many atoms for the 64-bit type encoding")]
    TooManyAtoms,
    #[error("element {element} is out of range for a universe of size {n}")]
    OutOfRange { element: usize, n: usize },
    #[error("2-types require distinct elements")]
    SameElement,
    #[error("structure does not interpret `{0}`")]
    Uninterpreted(String),
}

/// An atom over the variables x, y, as it appears in a type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeAtom {
    Unary(String, Var),
    Binary(String, Var, Var),
    Order(OrderSym, Var, Var),
}

impl fmt::Display for TypeAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeAtom::Unary(p, v) => write!(f, "{p}({v})"),
            TypeAtom::Binary(r, a, b) => write!(f, "{r}({a},{b})"),
            TypeAtom::Order(o, a, b) => write!(f, "{a} {o} {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeLayout {
    unary: Vec<String>,
    binary: Vec<String>,
    orders: Vec<OrderSym>,
}

/// Canonically encoded 1-type: bit `k` is the polarity of the `k`-th free
/// atom of the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OneType(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoType {
    pub x: OneType,
    pub y: OneType,
    /// Bit `2k` is `S(x,y)`, bit `2k+1` is `S(y,x)` for the `k`-th cross symbol.
    pub cross: u64,
}

impl TypeLayout {
    pub fn new(sig: &Signature) -> Result<TypeLayout, TypeError> {
        let layout = TypeLayout {
            unary: sig.unary().map(str::to_string).collect(),
            binary: sig.binary().map(str::to_string).collect(),
            orders: sig.orders().iter().copied().collect(),
        };
        if layout.one_type_bits() > 63 || 2 * (layout.binary.len() + layout.orders.len()) > 64 {
            return Err(TypeError::TooManyAtoms);
        }
        Ok(layout)
    }

    /// Number of free bits in a 1-type.
    pub fn one_type_bits(&self) -> usize {
        self.unary.len() + self.binary.len()
    }

    /// Closed-form number of 1-types: `2^(unary + non-order binary)`.
    pub fn one_type_count(&self) -> u64 {
        1u64 << self.one_type_bits()
    }

    pub fn one_types(&self) -> impl Iterator<Item = OneType> {
        (0..self.one_type_count()).map(OneType)
    }

    /// Free atoms of a 1-type, in bit order.
    pub fn one_type_atoms(&self) -> Vec<TypeAtom> {
        self.unary
            .iter()
            .map(|p| TypeAtom::Unary(p.clone(), Var::X))
            .chain(
                self.binary
                    .iter()
                    .map(|r| TypeAtom::Binary(r.clone(), Var::X, Var::X)),
            )
            .collect()
    }

    /// Literals of a 1-type, reflexive order atoms included.
    pub fn literals(&self, t: OneType) -> Vec<(TypeAtom, bool)> {
        let mut out: Vec<_> = self
            .one_type_atoms()
            .into_iter()
            .enumerate()
            .map(|(k, a)| (a, t.0 >> k & 1 == 1))
            .collect();
        out.extend(
            self.orders
                .iter()
                .map(|o| (TypeAtom::Order(*o, Var::X, Var::X), true)),
        );
        out
    }

    /// Polarity of `atom` in `t`, if `atom` belongs to the layout.
    pub fn polarity(&self, t: OneType, atom: &TypeAtom) -> Option<bool> {
        self.literals(t)
            .into_iter()
            .find(|(a, _)| a == atom)
            .map(|(_, pol)| pol)
    }

    fn check(&self, s: &Structure, d: usize) -> Result<(), TypeError> {
        if d >= s.size() {
            return Err(TypeError::OutOfRange {
                element: d,
                n: s.size(),
            });
        }
        Ok(())
    }

    pub fn one_type_of(&self, s: &Structure, d: usize) -> Result<OneType, TypeError> {
        self.check(s, d)?;
        let mut bits = 0u64;
        for (k, p) in self.unary.iter().enumerate() {
            if s.unary_holds(p, d)
                .ok_or_else(|| TypeError::Uninterpreted(p.clone()))?
            {
                bits |= 1 << k;
            }
        }
        let u = self.unary.len();
        for (k, r) in self.binary.iter().enumerate() {
            if s.binary_holds(r, d, d)
                .ok_or_else(|| TypeError::Uninterpreted(r.clone()))?
            {
                bits |= 1 << (u + k);
            }
        }
        for o in &self.orders {
            if s.order(*o).is_none() {
                return Err(TypeError::Uninterpreted(o.key().to_string()));
            }
        }
        Ok(OneType(bits))
    }

    /// Cross atoms of a 2-type, in bit order.
    pub fn cross_atoms(&self) -> Vec<TypeAtom> {
        let mut out = Vec::new();
        for r in &self.binary {
            out.push(TypeAtom::Binary(r.clone(), Var::X, Var::Y));
            out.push(TypeAtom::Binary(r.clone(), Var::Y, Var::X));
        }
        for o in &self.orders {
            out.push(TypeAtom::Order(*o, Var::X, Var::Y));
            out.push(TypeAtom::Order(*o, Var::Y, Var::X));
        }
        out
    }

    pub fn two_type_of(&self, s: &Structure, d: usize, e: usize) -> Result<TwoType, TypeError> {
        self.check(s, d)?;
        self.check(s, e)?;
        if d == e {
            return Err(TypeError::SameElement);
        }
        let x = self.one_type_of(s, d)?;
        let y = self.one_type_of(s, e)?;
        let mut cross = 0u64;
        let mut k = 0;
        let mut push = |v: bool, k: &mut usize| {
            if v {
                cross |= 1 << *k;
            }
            *k += 1;
        };
        for r in &self.binary {
            push(
                s.binary_holds(r, d, e).expect("checked by one_type_of"),
                &mut k,
            );
            push(
                s.binary_holds(r, e, d).expect("checked by one_type_of"),
                &mut k,
            );
        }
        for o in &self.orders {
            push(
                s.order_holds(*o, d, e).expect("checked by one_type_of"),
                &mut k,
            );
            push(
                s.order_holds(*o, e, d).expect("checked by one_type_of"),
                &mut k,
            );
        }
        Ok(TwoType { x, y, cross })
    }

    /// Cross literals of a 2-type.
    pub fn cross_literals(&self, t: &TwoType) -> Vec<(TypeAtom, bool)> {
        self.cross_atoms()
            .into_iter()
            .enumerate()
            .map(|(k, a)| (a, t.cross >> k & 1 == 1))
            .collect()
    }
}

impl TwoType {
    /// The type of the reversed pair.
    pub fn swapped(&self) -> TwoType {
        let even = self.cross & 0x5555_5555_5555_5555;
        let odd = self.cross & 0xAAAA_AAAA_AAAA_AAAA;
        TwoType {
            x: self.y,
            y: self.x,
            cross: (even << 1) | (odd >> 1),
        }
    }
}

/// The 1-type of `d` over the structure's own signature.
pub fn one_type_of(s: &Structure, d: usize) -> Result<OneType, TypeError> {
    TypeLayout::new(&s.signature())?.one_type_of(s, d)
}

/// The 2-type of `(d, e)` over the structure's own signature.
pub fn two_type_of(s: &Structure, d: usize, e: usize) -> Result<TwoType, TypeError> {
    TypeLayout::new(&s.signature())?.two_type_of(s, d, e)
}
