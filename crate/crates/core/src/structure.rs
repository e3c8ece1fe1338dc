//! Finite relational structures over the universe `{0..n-1}`.
//!
//! Linear orders are stored as rankings: a bijection `rank` from the
//! universe onto `{0..n-1}` with `a <= b` iff `rank[a] <= rank[b]`. A
//! ranking is a linear order by construction, so none of the order axioms
//! need checking at runtime.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Arity, OrderSym, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("structures must have a non-empty universe")]
    EmptyUniverse,
    #[error("element {element} of `{symbol}` is out of range for a universe of size {n}")]
    OutOfRange {
        symbol: String,
        element: usize,
        n: usize,
    },
    #[error("ranking for `{order}` is not a bijection onto 0..{n}")]
    NotABijection { order: String, n: usize },
    #[error("`{0}` is interpreted both as a unary and as a binary predicate")]
    DuplicateSymbol(String),
    #[error("predicate `{0}` is in the signature but not interpreted")]
    MissingPredicate(String),
    #[error("predicate `{0}` is interpreted but not in the signature")]
    ExtraPredicate(String),
    #[error("predicate `{name}` has arity {expected} in the signature but is interpreted with arity {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("order `{0}` is in the signature but not interpreted")]
    MissingOrder(String),
    #[error("order `{0}` is interpreted but not in the signature")]
    ExtraOrder(String),
    #[error("unknown order key `{0}` (expected leq, leq0 or leq1)")]
    UnknownOrder(String),
    #[error("malformed structure file: {0}")]
    Json(String),
}

/// A linear order on `{0..n-1}` given by the rank of each element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn new(rank: Vec<usize>) -> Result<Ranking, StructureError> {
        let n = rank.len();
        let mut seen = vec![false; n];
        for &r in &rank {
            if r >= n || std::mem::replace(&mut seen[r], true) {
                return Err(StructureError::NotABijection {
                    order: "ranking".into(),
                    n,
                });
            }
        }
        Ok(Ranking(rank))
    }

    /// The natural order `0 < 1 < ... < n-1`.
    pub fn identity(n: usize) -> Ranking {
        Ranking((0..n).collect())
    }

    /// Ranking in which `elements[0]` is smallest, `elements[1]` next, and so on.
    pub fn from_sequence(elements: &[usize]) -> Result<Ranking, StructureError> {
        let n = elements.len();
        let mut rank = vec![usize::MAX; n];
        for (r, &e) in elements.iter().enumerate() {
            if e >= n || rank[e] != usize::MAX {
                return Err(StructureError::NotABijection {
                    order: "ranking".into(),
                    n,
                });
            }
            rank[e] = r;
        }
        Ok(Ranking(rank))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rank(&self, a: usize) -> usize {
        self.0[a]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.0
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.0[a] <= self.0[b]
    }

    /// Elements listed from smallest to largest.
    pub fn ascending(&self) -> Vec<usize> {
        let mut seq = vec![0; self.0.len()];
        for (e, &r) in self.0.iter().enumerate() {
            seq[r] = e;
        }
        seq
    }

    /// The induced order on `keep` (given in increasing index order),
    /// relabeled to `0..keep.len()`.
    pub fn restrict(&self, keep: &[usize]) -> Ranking {
        let mut idx: Vec<usize> = (0..keep.len()).collect();
        idx.sort_by_key(|&i| self.0[keep[i]]);
        let mut rank = vec![0; keep.len()];
        for (r, i) in idx.into_iter().enumerate() {
            rank[i] = r;
        }
        Ranking(rank)
    }
}

/// A finite structure. Binary relations are dense `n * n` bit matrices,
/// row-major in the first argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    n: usize,
    unary: BTreeMap<String, Vec<bool>>,
    binary: BTreeMap<String, Vec<bool>>,
    orders: BTreeMap<OrderSym, Ranking>,
}

impl Structure {
    pub fn new(n: usize) -> Result<Structure, StructureError> {
        if n == 0 {
            return Err(StructureError::EmptyUniverse);
        }
        Ok(Structure {
            n,
            unary: BTreeMap::new(),
            binary: BTreeMap::new(),
            orders: BTreeMap::new(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn check_fresh(&self, name: &str, binary: bool) -> Result<(), StructureError> {
        let clash = if binary {
            self.unary.contains_key(name)
        } else {
            self.binary.contains_key(name)
        };
        if clash {
            return Err(StructureError::DuplicateSymbol(name.to_string()));
        }
        Ok(())
    }

    fn check_element(&self, symbol: &str, e: usize) -> Result<(), StructureError> {
        if e >= self.n {
            return Err(StructureError::OutOfRange {
                symbol: symbol.to_string(),
                element: e,
                n: self.n,
            });
        }
        Ok(())
    }

    /// Interprets a unary predicate, replacing any previous interpretation.
    pub fn set_unary(
        &mut self,
        name: &str,
        elements: impl IntoIterator<Item = usize>,
    ) -> Result<(), StructureError> {
        self.check_fresh(name, false)?;
        let mut bits = vec![false; self.n];
        for e in elements {
            self.check_element(name, e)?;
            bits[e] = true;
        }
        self.unary.insert(name.to_string(), bits);
        Ok(())
    }

    pub fn set_binary(
        &mut self,
        name: &str,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<(), StructureError> {
        self.check_fresh(name, true)?;
        let mut bits = vec![false; self.n * self.n];
        for (a, b) in pairs {
            self.check_element(name, a)?;
            self.check_element(name, b)?;
            bits[a * self.n + b] = true;
        }
        self.binary.insert(name.to_string(), bits);
        Ok(())
    }

    pub fn set_order(&mut self, o: OrderSym, ranking: Ranking) -> Result<(), StructureError> {
        if ranking.len() != self.n {
            return Err(StructureError::NotABijection {
                order: o.key().to_string(),
                n: self.n,
            });
        }
        self.orders.insert(o, ranking);
        Ok(())
    }

    pub fn remove_order(&mut self, o: OrderSym) -> Option<Ranking> {
        self.orders.remove(&o)
    }

    pub fn remove_predicate(&mut self, name: &str) {
        self.unary.remove(name);
        self.binary.remove(name);
    }

    /// Sets a single binary fact on an already interpreted predicate.
    ///
    /// # Panics
    /// If `name` is not an interpreted binary predicate or an element is out of range.
    pub fn set_binary_fact(&mut self, name: &str, a: usize, b: usize, value: bool) {
        let n = self.n;
        assert!(a < n && b < n, "element out of range");
        self.binary
            .get_mut(name)
            .unwrap_or_else(|| panic!("`{name}` is not an interpreted binary predicate"))
            [a * n + b] = value;
    }

    pub fn unary_relation(&self, name: &str) -> Option<&[bool]> {
        self.unary.get(name).map(Vec::as_slice)
    }

    pub fn binary_relation(&self, name: &str) -> Option<&[bool]> {
        self.binary.get(name).map(Vec::as_slice)
    }

    pub fn order(&self, o: OrderSym) -> Option<&Ranking> {
        self.orders.get(&o)
    }

    pub fn unary_holds(&self, name: &str, a: usize) -> Option<bool> {
        self.unary.get(name).map(|bits| bits[a])
    }

    pub fn binary_holds(&self, name: &str, a: usize, b: usize) -> Option<bool> {
        self.binary.get(name).map(|bits| bits[a * self.n + b])
    }

    pub fn order_holds(&self, o: OrderSym, a: usize, b: usize) -> Option<bool> {
        self.orders.get(&o).map(|r| r.leq(a, b))
    }

    /// The signature this structure interprets.
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for name in self.unary.keys() {
            sig.add_predicate(name, Arity::Unary)
                .expect("unary and binary names are disjoint");
        }
        for name in self.binary.keys() {
            sig.add_predicate(name, Arity::Binary)
                .expect("unary and binary names are disjoint");
        }
        for o in self.orders.keys() {
            sig.add_order(*o);
        }
        sig
    }

    /// Checks that the interpretations match `sig` exactly.
    pub fn validate(&self, sig: &Signature) -> Result<(), StructureError> {
        for (name, arity) in sig.predicates() {
            let found = if self.unary.contains_key(name) {
                Arity::Unary
            } else if self.binary.contains_key(name) {
                Arity::Binary
            } else {
                return Err(StructureError::MissingPredicate(name.to_string()));
            };
            if found != arity {
                return Err(StructureError::ArityMismatch {
                    name: name.to_string(),
                    expected: arity.as_usize(),
                    found: found.as_usize(),
                });
            }
        }
        if let Some(extra) = self
            .unary
            .keys()
            .chain(self.binary.keys())
            .find(|name| !sig.contains_name(name))
        {
            return Err(StructureError::ExtraPredicate(extra.clone()));
        }
        for o in OrderSym::ALL {
            match (sig.has_order(o), self.orders.contains_key(&o)) {
                (true, false) => return Err(StructureError::MissingOrder(o.key().to_string())),
                (false, true) => return Err(StructureError::ExtraOrder(o.key().to_string())),
                _ => {}
            }
        }
        Ok(())
    }

    /// Substructure on `keep`, relabeled to `0..|keep|` in increasing order
    /// of original index. Returns the structure and the kept elements in
    /// that order (new label `i` is old element `result.1[i]`).
    pub fn restrict(
        &self,
        keep: impl IntoIterator<Item = usize>,
    ) -> Result<(Structure, Vec<usize>), StructureError> {
        let mut kept: Vec<usize> = keep.into_iter().collect();
        kept.sort_unstable();
        kept.dedup();
        if kept.is_empty() {
            return Err(StructureError::EmptyUniverse);
        }
        if let Some(&bad) = kept.iter().find(|&&e| e >= self.n) {
            return Err(StructureError::OutOfRange {
                symbol: "restriction".into(),
                element: bad,
                n: self.n,
            });
        }
        let m = kept.len();
        let unary = self
            .unary
            .iter()
            .map(|(name, bits)| (name.clone(), kept.iter().map(|&e| bits[e]).collect()))
            .collect();
        let binary = self
            .binary
            .iter()
            .map(|(name, bits)| {
                let mut out = vec![false; m * m];
                for (i, &a) in kept.iter().enumerate() {
                    for (j, &b) in kept.iter().enumerate() {
                        out[i * m + j] = bits[a * self.n + b];
                    }
                }
                (name.clone(), out)
            })
            .collect();
        let orders = self
            .orders
            .iter()
            .map(|(o, r)| (*o, r.restrict(&kept)))
            .collect();
        Ok((
            Structure {
                n: m,
                unary,
                binary,
                orders,
            },
            kept,
        ))
    }

    /// Relabels element `a` to `perm[a]`.
    pub fn permute(&self, perm: &[usize]) -> Structure {
        assert_eq!(perm.len(), self.n, "permutation size mismatch");
        let n = self.n;
        let unary = self
            .unary
            .iter()
            .map(|(name, bits)| {
                let mut out = vec![false; n];
                for a in 0..n {
                    out[perm[a]] = bits[a];
                }
                (name.clone(), out)
            })
            .collect();
        let binary = self
            .binary
            .iter()
            .map(|(name, bits)| {
                let mut out = vec![false; n * n];
                for a in 0..n {
                    for b in 0..n {
                        out[perm[a] * n + perm[b]] = bits[a * n + b];
                    }
                }
                (name.clone(), out)
            })
            .collect();
        let orders = self
            .orders
            .iter()
            .map(|(o, r)| {
                let mut rank = vec![0; n];
                for a in 0..n {
                    rank[perm[a]] = r.rank(a);
                }
                (*o, Ranking(rank))
            })
            .collect();
        Structure {
            n,
            unary,
            binary,
            orders,
        }
    }

    /// Canonical JSON encoding (single line, sorted keys and elements).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("structure serialization cannot fail")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_file()).expect("structure serialization cannot fail")
    }

    fn to_file(&self) -> StructureFile {
        let n = self.n;
        StructureFile {
            n,
            unary: self
                .unary
                .iter()
                .map(|(name, bits)| {
                    let elems = (0..n).filter(|&a| bits[a]).collect();
                    (name.clone(), elems)
                })
                .collect(),
            binary: self
                .binary
                .iter()
                .map(|(name, bits)| {
                    let pairs = (0..n * n)
                        .filter(|&i| bits[i])
                        .map(|i| [i / n, i % n])
                        .collect();
                    (name.clone(), pairs)
                })
                .collect(),
            orders: self
                .orders
                .iter()
                .map(|(o, r)| (o.key().to_string(), r.0.clone()))
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Structure, StructureError> {
        let file: StructureFile =
            serde_json::from_str(text).map_err(|e| StructureError::Json(e.to_string()))?;
        Structure::from_file(file)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Structure, StructureError> {
        let file: StructureFile =
            serde_json::from_value(value).map_err(|e| StructureError::Json(e.to_string()))?;
        Structure::from_file(file)
    }

    fn from_file(file: StructureFile) -> Result<Structure, StructureError> {
        let mut s = Structure::new(file.n)?;
        for (name, elems) in file.unary {
            s.set_unary(&name, elems)?;
        }
        for (name, pairs) in file.binary {
            s.set_binary(&name, pairs.into_iter().map(|[a, b]| (a, b)))?;
        }
        for (key, rank) in file.orders {
            let o = OrderSym::from_key(&key).ok_or(StructureError::UnknownOrder(key.clone()))?;
            let not_bijection = || StructureError::NotABijection {
                order: key.clone(),
                n: file.n,
            };
            if rank.len() != file.n {
                return Err(not_bijection());
            }
            let ranking = Ranking::new(rank).map_err(|_| not_bijection())?;
            s.set_order(o, ranking)?;
        }
        Ok(s)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    n: usize,
    #[serde(default)]
    unary: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    binary: BTreeMap<String, Vec<[usize; 2]>>,
    #[serde(default)]
    orders: BTreeMap<String, Vec<usize>>,
}
