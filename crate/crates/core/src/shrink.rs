//! Shrinking a model of a normal-form sentence below `224 · M³ · |α|`.
//!
//! The construction keeps every element of a rare 1-type and a few extremal
//! realizations of every other type (with respect to both orders), closes
//! that set twice under witnesses, restricts, and then repairs the missing
//! witnesses of the outermost layer by copying 2-types onto reserved
//! extremal elements. The result is always re-checked.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::formula::OrderSym;
use crate::model_check::{evaluate, EvalError};
use crate::normal_form::{size_bound, BoundError, NormalForm};
use crate::qf::{Qf, QfError, StructureView, SymbolTable};
use crate::structure::{Ranking, Structure, StructureError};
use crate::types::{OneType, TypeError, TypeLayout};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShrinkError {
    #[error("input does not fit the normal-form signature: {0}")]
    Structure(#[from] StructureError),
    #[error("input is not a model of the normal-form sentence")]
    NotAModel,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Compile(#[from] QfError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("shrunk structure failed verification")]
    Unverified(Box<ShrinkReport>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ShrinkOptions {
    /// Run the construction even when the input is already within the bound.
    pub force: bool,
}

/// Realization counts of 1-types and the rarity threshold `32M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rarity {
    pub threshold: usize,
    pub counts: BTreeMap<OneType, usize>,
}

impl Rarity {
    /// Types without realizations are rare.
    pub fn is_rare(&self, t: OneType) -> bool {
        self.counts.get(&t).copied().unwrap_or(0) <= self.threshold
    }
}

/// Reserved extremal realizations of a non-rare type: `pools[0]` are the
/// `<=0`-minimal ones, then `<=0`-maximal, `<=1`-minimal, `<=1`-maximal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pools {
    pub one_type: u64,
    pub pools: [Vec<usize>; 4],
}

/// One repaired witness obligation: `d` lost its witness `old_witness`
/// for `γ_i^j` and got `new_witness` instead. Elements are input indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rewire {
    pub d: usize,
    pub old_witness: usize,
    pub new_witness: usize,
    pub conjunct: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShrinkReport {
    pub input_size: usize,
    pub bound: u128,
    pub output: Structure,
    /// `kept[b]` is the input element that became output element `b`.
    pub kept: Vec<usize>,
    pub w0: Vec<usize>,
    pub w1: Vec<usize>,
    pub w2: Vec<usize>,
    pub w3: Vec<usize>,
    pub pools: Vec<Pools>,
    pub rewired: Vec<Rewire>,
    /// The input was already small enough and is returned unchanged.
    pub unchanged: bool,
    pub verified: bool,
}

impl ShrinkReport {
    /// The output structure in the structure JSON format with an extra
    /// `"report"` object.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut value = self.output.to_json_value();
        value["report"] = json!({
            "input_size": self.input_size,
            "bound": self.bound.to_string(),
            "kept": self.kept,
            "w0": self.w0,
            "w1": self.w1,
            "w2": self.w2,
            "w3": self.w3,
            "pools": self.pools,
            "rewired": self.rewired,
            "unchanged": self.unchanged,
            "verified": self.verified,
        });
        value
    }
}

fn check_model(s: &Structure, nf: &NormalForm) -> Result<(), ShrinkError> {
    s.validate(nf.signature())?;
    if !evaluate(s, &nf.sentence())? {
        return Err(ShrinkError::NotAModel);
    }
    Ok(())
}

fn threshold(nf: &NormalForm) -> usize {
    32 * nf.max_m().max(1)
}

/// Classifies 1-types by their number of realizations in a model of `nf`.
pub fn classify_rare(s: &Structure, nf: &NormalForm) -> Result<Rarity, ShrinkError> {
    check_model(s, nf)?;
    let layout = TypeLayout::new(nf.signature())?;
    let mut counts = BTreeMap::new();
    for d in 0..s.size() {
        *counts.entry(layout.one_type_of(s, d)?).or_insert(0) += 1;
    }
    Ok(Rarity {
        threshold: threshold(nf),
        counts,
    })
}

/// Witness queries against one structure.
struct Witnesses<'a> {
    view: StructureView<'a>,
    gammas: &'a [(usize, usize, Qf)],
    n: usize,
}

impl Witnesses<'_> {
    fn holds(&self, g: usize, d: usize, e: usize) -> bool {
        self.gammas[g].2.eval(&self.view, d, e)
    }

    /// Smallest witness of `d` for conjunct `g` in the whole universe.
    fn first(&self, g: usize, d: usize) -> Option<usize> {
        (0..self.n).find(|&e| self.holds(g, d, e))
    }

    fn satisfied_in(&self, g: usize, d: usize, set: &BTreeSet<usize>) -> bool {
        set.iter().any(|&e| self.holds(g, d, e))
    }

    /// A `⊆`-minimal set `W`, disjoint from `base`, such that every element
    /// of `base` has all its witnesses in `base ∪ W`. Missing witnesses are
    /// added greedily (smallest index first), then redundant additions are
    /// dropped.
    fn closure(&self, base: &BTreeSet<usize>) -> Result<BTreeSet<usize>, ShrinkError> {
        let mut all = base.clone();
        let mut added = BTreeSet::new();
        for &d in base {
            for g in 0..self.gammas.len() {
                if !self.satisfied_in(g, d, &all) {
                    let e = self.first(g, d).ok_or_else(|| {
                        ShrinkError::Internal(format!("element {d} has no witness in the model"))
                    })?;
                    all.insert(e);
                    added.insert(e);
                }
            }
        }
        for w in added.clone() {
            all.remove(&w);
            let still = base
                .iter()
                .all(|&d| (0..self.gammas.len()).all(|g| self.satisfied_in(g, d, &all)));
            if still {
                added.remove(&w);
            } else {
                all.insert(w);
            }
        }
        Ok(added)
    }
}

/// The ranking used for `o`; the identity when the structure has none.
fn ranking_of(s: &Structure, o: OrderSym) -> Ranking {
    s.order(o)
        .cloned()
        .unwrap_or_else(|| Ranking::identity(s.size()))
}

/// `elements` sorted ascending by `rank`.
fn sorted_by(elements: &[usize], rank: &Ranking) -> Vec<usize> {
    let mut v = elements.to_vec();
    v.sort_by_key(|&e| rank.rank(e));
    v
}

/// First `k` minimal and last `k` maximal elements.
fn extremes(sorted: &[usize], k: usize) -> impl Iterator<Item = usize> + '_ {
    let k = k.min(sorted.len());
    sorted[..k]
        .iter()
        .chain(&sorted[sorted.len() - k..])
        .copied()
}

pub fn shrink(s: &Structure, nf: &NormalForm) -> Result<ShrinkReport, ShrinkError> {
    shrink_with(s, nf, &ShrinkOptions::default())
}

pub fn shrink_with(
    s: &Structure,
    nf: &NormalForm,
    opts: &ShrinkOptions,
) -> Result<ShrinkReport, ShrinkError> {
    let rarity = classify_rare(s, nf)?;
    let bound = size_bound(nf)?;
    let n = s.size();
    let m = nf.max_m().max(1);

    if !opts.force && n as u128 <= bound {
        return Ok(ShrinkReport {
            input_size: n,
            bound,
            output: s.clone(),
            kept: (0..n).collect(),
            w0: (0..n).collect(),
            w1: Vec::new(),
            w2: Vec::new(),
            w3: Vec::new(),
            pools: Vec::new(),
            rewired: Vec::new(),
            unchanged: true,
            verified: true,
        });
    }

    let layout = TypeLayout::new(nf.signature())?;
    let types: Vec<OneType> = (0..n)
        .map(|d| layout.one_type_of(s, d))
        .collect::<Result<_, _>>()?;
    let mut by_type: BTreeMap<OneType, Vec<usize>> = BTreeMap::new();
    for (d, &t) in types.iter().enumerate() {
        by_type.entry(t).or_default().push(d);
    }
    let ranks = [ranking_of(s, OrderSym::Leq0), ranking_of(s, OrderSym::Leq1)];

    // S, W0 and W1.
    let mut w0 = BTreeSet::new();
    let mut sset = BTreeSet::new();
    for (&t, elements) in &by_type {
        if rarity.is_rare(t) {
            w0.extend(elements.iter().copied());
            sset.extend(elements.iter().copied());
            continue;
        }
        for rank in &ranks {
            let sorted = sorted_by(elements, rank);
            sset.extend(extremes(&sorted, 8 * m));
            w0.extend(extremes(&sorted, m));
        }
    }
    let w1: BTreeSet<usize> = sset.difference(&w0).copied().collect();

    // Witness closures in the input.
    let table = SymbolTable::new(nf.signature());
    let gammas: Vec<(usize, usize, Qf)> = nf
        .witness_conjuncts()
        .map(|(i, j, g)| Ok((i, j, Qf::compile(g, &table)?)))
        .collect::<Result<_, QfError>>()?;
    let in_s = Witnesses {
        view: StructureView::new(s, &table)?,
        gammas: &gammas,
        n,
    };
    let w01: BTreeSet<usize> = w0.union(&w1).copied().collect();
    let w2 = in_s.closure(&w01)?;
    let w012: BTreeSet<usize> = w01.union(&w2).copied().collect();
    let w3 = in_s.closure(&w012)?;

    let (mut b, kept) = s.restrict(w012.union(&w3).copied())?;
    let position: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &e)| (e, i)).collect();

    // Pools of reserved witnesses, drawn from W1.
    let mut pools = BTreeMap::new();
    for (&t, elements) in &by_type {
        if rarity.is_rare(t) {
            continue;
        }
        let mut left: Vec<usize> = elements
            .iter()
            .copied()
            .filter(|e| w1.contains(e))
            .collect();
        let mut four: [Vec<usize>; 4] = Default::default();
        for (k, pool) in four.iter_mut().enumerate() {
            let sorted = sorted_by(&left, &ranks[k / 2]);
            let take = m.min(sorted.len());
            *pool = if k % 2 == 0 {
                sorted[..take].to_vec()
            } else {
                sorted[sorted.len() - take..]
                    .iter()
                    .rev()
                    .copied()
                    .collect()
            };
            left.retain(|e| !pool.contains(e));
        }
        pools.insert(t, four);
    }

    // Repair the outer layer.
    let binary: Vec<String> = nf.signature().binary().map(str::to_string).collect();
    let mut rewired = Vec::new();
    let mut touched = BTreeSet::new();
    for &d in &w3 {
        for g in 0..gammas.len() {
            let (i, j, _) = gammas[g];
            let current = Witnesses {
                view: StructureView::new(&b, &table)?,
                gammas: &gammas,
                n: b.size(),
            };
            if current.first(g, position[&d]).is_some() {
                continue;
            }
            let e = in_s.first(g, d).ok_or_else(|| {
                ShrinkError::Internal(format!("element {d} has no witness in the model"))
            })?;
            let alpha = types[e];
            let k = usize::from(!ranks[i].leq(e, d));
            let pool = pools.get(&alpha).ok_or_else(|| {
                ShrinkError::Internal(format!("witness {e} of element {d} has a rare type"))
            })?;
            let &ej = pool[2 * i + k].get(j - 1).ok_or_else(|| {
                ShrinkError::Internal(format!(
                    "pool {} of type {} has no element {j}",
                    2 * i + k,
                    alpha.0
                ))
            })?;
            if !touched.insert((d.min(ej), d.max(ej))) {
                return Err(ShrinkError::Internal(format!(
                    "pair ({d}, {ej}) rewired twice"
                )));
            }
            let (bd, bej) = (position[&d], position[&ej]);
            for r in &binary {
                let forward = s.binary_holds(r, d, e).expect("validated");
                let backward = s.binary_holds(r, e, d).expect("validated");
                b.set_binary_fact(r, bd, bej, forward);
                b.set_binary_fact(r, bej, bd, backward);
            }
            rewired.push(Rewire {
                d,
                old_witness: e,
                new_witness: ej,
                conjunct: (i, j),
            });
        }
    }

    let verified = b.validate(nf.signature()).is_ok() && evaluate(&b, &nf.sentence())?;
    let report = ShrinkReport {
        input_size: n,
        bound,
        output: b,
        kept,
        w0: w0.into_iter().collect(),
        w1: w1.into_iter().collect(),
        w2: w2.into_iter().collect(),
        w3: w3.into_iter().collect(),
        pools: pools
            .into_iter()
            .map(|(t, pools)| Pools {
                one_type: t.0,
                pools,
            })
            .collect(),
        rewired,
        unchanged: false,
        verified,
    };
    if verified {
        Ok(report)
    } else {
        Err(ShrinkError::Unverified(Box::new(report)))
    }
}
