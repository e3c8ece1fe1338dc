//! Backtracking model search.
//!
//! Canonical enumeration order: rankings of the order symbols first (the
//! first order symbol of the signature fixed to the natural ranking when
//! symmetry breaking is on, the others in lexicographic order of their
//! rank vectors), then predicate facts, false before true, in element-major
//! order. The first model in this order is returned.
//!
//! Facts are checked with three-valued evaluation as soon as they are set:
//! a branch is cut when some pair already falsifies `χ0 ∧ χ1`, or some
//! element has no possible witness for some `γ`.

use itertools::Itertools;
use rayon::prelude::*;

use super::FindError;
use crate::formula::Formula;
use crate::model_check::evaluate;
use crate::normal_form::{size_bound, NormalForm};
use crate::qf::{PartialInterp, Qf, SymbolTable};
use crate::structure::{Ranking, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Fix the first order symbol to the natural ranking.
    pub break_symmetry: bool,
    /// Worker threads for the partitioned search over rankings. Results are
    /// identical to the sequential search.
    pub jobs: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            break_symmetry: true,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fact {
    Unary(usize, usize),
    Binary(usize, usize, usize),
}

impl Fact {
    fn elements(self) -> (usize, usize) {
        match self {
            Fact::Unary(_, a) => (a, a),
            Fact::Binary(_, a, b) => (a, b),
        }
    }
}

struct Problem {
    n: usize,
    table: SymbolTable,
    chi: Qf,
    gammas: Vec<Qf>,
    facts: Vec<Fact>,
    unary_id: Vec<usize>,
    binary_id: Vec<usize>,
}

impl Problem {
    fn new(nf: &NormalForm, n: usize) -> Result<Problem, FindError> {
        let table = SymbolTable::new(nf.signature());
        let chi = Qf::compile(&Formula::and(nf.chi(0).clone(), nf.chi(1).clone()), &table)?;
        let gammas = nf
            .witness_conjuncts()
            .map(|(_, _, g)| Qf::compile(g, &table))
            .collect::<Result<_, _>>()?;
        let (u, b) = (table.unary.len(), table.binary.len());
        let mut facts = Vec::new();
        for k in 0..n {
            for p in 0..u {
                facts.push(Fact::Unary(p, k));
            }
            for r in 0..b {
                facts.push(Fact::Binary(r, k, k));
            }
            for a in 0..k {
                for r in 0..b {
                    facts.push(Fact::Binary(r, a, k));
                    facts.push(Fact::Binary(r, k, a));
                }
            }
        }
        let mut unary_id = vec![0; u * n];
        let mut binary_id = vec![0; b * n * n];
        for (id, f) in facts.iter().enumerate() {
            match *f {
                Fact::Unary(p, a) => unary_id[p * n + a] = id,
                Fact::Binary(r, a, c) => binary_id[r * n * n + a * n + c] = id,
            }
        }
        Ok(Problem {
            n,
            table,
            chi,
            gammas,
            facts,
            unary_id,
            binary_id,
        })
    }

    /// Candidate ranking tuples, one ranking per order symbol of the table,
    /// in canonical order. Enumerated lazily: there are `n!` per free order.
    fn ranking_tuples(
        &self,
        break_symmetry: bool,
    ) -> Box<dyn Iterator<Item = Vec<Ranking>> + Send + '_> {
        let n = self.n;
        let k = self.table.orders.len();
        let fixed = usize::from(break_symmetry && k > 0);
        let prefix: Vec<Ranking> = (0..fixed).map(|_| Ranking::identity(n)).collect();
        if k == fixed {
            return Box::new(std::iter::once(prefix));
        }
        let free = (fixed..k)
            .map(|_| (0..n).permutations(n))
            .multi_cartesian_product()
            .map(move |perms| {
                let mut tuple = prefix.clone();
                tuple.extend(
                    perms
                        .into_iter()
                        .map(|p| Ranking::new(p).expect("permutation")),
                );
                tuple
            });
        Box::new(free)
    }
}

struct State<'p> {
    p: &'p Problem,
    rankings: Vec<Ranking>,
    values: Vec<Option<bool>>,
}

impl PartialInterp for State<'_> {
    fn unary(&self, p: usize, a: usize) -> Option<bool> {
        self.values[self.p.unary_id[p * self.p.n + a]]
    }

    fn binary(&self, r: usize, a: usize, b: usize) -> Option<bool> {
        let n = self.p.n;
        self.values[self.p.binary_id[r * n * n + a * n + b]]
    }

    fn order(&self, o: usize, a: usize, b: usize) -> Option<bool> {
        Some(self.rankings[o].leq(a, b))
    }
}

impl State<'_> {
    fn chi_ok(&self, a: usize, b: usize) -> bool {
        self.p.chi.eval3(self, a, b) != Some(false)
    }

    fn witnesses_ok(&self) -> bool {
        let n = self.p.n;
        self.p
            .gammas
            .iter()
            .all(|g| (0..n).all(|a| (0..n).any(|b| g.eval3(self, a, b) != Some(false))))
    }

    fn consistent_after(&self, fact: Fact) -> bool {
        let (a, b) = fact.elements();
        let n = self.p.n;
        for c in [a, b] {
            for d in 0..n {
                if !self.chi_ok(c, d) || !self.chi_ok(d, c) {
                    return false;
                }
            }
        }
        self.witnesses_ok()
    }

    fn consistent_all(&self) -> bool {
        let n = self.p.n;
        (0..n).all(|a| (0..n).all(|b| self.chi_ok(a, b))) && self.witnesses_ok()
    }

    /// Whether `fact = v` is immediately refuted under the current
    /// assignment. The fact is left unassigned.
    fn refutes(&mut self, idx: usize, v: bool) -> bool {
        self.values[idx] = Some(v);
        let bad = !self.consistent_after(self.p.facts[idx]);
        self.values[idx] = None;
        bad
    }

    /// Forces every unassigned fact whose other value is refuted, to a
    /// fixpoint. Forced facts are pushed on `trail`. Returns `false` on a
    /// conflict. Only assignments without a model below them are cut, so
    /// the first model found is unchanged.
    fn propagate(&mut self, trail: &mut Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            for idx in 0..self.values.len() {
                if self.values[idx].is_some() {
                    continue;
                }
                match (self.refutes(idx, false), self.refutes(idx, true)) {
                    (true, true) => return false,
                    (true, false) => self.values[idx] = Some(true),
                    (false, true) => self.values[idx] = Some(false),
                    (false, false) => continue,
                }
                trail.push(idx);
                changed = true;
            }
            if !changed {
                return true;
            }
        }
    }

    fn dfs(&mut self, start: usize) -> bool {
        let Some(idx) = (start..self.values.len()).find(|&i| self.values[i].is_none()) else {
            return true;
        };
        for v in [false, true] {
            self.values[idx] = Some(v);
            let mut trail = Vec::new();
            if self.consistent_after(self.p.facts[idx])
                && self.propagate(&mut trail)
                && self.dfs(idx + 1)
            {
                return true;
            }
            for i in trail {
                self.values[i] = None;
            }
        }
        self.values[idx] = None;
        false
    }

    fn into_structure(self) -> Result<Structure, FindError> {
        let p = self.p;
        let n = p.n;
        let mut s = Structure::new(n)?;
        for (k, name) in p.table.unary.iter().enumerate() {
            s.set_unary(
                name,
                (0..n).filter(|&a| self.values[p.unary_id[k * n + a]] == Some(true)),
            )?;
        }
        for (k, name) in p.table.binary.iter().enumerate() {
            let pairs = (0..n)
                .cartesian_product(0..n)
                .filter(|&(a, b)| self.values[p.binary_id[k * n * n + a * n + b]] == Some(true));
            s.set_binary(name, pairs)?;
        }
        for (o, r) in p.table.orders.iter().zip(self.rankings) {
            s.set_order(*o, r)?;
        }
        Ok(s)
    }
}

fn search_rankings(p: &Problem, rankings: Vec<Ranking>) -> Option<Result<Structure, FindError>> {
    let mut state = State {
        p,
        rankings,
        values: vec![None; p.facts.len()],
    };
    if state.consistent_all() && state.propagate(&mut Vec::new()) && state.dfs(0) {
        Some(state.into_structure())
    } else {
        None
    }
}

/// First model of size `n` in canonical order, with symmetry breaking.
pub fn find_model(nf: &NormalForm, n: usize) -> Result<Option<Structure>, FindError> {
    find_model_with(nf, n, &SearchOptions::default())
}

pub fn find_model_with(
    nf: &NormalForm,
    n: usize,
    opts: &SearchOptions,
) -> Result<Option<Structure>, FindError> {
    if n == 0 {
        return Err(FindError::InvalidSize);
    }
    let problem = Problem::new(nf, n)?;
    let mut tuples = problem.ranking_tuples(opts.break_symmetry);
    let found = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| FindError::Internal(e.to_string()))?;
        // Batches keep the answer equal to the sequential one: the first hit
        // of the first batch containing any hit.
        let mut found = None;
        for batch in &tuples.chunks(opts.jobs * 16) {
            let batch: Vec<Vec<Ranking>> = batch.collect();
            found = pool.install(|| {
                batch
                    .into_par_iter()
                    .find_map_first(|r| search_rankings(&problem, r))
            });
            if found.is_some() {
                break;
            }
        }
        found
    } else {
        tuples.find_map(|r| search_rankings(&problem, r))
    };
    let Some(model) = found.transpose()? else {
        return Ok(None);
    };
    match evaluate(&model, &nf.sentence()) {
        Ok(true) => Ok(Some(model)),
        Ok(false) => Err(FindError::Internal(
            "search returned a structure that is not a model".into(),
        )),
        Err(e) => Err(FindError::Internal(e.to_string())),
    }
}

/// Outcome of [`find_model_up_to`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpToResult {
    pub model: Option<Structure>,
    pub cap: usize,
    /// The small-model bound, if representable.
    pub bound: Option<u128>,
    /// No model exists at all: none up to `cap` and `cap >= bound`.
    pub complete: bool,
}

/// Tries sizes `1..=cap` in order and returns the first model found.
pub fn find_model_up_to(nf: &NormalForm, cap: usize) -> Result<UpToResult, FindError> {
    find_model_up_to_with(nf, cap, &SearchOptions::default())
}

pub fn find_model_up_to_with(
    nf: &NormalForm,
    cap: usize,
    opts: &SearchOptions,
) -> Result<UpToResult, FindError> {
    if cap == 0 {
        return Err(FindError::InvalidSize);
    }
    let bound = size_bound(nf).ok();
    for n in 1..=cap {
        if let Some(model) = find_model_with(nf, n, opts)? {
            return Ok(UpToResult {
                model: Some(model),
                cap,
                bound,
                complete: false,
            });
        }
    }
    Ok(UpToResult {
        model: None,
        cap,
        bound,
        complete: bound.is_some_and(|b| cap as u128 >= b),
    })
}
