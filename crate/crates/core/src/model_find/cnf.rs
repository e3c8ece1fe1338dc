//! Grounding of "a model of size n exists" into CNF.
//!
//! Variable numbering is deterministic: ground atoms first (unary
//! predicates, binary predicates, then order facts, each in symbol order
//! and lexicographic tuple order), then Tseitin auxiliaries in the order
//! they are created.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use super::FindError;
use crate::formula::{Formula, OrderSym, Var};
use crate::normal_form::NormalForm;
use crate::qf::{Qf, SymbolTable};
use crate::structure::{Ranking, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroundAtom {
    Unary(String, usize),
    Binary(String, usize, usize),
    /// `a <=i b`
    Order(OrderSym, usize, usize),
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundAtom::Unary(p, a) => write!(f, "{p}({a})"),
            GroundAtom::Binary(r, a, b) => write!(f, "{r}({a},{b})"),
            GroundAtom::Order(o, a, b) => write!(f, "{}({a},{b})", o.key()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundOptions {
    /// Unit clauses fixing the first order symbol to the natural order.
    pub break_symmetry: bool,
    /// Maximum number of propositional variables.
    pub var_budget: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            break_symmetry: true,
            var_budget: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfInstance {
    n: usize,
    table: SymbolTable,
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
    /// `atoms[v - 1]` is the ground atom of variable `v`.
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, u32>,
}

impl CnfInstance {
    pub fn universe_size(&self) -> usize {
        self.n
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Number of variables standing for ground atoms; the rest are Tseitin
    /// auxiliaries.
    pub fn num_atom_vars(&self) -> usize {
        self.atoms.len()
    }

    pub fn decode_var(&self, var: u32) -> Option<&GroundAtom> {
        self.atoms.get((var as usize).checked_sub(1)?)
    }

    pub fn var_of(&self, atom: &GroundAtom) -> Option<u32> {
        self.index.get(atom).copied()
    }

    /// The decode map as `(variable, atom)` pairs in variable order.
    pub fn decode_map(&self) -> impl Iterator<Item = (u32, &GroundAtom)> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (i as u32 + 1, a))
    }

    /// DIMACS text: decode map comments, header, one clause per line.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        for (v, atom) in self.decode_map() {
            writeln!(out, "c map {v} {atom}").expect("write to string");
        }
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len()).expect("write to string");
        for clause in &self.clauses {
            for lit in clause {
                write!(out, "{lit} ").expect("write to string");
            }
            out.push_str("0\n");
        }
        out
    }

    /// Reads a structure off a satisfying assignment (`assignment[v - 1]`
    /// is the value of variable `v`).
    pub fn decode(&self, assignment: &[bool]) -> Result<Structure, FindError> {
        let n = self.n;
        let value = |atom: &GroundAtom| -> bool {
            let v = self.index[atom] as usize;
            assignment[v - 1]
        };
        let mut s = Structure::new(n)?;
        for p in &self.table.unary {
            s.set_unary(
                p,
                (0..n).filter(|&a| value(&GroundAtom::Unary(p.clone(), a))),
            )?;
        }
        for r in &self.table.binary {
            let mut pairs = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if value(&GroundAtom::Binary(r.clone(), a, b)) {
                        pairs.push((a, b));
                    }
                }
            }
            s.set_binary(r, pairs)?;
        }
        for &o in &self.table.orders {
            let rank = (0..n)
                .map(|a| {
                    (0..n)
                        .filter(|&b| b != a && value(&GroundAtom::Order(o, b, a)))
                        .count()
                })
                .collect();
            let ranking = Ranking::new(rank)
                .map_err(|_| FindError::Internal(format!("{} is not a linear order", o.key())))?;
            s.set_order(o, ranking)?;
        }
        Ok(s)
    }
}

/// Propositional formula over ground-atom literals.
#[derive(Debug, Clone)]
enum Prop {
    Const(bool),
    Lit(i32),
    And(Vec<Prop>),
    Or(Vec<Prop>),
    Iff(Box<Prop>, Box<Prop>),
}

impl Prop {
    fn negate(self) -> Prop {
        match self {
            Prop::Const(b) => Prop::Const(!b),
            Prop::Lit(l) => Prop::Lit(-l),
            Prop::And(ps) => Prop::Or(ps.into_iter().map(Prop::negate).collect()),
            Prop::Or(ps) => Prop::And(ps.into_iter().map(Prop::negate).collect()),
            Prop::Iff(a, b) => Prop::iff(a.negate(), *b),
        }
    }

    fn and(ps: Vec<Prop>) -> Prop {
        let mut out = Vec::new();
        for p in ps {
            match p {
                Prop::Const(true) => {}
                Prop::Const(false) => return Prop::Const(false),
                Prop::And(qs) => out.extend(qs),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Prop::Const(true),
            1 => out.pop().expect("one element"),
            _ => Prop::And(out),
        }
    }

    fn or(ps: Vec<Prop>) -> Prop {
        let mut out = Vec::new();
        for p in ps {
            match p {
                Prop::Const(false) => {}
                Prop::Const(true) => return Prop::Const(true),
                Prop::Or(qs) => out.extend(qs),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Prop::Const(false),
            1 => out.pop().expect("one element"),
            _ => Prop::Or(out),
        }
    }

    fn iff(a: Prop, b: Prop) -> Prop {
        match (a, b) {
            (Prop::Const(true), p) | (p, Prop::Const(true)) => p,
            (Prop::Const(false), p) | (p, Prop::Const(false)) => p.negate(),
            (a, b) => Prop::Iff(Box::new(a), Box::new(b)),
        }
    }
}

struct Grounder {
    n: usize,
    budget: usize,
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
    unary_var: Vec<i32>,
    binary_var: Vec<i32>,
    order_var: Vec<i32>,
}

fn pick(v: Var, a: usize, b: usize) -> usize {
    match v {
        Var::X => a,
        Var::Y => b,
    }
}

impl Grounder {
    fn fresh(&mut self) -> Result<i32, FindError> {
        self.num_vars += 1;
        if self.num_vars > self.budget {
            return Err(FindError::VariableBudget {
                needed: self.num_vars,
                budget: self.budget,
            });
        }
        Ok(self.num_vars as i32)
    }

    fn ground(&self, q: &Qf, a: usize, b: usize) -> Prop {
        let n = self.n;
        match q {
            Qf::Unary(p, v) => Prop::Lit(self.unary_var[p * n + pick(*v, a, b)]),
            Qf::Binary(r, u, v) => {
                Prop::Lit(self.binary_var[r * n * n + pick(*u, a, b) * n + pick(*v, a, b)])
            }
            Qf::Eq(u, v) => Prop::Const(pick(*u, a, b) == pick(*v, a, b)),
            Qf::Order(o, u, v) => {
                Prop::Lit(self.order_var[o * n * n + pick(*u, a, b) * n + pick(*v, a, b)])
            }
            Qf::Not(g) => self.ground(g, a, b).negate(),
            Qf::And(g, h) => Prop::and(vec![self.ground(g, a, b), self.ground(h, a, b)]),
            Qf::Or(g, h) => Prop::or(vec![self.ground(g, a, b), self.ground(h, a, b)]),
            Qf::Implies(g, h) => {
                Prop::or(vec![self.ground(g, a, b).negate(), self.ground(h, a, b)])
            }
            Qf::Iff(g, h) => Prop::iff(self.ground(g, a, b), self.ground(h, a, b)),
        }
    }

    /// Literal equivalent to `p`, which must not be constant.
    fn tseitin(&mut self, p: Prop) -> Result<i32, FindError> {
        Ok(match p {
            Prop::Const(_) => unreachable!("constants are simplified away"),
            Prop::Lit(l) => l,
            Prop::And(ps) => {
                let lits = ps
                    .into_iter()
                    .map(|q| self.tseitin(q))
                    .collect::<Result<Vec<_>, _>>()?;
                let t = self.fresh()?;
                let mut long = vec![t];
                for &l in &lits {
                    self.clauses.push(vec![-t, l]);
                    long.push(-l);
                }
                self.clauses.push(long);
                t
            }
            Prop::Or(ps) => {
                let lits = ps
                    .into_iter()
                    .map(|q| self.tseitin(q))
                    .collect::<Result<Vec<_>, _>>()?;
                let t = self.fresh()?;
                let mut long = vec![-t];
                for &l in &lits {
                    self.clauses.push(vec![t, -l]);
                    long.push(l);
                }
                self.clauses.push(long);
                t
            }
            Prop::Iff(a, b) => {
                let la = self.tseitin(*a)?;
                let lb = self.tseitin(*b)?;
                let t = self.fresh()?;
                self.clauses.push(vec![-t, -la, lb]);
                self.clauses.push(vec![-t, la, -lb]);
                self.clauses.push(vec![t, la, lb]);
                self.clauses.push(vec![t, -la, -lb]);
                t
            }
        })
    }

    fn assert(&mut self, p: Prop) -> Result<(), FindError> {
        match p {
            Prop::Const(true) => {}
            Prop::Const(false) => self.clauses.push(Vec::new()),
            Prop::And(ps) => {
                for q in ps {
                    self.assert(q)?;
                }
            }
            Prop::Or(ps) => {
                let clause = ps
                    .into_iter()
                    .map(|q| self.tseitin(q))
                    .collect::<Result<Vec<_>, _>>()?;
                self.clauses.push(clause);
            }
            other => {
                let l = self.tseitin(other)?;
                self.clauses.push(vec![l]);
            }
        }
        Ok(())
    }
}

pub fn ground_to_cnf(nf: &NormalForm, n: usize) -> Result<CnfInstance, FindError> {
    ground_to_cnf_with(nf, n, &GroundOptions::default())
}

pub fn ground_to_cnf_with(
    nf: &NormalForm,
    n: usize,
    opts: &GroundOptions,
) -> Result<CnfInstance, FindError> {
    if n == 0 {
        return Err(FindError::InvalidSize);
    }
    let table = SymbolTable::new(nf.signature());
    let chi = Qf::compile(&Formula::and(nf.chi(0).clone(), nf.chi(1).clone()), &table)?;
    let gammas: Vec<Qf> = nf
        .witness_conjuncts()
        .map(|(_, _, g)| Qf::compile(g, &table))
        .collect::<Result<_, _>>()?;

    let needed = n * table.unary.len() + n * n * (table.binary.len() + table.orders.len());
    if needed > opts.var_budget {
        return Err(FindError::VariableBudget {
            needed,
            budget: opts.var_budget,
        });
    }

    let mut atoms = Vec::with_capacity(needed);
    for p in &table.unary {
        for a in 0..n {
            atoms.push(GroundAtom::Unary(p.clone(), a));
        }
    }
    for r in &table.binary {
        for a in 0..n {
            for b in 0..n {
                atoms.push(GroundAtom::Binary(r.clone(), a, b));
            }
        }
    }
    for &o in &table.orders {
        for a in 0..n {
            for b in 0..n {
                atoms.push(GroundAtom::Order(o, a, b));
            }
        }
    }
    let nu = n * table.unary.len();
    let nb = n * n * table.binary.len();
    let var = |i: usize| i as i32 + 1;
    let mut g = Grounder {
        n,
        budget: opts.var_budget,
        num_vars: atoms.len(),
        clauses: Vec::new(),
        unary_var: (0..nu).map(var).collect(),
        binary_var: (nu..nu + nb).map(var).collect(),
        order_var: (nu + nb..atoms.len()).map(var).collect(),
    };

    // Linear-order axioms.
    for k in 0..table.orders.len() {
        let o = |a: usize, b: usize| g.order_var[k * n * n + a * n + b];
        let mut axioms = Vec::new();
        for a in 0..n {
            axioms.push(vec![o(a, a)]);
        }
        for a in 0..n {
            for b in a + 1..n {
                axioms.push(vec![-o(a, b), -o(b, a)]);
                axioms.push(vec![o(a, b), o(b, a)]);
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a != b && b != c && a != c {
                        axioms.push(vec![-o(a, b), -o(b, c), o(a, c)]);
                    }
                }
            }
        }
        g.clauses.extend(axioms);
    }

    // Universal conjuncts.
    for a in 0..n {
        for b in 0..n {
            let p = g.ground(&chi, a, b);
            g.assert(p)?;
        }
    }

    // Witness obligations.
    for gamma in &gammas {
        for a in 0..n {
            let options = Prop::or((0..n).map(|b| g.ground(gamma, a, b)).collect());
            g.assert(options)?;
        }
    }

    if opts.break_symmetry && !table.orders.is_empty() {
        for a in 0..n {
            for b in 0..n {
                let l = g.order_var[a * n + b];
                g.clauses.push(vec![if a <= b { l } else { -l }]);
            }
        }
    }

    let index = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i as u32 + 1))
        .collect();
    Ok(CnfInstance {
        n,
        table,
        num_vars: g.num_vars,
        clauses: g.clauses,
        atoms,
        index,
    })
}
