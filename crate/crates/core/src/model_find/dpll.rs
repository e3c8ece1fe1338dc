//! A small DPLL solver with two watched literals and chronological
//! backtracking.
//!
//! Branching is deterministic: the lowest-index unassigned variable that
//! occurs in some clause, tried true first. Variables that occur in no
//! clause are reported false.

use super::cnf::CnfInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// `assignment[v - 1]` is the value of variable `v`.
    Sat(Vec<bool>),
    Unsat,
}

pub fn solve_cnf(cnf: &CnfInstance) -> SolveResult {
    match solve_clauses(cnf.num_vars(), cnf.clauses()) {
        Some(a) => SolveResult::Sat(a),
        None => SolveResult::Unsat,
    }
}

// Literal encoding: variable v (1-based) maps to 2(v-1) for the positive
// literal and 2(v-1)+1 for the negative one.
fn code(lit: i32) -> usize {
    let v = lit.unsigned_abs() as usize - 1;
    2 * v + usize::from(lit < 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    Unassigned,
    True,
    False,
}

struct Solver {
    clauses: Vec<Vec<usize>>,
    watches: Vec<Vec<usize>>,
    value: Vec<Value>,
    occurs: Vec<bool>,
    trail: Vec<usize>,
    qhead: usize,
    /// Per decision level: trail length before the decision, the decision
    /// literal, and whether it has already been flipped.
    levels: Vec<(usize, usize, bool)>,
}

impl Solver {
    fn lit_value(&self, l: usize) -> Value {
        match (self.value[l / 2], l % 2 == 1) {
            (Value::Unassigned, _) => Value::Unassigned,
            (Value::True, false) | (Value::False, true) => Value::True,
            _ => Value::False,
        }
    }

    fn assign(&mut self, l: usize) {
        self.value[l / 2] = if l.is_multiple_of(2) {
            Value::True
        } else {
            Value::False
        };
        self.trail.push(l);
    }

    /// Assigns `l` unless it is already true; returns false on a conflict.
    fn enqueue(&mut self, l: usize) -> bool {
        match self.lit_value(l) {
            Value::True => true,
            Value::False => false,
            Value::Unassigned => {
                self.assign(l);
                true
            }
        }
    }

    /// Unit propagation; returns false on a conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let falsified = self.trail[self.qhead] ^ 1;
            self.qhead += 1;
            let watching = std::mem::take(&mut self.watches[falsified]);
            let mut keep = Vec::with_capacity(watching.len());
            let mut conflict = false;
            let mut iter = watching.into_iter();
            for ci in iter.by_ref() {
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                if self.lit_value(other) == Value::True {
                    keep.push(ci);
                    continue;
                }
                let replacement = (2..self.clauses[ci].len())
                    .find(|&k| self.lit_value(self.clauses[ci][k]) != Value::False);
                if let Some(k) = replacement {
                    self.clauses[ci].swap(1, k);
                    let w = self.clauses[ci][1];
                    self.watches[w].push(ci);
                    continue;
                }
                keep.push(ci);
                if !self.enqueue(other) {
                    conflict = true;
                    break;
                }
            }
            keep.extend(iter);
            self.watches[falsified] = keep;
            if conflict {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, len: usize) {
        for l in self.trail.drain(len..) {
            self.value[l / 2] = Value::Unassigned;
        }
        self.qhead = len;
    }

    /// Undoes the most recent unflipped decision and asserts its negation.
    /// Returns false when no decision is left to flip.
    fn backtrack(&mut self) -> bool {
        while let Some((start, lit, flipped)) = self.levels.pop() {
            self.undo_to(start);
            if !flipped {
                self.levels.push((start, lit ^ 1, true));
                self.assign(lit ^ 1);
                return true;
            }
        }
        false
    }

    fn solve(&mut self) -> bool {
        let mut next = 0;
        loop {
            if !self.propagate() {
                if !self.backtrack() {
                    return false;
                }
                next = 0;
                continue;
            }
            while next < self.value.len()
                && (!self.occurs[next] || self.value[next] != Value::Unassigned)
            {
                next += 1;
            }
            if next == self.value.len() {
                return true;
            }
            let lit = 2 * next;
            self.levels.push((self.trail.len(), lit, false));
            self.assign(lit);
        }
    }
}

/// Solves a clause set over variables `1..=num_vars`; `None` if unsat.
pub fn solve_clauses(num_vars: usize, clauses: &[Vec<i32>]) -> Option<Vec<bool>> {
    let mut solver = Solver {
        clauses: Vec::new(),
        watches: vec![Vec::new(); 2 * num_vars],
        value: vec![Value::Unassigned; num_vars],
        occurs: vec![false; num_vars],
        trail: Vec::new(),
        qhead: 0,
        levels: Vec::new(),
    };
    let mut units = Vec::new();
    for clause in clauses {
        let mut lits: Vec<usize> = clause.iter().map(|&l| code(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            // Tautologies constrain nothing, but their variables still count
            // as occurring.
            lits.iter().for_each(|&l| solver.occurs[l / 2] = true);
            continue;
        }
        for &l in &lits {
            solver.occurs[l / 2] = true;
        }
        match lits.len() {
            0 => return None,
            1 => units.push(lits[0]),
            _ => {
                let ci = solver.clauses.len();
                solver.watches[lits[0]].push(ci);
                solver.watches[lits[1]].push(ci);
                solver.clauses.push(lits);
            }
        }
    }
    for l in units {
        if !solver.enqueue(l) {
            return None;
        }
    }
    if !solver.solve() {
        return None;
    }
    Some(solver.value.iter().map(|&v| v == Value::True).collect())
}
