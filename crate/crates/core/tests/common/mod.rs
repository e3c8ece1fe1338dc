//! Brute-force oracles shared by the integration tests. Everything here is
//! written against the public structure accessors only and avoids the
//! library's evaluator, normal form and search.

#![allow(dead_code)]

pub mod fixtures;

use oinv2::formula::{parse, Arity, Formula, OrderSym, Signature, Var};
use oinv2::structure::{Ranking, Structure};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn corpus() -> Vec<Formula> {
    include_str!("../corpus.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| parse(l).unwrap_or_else(|e| panic!("{l}: {e}")))
        .collect()
}

pub fn corpus_order_free() -> Vec<Formula> {
    corpus()
        .into_iter()
        .filter(|f| f.order_symbols().is_empty())
        .collect()
}

/// Direct recursive evaluation under an assignment `[x, y]`.
pub fn naive_eval(s: &Structure, f: &Formula, env: [usize; 2]) -> bool {
    let val = |v: &Var| match v {
        Var::X => env[0],
        Var::Y => env[1],
    };
    match f {
        Formula::Unary(p, v) => s.unary_relation(p).expect("interpreted")[val(v)],
        Formula::Binary(r, a, b) => {
            s.binary_relation(r).expect("interpreted")[val(a) * s.size() + val(b)]
        }
        Formula::Eq(a, b) => val(a) == val(b),
        Formula::Order(o, a, b) => {
            let ranks = s.order(*o).expect("interpreted").ranks();
            ranks[val(a)] <= ranks[val(b)]
        }
        Formula::Not(g) => !naive_eval(s, g, env),
        Formula::And(g, h) => naive_eval(s, g, env) && naive_eval(s, h, env),
        Formula::Or(g, h) => naive_eval(s, g, env) || naive_eval(s, h, env),
        Formula::Implies(g, h) => !naive_eval(s, g, env) || naive_eval(s, h, env),
        Formula::Iff(g, h) => naive_eval(s, g, env) == naive_eval(s, h, env),
        Formula::Forall(v, g) | Formula::Exists(v, g) => {
            let slot = match v {
                Var::X => 0,
                Var::Y => 1,
            };
            let mut values = (0..s.size()).map(|d| {
                let mut e = env;
                e[slot] = d;
                naive_eval(s, g, e)
            });
            if matches!(f, Formula::Forall(..)) {
                values.all(|b| b)
            } else {
                values.any(|b| b)
            }
        }
    }
}

/// Truth of a sentence; the starting assignment is irrelevant.
pub fn naive_holds(s: &Structure, f: &Formula) -> bool {
    naive_eval(s, f, [0, 0])
}

/// Every structure of size `n` over the ordinary predicates of `sig`, with
/// no orders interpreted.
pub fn all_structures(sig: &Signature, n: usize) -> Vec<Structure> {
    let preds: Vec<(String, Arity)> = sig.predicates().map(|(p, a)| (p.to_string(), a)).collect();
    let widths: Vec<usize> = preds
        .iter()
        .map(|(_, a)| match a {
            Arity::Unary => n,
            Arity::Binary => n * n,
        })
        .collect();
    let total: usize = widths.iter().sum();
    assert!(total < 24, "brute force over {total} bits is too large");
    (0u64..1 << total)
        .map(|bits| {
            let mut s = Structure::new(n).unwrap();
            let mut offset = 0;
            for ((p, a), w) in preds.iter().zip(&widths) {
                let on = |k: usize| bits >> (offset + k) & 1 == 1;
                match a {
                    Arity::Unary => s.set_unary(p, (0..n).filter(|&k| on(k))).unwrap(),
                    Arity::Binary => s
                        .set_binary(p, (0..n * n).filter(|&k| on(k)).map(|k| (k / n, k % n)))
                        .unwrap(),
                }
                offset += w;
            }
            s
        })
        .collect()
}

/// All rankings of `{0..n-1}`, via Heap's algorithm.
pub fn all_rankings(n: usize) -> Vec<Ranking> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Ranking>) {
        if k <= 1 {
            out.push(Ranking::new(a.clone()).unwrap());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }
    let mut out = Vec::new();
    heap(n, &mut (0..n).collect(), &mut out);
    out
}

pub fn with_order(s: &Structure, o: OrderSym, r: &Ranking) -> Structure {
    let mut t = s.clone();
    t.set_order(o, r.clone()).unwrap();
    t
}

/// Ordinary predicates of a formula (orders dropped).
pub fn predicates_of(f: &Formula) -> Signature {
    let mut sig = Signature::new();
    f.visit(&mut |g| match g {
        Formula::Unary(p, _) => sig.add_predicate(p, Arity::Unary).unwrap(),
        Formula::Binary(r, _, _) => sig.add_predicate(r, Arity::Binary).unwrap(),
        _ => {}
    });
    sig
}

/// The definition of order-invariance applied literally: a structure of
/// size at most `max_n` and two rankings on which `phi` disagrees.
pub fn definitional_counterexample(
    phi: &Formula,
    max_n: usize,
) -> Option<(Structure, Ranking, Ranking)> {
    let sig = predicates_of(phi);
    for n in 1..=max_n {
        let rankings = all_rankings(n);
        for s in all_structures(&sig, n) {
            let values: Vec<bool> = rankings
                .iter()
                .map(|r| naive_holds(&with_order(&s, OrderSym::Leq, r), phi))
                .collect();
            let t = values.iter().position(|&v| v);
            let f = values.iter().position(|&v| !v);
            if let (Some(t), Some(f)) = (t, f) {
                return Some((s, rankings[t].clone(), rankings[f].clone()));
            }
        }
    }
    None
}

/// Whether `φ[<=/<=0] ∧ ¬φ[<=/<=1]` has a model of size exactly `n`.
/// The two conjuncts talk about different orders, so each base structure
/// is checked by finding a ranking for each half, and the combined
/// structure is then evaluated as a whole.
pub fn noninv_model_exists(phi: &Formula, n: usize) -> bool {
    let noninv = oinv2::normal_form::build_noninv_formula(phi).unwrap();
    let Formula::And(half0, half1) = &noninv else {
        unreachable!()
    };
    let sig = predicates_of(phi);
    let rankings = all_rankings(n);
    for s in all_structures(&sig, n) {
        let pick = |half: &Formula, o: OrderSym| {
            rankings
                .iter()
                .find(|r| naive_holds(&with_order(&s, o, r), half))
                .cloned()
        };
        let both = |r0: &Ranking, r1: &Ranking| {
            let t = with_order(&with_order(&s, OrderSym::Leq0, r0), OrderSym::Leq1, r1);
            naive_holds(&t, &noninv)
        };
        if let (Some(r0), Some(r1)) = (pick(half0, OrderSym::Leq0), pick(half1, OrderSym::Leq1)) {
            assert!(both(&r0, &r1), "halves are independent");
            return true;
        }
    }
    false
}

/// A structure of size at most `max_n` falsifying an order-free `phi`.
pub fn countermodel(phi: &Formula, max_n: usize) -> Option<Structure> {
    let sig = predicates_of(phi);
    (1..=max_n)
        .flat_map(|n| all_structures(&sig, n))
        .find(|s| !naive_holds(s, phi))
}

/// Options for random formulas.
#[derive(Clone, Copy, Debug)]
pub struct Gen {
    pub orders: &'static [OrderSym],
    pub depth: u32,
}

pub fn random_var(rng: &mut impl Rng) -> Var {
    if rng.gen_bool(0.5) {
        Var::X
    } else {
        Var::Y
    }
}

/// A random formula over P, Q (unary), R (binary), equality and the given
/// orders; free variables may remain.
pub fn random_formula(rng: &mut impl Rng, g: Gen) -> Formula {
    if g.depth == 0 || rng.gen_bool(0.25) {
        let atoms = 4 + usize::from(!g.orders.is_empty());
        return match rng.gen_range(0..atoms) {
            0 => Formula::unary("P", random_var(rng)),
            1 => Formula::unary("Q", random_var(rng)),
            2 => Formula::binary("R", random_var(rng), random_var(rng)),
            3 => Formula::Eq(random_var(rng), random_var(rng)),
            _ => Formula::Order(
                *g.orders.choose(rng).unwrap(),
                random_var(rng),
                random_var(rng),
            ),
        };
    }
    let sub = Gen {
        depth: g.depth - 1,
        ..g
    };
    match rng.gen_range(0..8) {
        0 => Formula::not(random_formula(rng, sub)),
        1 => Formula::and(random_formula(rng, sub), random_formula(rng, sub)),
        2 => Formula::or(random_formula(rng, sub), random_formula(rng, sub)),
        3 => Formula::implies(random_formula(rng, sub), random_formula(rng, sub)),
        4 => Formula::iff(random_formula(rng, sub), random_formula(rng, sub)),
        5 | 6 => Formula::forall(random_var(rng), random_formula(rng, sub)),
        _ => Formula::exists(random_var(rng), random_formula(rng, sub)),
    }
}

/// Closes a formula by random quantifiers over its free variables.
pub fn close(rng: &mut impl Rng, mut f: Formula) -> Formula {
    for v in f.free_vars().into_iter().rev() {
        f = if rng.gen_bool(0.5) {
            Formula::forall(v, f)
        } else {
            Formula::exists(v, f)
        };
    }
    f
}

/// A random structure interpreting P, Q, R and the given orders.
pub fn random_structure(rng: &mut impl Rng, n: usize, orders: &[OrderSym]) -> Structure {
    let mut s = Structure::new(n).unwrap();
    s.set_unary("P", (0..n).filter(|_| rng.gen_bool(0.5)))
        .unwrap();
    s.set_unary("Q", (0..n).filter(|_| rng.gen_bool(0.5)))
        .unwrap();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|_| rng.gen_bool(0.4))
        .collect();
    s.set_binary("R", pairs).unwrap();
    for &o in orders {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        s.set_order(o, Ranking::new(perm).unwrap()).unwrap();
    }
    s
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Up to `limit` satisfying assignments of a grounded instance, made
/// distinct on the atom variables by blocking clauses, decoded to structures.
pub fn enumerate_models(cnf: &oinv2::model_find::CnfInstance, limit: usize) -> Vec<Structure> {
    let atoms = cnf.num_atom_vars();
    let mut clauses = cnf.clauses().to_vec();
    let mut out = Vec::new();
    while out.len() < limit {
        let Some(assignment) = oinv2::model_find::solve_clauses(cnf.num_vars(), &clauses) else {
            break;
        };
        out.push(cnf.decode(&assignment).unwrap());
        clauses.push(
            (1..=atoms)
                .map(|v| {
                    if assignment[v - 1] {
                        -(v as i32)
                    } else {
                        v as i32
                    }
                })
                .collect(),
        );
    }
    out
}
