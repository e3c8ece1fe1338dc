//! Programmatically generated large models of hand-written normal-form
//! sentences, for the shrinking tests.

use std::collections::BTreeSet;

use oinv2::formula::{parse, OrderSym};
use oinv2::normal_form::NormalForm;
use oinv2::shrink::{shrink_with, ShrinkError, ShrinkOptions, ShrinkReport};
use oinv2::structure::{Ranking, Structure};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub name: &'static str,
    pub nf: NormalForm,
    pub model: Structure,
}

fn nf(text: &str) -> NormalForm {
    NormalForm::recognize(&parse(text).unwrap()).expect("normal-form shape")
}

fn shuffled(rng: &mut ChaCha8Rng, n: usize) -> Ranking {
    let mut seq: Vec<usize> = (0..n).collect();
    seq.shuffle(rng);
    Ranking::from_sequence(&seq).unwrap()
}

/// Elements strictly above (`up`) or below `d` in `r`.
fn beyond(r: &Ranking, d: usize, up: bool) -> Vec<usize> {
    (0..r.len())
        .filter(|&e| {
            if up {
                r.rank(e) > r.rank(d)
            } else {
                r.rank(e) < r.rank(d)
            }
        })
        .collect()
}

/// Every element has an `R`-successor different from itself.
pub fn successor(n: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let form = nf("forall x. forall y. (R(x,y) -> !(x = y)) \
                   & forall x. forall y. (x <=0 y | y <=0 x) \
                   & forall x. forall y. (x <=1 y | y <=1 x) \
                   & forall x. exists y. R(x,y)");
    let mut s = Structure::new(n).unwrap();
    let pairs: Vec<(usize, usize)> = (0..n)
        .map(|d| {
            let e = rng.gen_range(0..n - 1);
            (d, if e >= d { e + 1 } else { e })
        })
        .collect();
    s.set_binary("R", pairs).unwrap();
    s.set_order(OrderSym::Leq0, shuffled(&mut rng, n)).unwrap();
    s.set_order(OrderSym::Leq1, shuffled(&mut rng, n)).unwrap();
    Fixture {
        name: "successor",
        nf: form,
        model: s,
    }
}

/// Witnesses are `<=0`-predecessors of the opposite `P`-colour, or the
/// element itself when no such predecessor exists.
pub fn predecessor(n: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let form = nf("forall x. exists y. (R(x,y) & y <=0 x) \
                   & forall x. forall y. (R(x,y) & !(x = y) -> (P(x) <-> !P(y))) \
                   & forall x. forall y. (x <=1 y | y <=1 x)");
    let r0 = shuffled(&mut rng, n);
    let p: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let mut s = Structure::new(n).unwrap();
    s.set_unary("P", (0..n).filter(|&d| p[d])).unwrap();
    let pairs: Vec<(usize, usize)> = (0..n)
        .map(|d| {
            let options: Vec<usize> = beyond(&r0, d, false)
                .into_iter()
                .filter(|&e| p[e] != p[d])
                .collect();
            (d, options.choose(&mut rng).copied().unwrap_or(d))
        })
        .collect();
    s.set_binary("R", pairs).unwrap();
    s.set_order(OrderSym::Leq0, r0).unwrap();
    s.set_order(OrderSym::Leq1, shuffled(&mut rng, n)).unwrap();
    Fixture {
        name: "predecessor",
        nf: form,
        model: s,
    }
}

/// Two witness conjuncts for `<=0` and one for `<=1` (M = 2).
pub fn mixed(n: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let form = nf("forall x. forall y. (R(x,y) -> x <=0 y) \
                   & forall x. exists y. R(x,y) \
                   & forall x. exists y. (S(x,y) & !(x = y)) \
                   & forall x. forall y. (S(x,y) -> x <=1 y | Q(x)) \
                   & forall x. exists y. (x <=1 y & P(y))");
    let r0 = shuffled(&mut rng, n);
    let r1 = shuffled(&mut rng, n);
    let top1 = r1.ascending()[n - 1];
    let q: Vec<bool> = (0..n).map(|d| d == top1 || rng.gen_bool(0.05)).collect();
    let mut s = Structure::new(n).unwrap();
    s.set_unary("P", (0..n).filter(|&d| d == top1 || rng.gen_bool(0.5)))
        .unwrap();
    s.set_unary("Q", (0..n).filter(|&d| q[d])).unwrap();
    let r: Vec<(usize, usize)> = (0..n)
        .map(|d| {
            (
                d,
                beyond(&r0, d, true).choose(&mut rng).copied().unwrap_or(d),
            )
        })
        .collect();
    s.set_binary("R", r).unwrap();
    let sx: Vec<(usize, usize)> = (0..n)
        .map(|d| {
            let options: Vec<usize> = if q[d] {
                (0..n).filter(|&e| e != d).collect()
            } else {
                beyond(&r1, d, true)
            };
            (d, *options.choose(&mut rng).unwrap())
        })
        .collect();
    s.set_binary("S", sx).unwrap();
    s.set_order(OrderSym::Leq0, r0).unwrap();
    s.set_order(OrderSym::Leq1, r1).unwrap();
    Fixture {
        name: "mixed",
        nf: form,
        model: s,
    }
}

/// `S` runs upwards in `<=1` with strict successors and predecessors except
/// at the ends; `R` runs downwards in `<=0` (M = 2).
pub fn chains(n: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let form = nf("forall x. forall y. (R(x,y) -> y <=0 x) \
                   & forall x. exists y. R(x,y) \
                   & forall x. forall y. (S(x,y) -> x <=1 y) \
                   & forall x. exists y. (S(x,y) & x <=1 y & (!(x = y) | Q(x))) \
                   & forall x. exists y. (S(y,x) & y <=1 x & (!(x = y) | Q(x)))");
    let r0 = shuffled(&mut rng, n);
    let r1 = shuffled(&mut rng, n);
    let order1 = r1.ascending();
    let ends = [order1[0], order1[n - 1]];
    let mut s = Structure::new(n).unwrap();
    s.set_unary("Q", ends).unwrap();
    let r: Vec<(usize, usize)> = (0..n)
        .map(|d| {
            (
                d,
                beyond(&r0, d, false).choose(&mut rng).copied().unwrap_or(d),
            )
        })
        .collect();
    s.set_binary("R", r).unwrap();
    let mut sx = Vec::new();
    for d in 0..n {
        match beyond(&r1, d, true).choose(&mut rng) {
            Some(&e) => sx.push((d, e)),
            None => sx.push((d, d)),
        }
        match beyond(&r1, d, false).choose(&mut rng) {
            Some(&e) => sx.push((e, d)),
            None => sx.push((d, d)),
        }
    }
    s.set_binary("S", sx).unwrap();
    s.set_order(OrderSym::Leq0, r0).unwrap();
    s.set_order(OrderSym::Leq1, r1).unwrap();
    Fixture {
        name: "chains",
        nf: form,
        model: s,
    }
}

/// The generated inputs used for the shrinking criteria: four sentences,
/// twelve models of sizes 50 to 1000.
pub fn all() -> Vec<Fixture> {
    vec![
        successor(500, 1),
        successor(1000, 2),
        predecessor(300, 3),
        predecessor(600, 4),
        predecessor(1000, 5),
        mixed(50, 6),
        mixed(200, 7),
        mixed(500, 8),
        mixed(1000, 9),
        chains(400, 10),
        chains(900, 11),
        chains(1000, 12),
    ]
}

/// Runs the shrinker on a fixture (forcing it when the input is already
/// small) and checks every property of the report against the input
/// independently. Returns the report and a one-line summary.
pub fn check_shrink(fix: &Fixture) -> Result<(ShrinkReport, String), String> {
    let s = &fix.model;
    let sentence = fix.nf.sentence();
    if !super::naive_holds(s, &sentence) {
        return Err(format!("{}: generated input is not a model", fix.name));
    }
    let m = fix.nf.max_m().max(1);
    let alpha = fix.nf.one_type_count().map_err(|e| e.to_string())? as usize;
    let bound = 224 * m.pow(3) * alpha;
    let force = s.size() <= bound;
    let report = match shrink_with(s, &fix.nf, &ShrinkOptions { force }) {
        Ok(r) => r,
        Err(ShrinkError::Unverified(r)) => {
            let out = &r.output;
            let broken: Vec<String> = (0..2)
                .map(|i| {
                    let bad = (0..out.size())
                        .flat_map(|a| (0..out.size()).map(move |b| (a, b)))
                        .filter(|&(a, b)| !super::naive_eval(out, fix.nf.chi(i), [a, b]))
                        .count();
                    format!("chi{i} fails on {bad} pairs")
                })
                .collect();
            return Err(format!(
                "{} (n={}): output of size {} failed verification after {} rewirings ({})",
                fix.name,
                s.size(),
                out.size(),
                r.rewired.len(),
                broken.join(", ")
            ));
        }
        Err(e) => return Err(format!("{} (n={}): {e}", fix.name, s.size())),
    };
    let fail = |msg: String| Err(format!("{} (n={}): {msg}", fix.name, s.size()));
    if report.bound != bound as u128 {
        return fail(format!("bound {} != {bound}", report.bound));
    }
    if !report.verified || !super::naive_holds(&report.output, &sentence) {
        return fail("output is not a model".into());
    }
    if report.output.size() > bound {
        return fail(format!("output size {} > {bound}", report.output.size()));
    }
    let (w01, w2, w3) = (
        report.w0.len() + report.w1.len(),
        report.w2.len(),
        report.w3.len(),
    );
    if w01 > 32 * m * alpha {
        return fail(format!("|W0 u W1| = {w01} > {}", 32 * m * alpha));
    }
    if w2 > 2 * m * w01 {
        return fail(format!("|W2| = {w2} > {}", 2 * m * w01));
    }
    if w3 > 2 * m * w2 {
        return fail(format!("|W3| = {w3} > {}", 2 * m * w2));
    }

    let mut union: Vec<usize> = [&report.w0, &report.w1, &report.w2, &report.w3]
        .into_iter()
        .flatten()
        .copied()
        .collect();
    union.sort_unstable();
    let before = union.len();
    union.dedup();
    if union.len() != before {
        return fail("W sets overlap".into());
    }
    let mut kept = report.kept.clone();
    kept.sort_unstable();
    if kept != union || report.output.size() != kept.len() {
        return fail("kept elements differ from W0 u W1 u W2 u W3".into());
    }

    let w1: BTreeSet<usize> = report.w1.iter().copied().collect();
    let pooled: BTreeSet<usize> = report
        .pools
        .iter()
        .flat_map(|p| p.pools.iter().flatten().copied())
        .collect();
    if !pooled.is_subset(&w1) {
        return fail("pool element outside W1".into());
    }
    let w3: BTreeSet<usize> = report.w3.iter().copied().collect();
    let mut touched = BTreeSet::new();
    for rw in &report.rewired {
        if !w3.contains(&rw.d) || !pooled.contains(&rw.new_witness) {
            return fail(format!("unexpected rewiring {rw:?}"));
        }
        if !touched.insert((rw.d, rw.new_witness)) || !touched.insert((rw.new_witness, rw.d)) {
            return fail(format!("pair ({}, {}) touched twice", rw.d, rw.new_witness));
        }
    }

    // Outside W3 the witness closure must hold in the input itself.
    let kept_set: BTreeSet<usize> = kept.iter().copied().collect();
    for &d in kept.iter().filter(|d| !w3.contains(d)) {
        for (_, _, gamma) in fix.nf.witness_conjuncts() {
            if !kept_set
                .iter()
                .any(|&e| super::naive_eval(s, gamma, [d, e]))
            {
                return fail(format!("element {d} outside W3 lost a witness"));
            }
        }
    }
    // The output is the induced substructure apart from rewired pairs; orders
    // are always the induced ones.
    let index = &report.kept;
    for o in [OrderSym::Leq0, OrderSym::Leq1] {
        for a in 0..index.len() {
            for b in 0..index.len() {
                if report.output.order_holds(o, a, b) != s.order_holds(o, index[a], index[b]) {
                    return fail(format!("order {o:?} changed"));
                }
            }
        }
    }
    for p in fix.nf.signature().unary() {
        for (a, &d) in index.iter().enumerate() {
            if report.output.unary_holds(p, a) != s.unary_holds(p, d) {
                return fail(format!("{p} changed at {d}"));
            }
        }
    }
    for (a, &d) in index.iter().enumerate() {
        for (b, &e) in index.iter().enumerate() {
            if touched.contains(&(d, e)) {
                continue;
            }
            for r in fix.nf.signature().binary() {
                if report.output.binary_holds(r, a, b) != s.binary_holds(r, d, e) {
                    return fail(format!("{r}({d},{e}) changed without rewiring"));
                }
            }
        }
    }

    let summary = format!(
        "{} n={} M={m} |alpha|={alpha} bound={bound} out={} W0uW1={w01} W2={w2} W3={} rewired={}",
        fix.name,
        s.size(),
        report.output.size(),
        report.w3.len(),
        report.rewired.len()
    );
    Ok((report, summary))
}
