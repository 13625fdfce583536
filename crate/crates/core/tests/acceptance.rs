//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use qhorn_core::harness::{
    equivalent_variant, gen_random_general, gen_random_qhorn1, gen_random_rp, gen_random_rp_raw, learn_with_stats,
    mutate_query, GenSpec,
};
use qhorn_core::{
    build_verification_set, causal_density, equivalent, equivalent_bruteforce, learn_rp, normalize,
    simulated_oracle, CompiledQuery, ExistentialConj, ItemKind, QhornQuery, QueryClass, RpOptions, Tuple,
    UniversalHorn, VarId, VarSet,
};

const WORKED_LEARN_LIMIT: Duration = Duration::from_secs(1);
const QHORN1_TRIALS: usize = 500;
const QHORN1_N: std::ops::RangeInclusive<usize> = 4..=12;
const QHORN1_FACTOR: f64 = 12.0;
const QHORN1_LIMIT: Duration = Duration::from_secs(60);
const RP_TRIALS: usize = 200;
const RP_MAX_N: usize = 8;
const RP_MAX_THETA: usize = 2;
const RP_FACTOR: f64 = 8.0;
const RP_LIMIT: Duration = Duration::from_secs(300);
const EQUIV_PAIRS: usize = 300;
const MUTANT_PAIRS: usize = 200;
const VARIANT_PAIRS: usize = 50;
const NORMALIZE_QUERIES: usize = 100;
const WORKED_VERIFICATION_SIZE: usize = 13;

fn worked_example() -> QhornQuery {
    QhornQuery::parse_shorthand("∀x1x4→x5 ∀x3x4→x5 ∀x1x2→x6 ∃x1x2x3 ∃x2x3x4 ∃x1x2x5 ∃x2x3x5x6", 6).unwrap()
}

fn strings(ts: impl IntoIterator<Item = Tuple>) -> BTreeSet<String> {
    ts.into_iter().map(|t| t.to_string()).collect()
}

fn set(v: &[&str]) -> BTreeSet<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn lg(n: usize) -> f64 {
    (n as f64).log2().max(1.0)
}

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1() -> Outcome {
    let target = worked_example();
    let start = Instant::now();
    let learned = learn_rp(&mut simulated_oracle(target), 6, RpOptions::default()).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let nq = normalize(&learned);
    let ex = strings(nq.existential_tuples());
    let un = strings(nq.universal_tuples());
    check(ex == set(&["110011", "100110", "111001", "011011", "011110"]), format!("existential tuples {ex:?}"))?;
    check(un == set(&["100101", "001101", "110010"]), format!("universal tuples {un:?}"))?;
    check(took < WORKED_LEARN_LIMIT, format!("took {took:?}"))?;
    Ok(format!("learned {learned} in {took:?}"))
}

fn criterion_2() -> Outcome {
    let items = build_verification_set(&worked_example()).map_err(|e| e.to_string())?;
    let of = |k: ItemKind| items.iter().filter(move |i| i.kind == k);
    let a1: Vec<_> = of(ItemKind::A1).map(|i| strings(i.question.iter())).collect();
    check(a1 == [set(&["111001", "011110", "110011", "011011", "100110"])], format!("A1 {a1:?}"))?;
    let n2: BTreeSet<_> = of(ItemKind::N2).map(|i| strings(i.question.iter())).collect();
    let want_n2: BTreeSet<_> =
        [set(&["111111", "100101"]), set(&["111111", "001101"]), set(&["111111", "110010"])].into_iter().collect();
    check(n2 == want_n2, format!("N2 {n2:?}"))?;
    let a2 = of(ItemKind::A2).find(|i| i.provenance == "∀x1x4→x5").map(|i| strings(i.question.iter()));
    check(a2 == Some(set(&["111111", "100001", "000101"])), format!("A2 {a2:?}"))?;
    let a4: Vec<_> = of(ItemKind::A4).map(|i| strings(i.question.iter())).collect();
    check(a4 == [set(&["111111", "011111", "101111", "110111", "111011"])], format!("A4 {a4:?}"))?;
    Ok(format!("{} items", items.len()))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let ns: Vec<usize> = QHORN1_N.collect();
    let results: Vec<Result<(usize, usize, f64), String>> = (0..QHORN1_TRIALS)
        .into_par_iter()
        .map(|i| {
            let n = ns[i % ns.len()];
            let target = gen_random_qhorn1(&GenSpec::qhorn1(n, 3_000 + i as u64)).map_err(|e| e.to_string())?;
            let (learned, stats) =
                learn_with_stats(QueryClass::Qhorn1, &target, RpOptions::default()).map_err(|e| format!("{target}: {e}"))?;
            if !equivalent(&learned, &target).map_err(|e| e.to_string())? {
                return Err(format!("learned {learned} for {target}"));
            }
            let bound = QHORN1_FACTOR * n as f64 * lg(n);
            if stats.questions as f64 > bound {
                return Err(format!("{target}: {} questions > {bound:.0}", stats.questions));
            }
            Ok((n, stats.questions, stats.questions as f64 / (n as f64 * lg(n))))
        })
        .collect();
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let took = start.elapsed();
    check(took < QHORN1_LIMIT, format!("took {took:?}"))?;
    let worst = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(format!("{} trials, max questions/(n lg n) = {worst:.2}, {took:?}", rows.len()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let results: Vec<Result<f64, String>> = (0..RP_TRIALS)
        .into_par_iter()
        .map(|i| {
            let n = 2 + i % (RP_MAX_N - 1);
            let theta = 1 + i % RP_MAX_THETA;
            let k = 1 + (i / 7) % 6;
            let target = gen_random_rp(&GenSpec::rp(n, k, theta, 4_000 + i as u64)).map_err(|e| e.to_string())?;
            let th = causal_density(&target);
            if th > RP_MAX_THETA {
                return Err(format!("{target}: causal density {th}"));
            }
            let options = RpOptions { theta_cap: RP_MAX_THETA, ..RpOptions::default() };
            let (learned, stats) = learn_with_stats(QueryClass::Rp, &target, options).map_err(|e| format!("{target}: {e}"))?;
            if !equivalent(&learned, &target).map_err(|e| e.to_string())? {
                return Err(format!("learned {learned} for {target}"));
            }
            let k = target.size();
            let bound = RP_FACTOR * ((n as f64).powi(th as i32 + 1) + k as f64 * n as f64 * lg(n));
            if stats.questions as f64 > bound {
                return Err(format!("{target}: {} questions > {bound:.0}", stats.questions));
            }
            Ok(stats.questions as f64 / bound)
        })
        .collect();
    let ratios = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let took = start.elapsed();
    check(took < RP_LIMIT, format!("took {took:?}"))?;
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    Ok(format!("{} trials, max questions/bound = {worst:.3}, {took:?}", ratios.len()))
}

fn criterion_5() -> Outcome {
    let mut equal = 0;
    for i in 0..EQUIV_PAIRS {
        let seed = 5_000 + i as u64;
        let q = gen_random_rp_raw(&GenSpec::rp(4, 1 + i % 5, 1 + i % 2, seed)).map_err(|e| e.to_string())?;
        let other = match i % 3 {
            0 => mutate_query(&q, seed).unwrap_or_else(|_| q.clone()),
            1 => equivalent_variant(&q, seed).map_err(|e| e.to_string())?,
            _ => gen_random_rp_raw(&GenSpec::rp(4, 1 + i % 4, 2, seed ^ 0xABCD)).map_err(|e| e.to_string())?,
        };
        let fast = equivalent(&q, &other).map_err(|e| e.to_string())?;
        let brute = equivalent_bruteforce(&q, &other).map_err(|e| e.to_string())?;
        check(fast == brute, format!("{q} vs {other}: equivalent={fast}, brute force={brute}"))?;
        equal += fast as usize;
    }
    Ok(format!("{EQUIV_PAIRS} pairs agree ({equal} equivalent)"))
}

fn disagrees(q_g: &QhornQuery, q_i: &QhornQuery) -> Result<bool, String> {
    let items = build_verification_set(q_g).map_err(|e| e.to_string())?;
    for item in &items {
        if q_i.evaluate(&item.question).map_err(|e| e.to_string())? != item.expected {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Every role-preserving query over two variables with at least one
/// expression, one per equivalence class. The empty query is left out: its
/// verification set is `{11}` plus A4, which every query satisfied by those
/// tuples also answers.
fn two_variable_grid() -> Vec<QhornQuery> {
    let x = |i: usize| VarId::from_one_based(i).unwrap();
    let s = VarSet::from_one_based;
    let universal_choices: Vec<Vec<UniversalHorn>> = vec![
        vec![],
        vec![UniversalHorn::bodyless(x(1))],
        vec![UniversalHorn::bodyless(x(2))],
        vec![UniversalHorn::new(s(&[2]), x(1))],
        vec![UniversalHorn::new(s(&[1]), x(2))],
        vec![UniversalHorn::bodyless(x(1)), UniversalHorn::bodyless(x(2))],
    ];
    let conjs = [s(&[1]), s(&[2]), s(&[1, 2])];
    let mut out: Vec<QhornQuery> = Vec::new();
    for us in &universal_choices {
        for mask in 0..8u32 {
            let es = (0..3).filter(|b| mask & (1 << b) != 0).map(|b| ExistentialConj::new(conjs[b]));
            let q = QhornQuery::new(2, us.clone(), es).unwrap();
            if q.size() == 0 {
                continue;
            }
            if !out.iter().any(|o| equivalent(o, &q).unwrap()) {
                out.push(q);
            }
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let mut pairs = 0;
    let mut seed = 6_000u64;
    while pairs < MUTANT_PAIRS {
        seed += 1;
        let n = 2 + (seed as usize % 5);
        let q_g = gen_random_rp(&GenSpec::rp(n, 1 + seed as usize % 5, 1 + seed as usize % 2, seed)).map_err(|e| e.to_string())?;
        let Ok(q_i) = mutate_query(&q_g, seed) else { continue };
        if n <= 4 {
            check(!equivalent_bruteforce(&q_g, &q_i).map_err(|e| e.to_string())?, format!("mutant {q_i} of {q_g} is equivalent"))?;
        }
        check(disagrees(&q_g, &q_i)?, format!("no item separates {q_g} from mutant {q_i}"))?;
        pairs += 1;
    }
    for i in 0..VARIANT_PAIRS {
        let seed = 6_500 + i as u64;
        let q_g = gen_random_rp(&GenSpec::rp(2 + i % 5, 1 + i % 5, 1 + i % 2, seed)).map_err(|e| e.to_string())?;
        let q_i = equivalent_variant(&q_g, seed).map_err(|e| e.to_string())?;
        check(!disagrees(&q_g, &q_i)?, format!("variant {q_i} of {q_g} disagrees"))?;
    }
    let grid = two_variable_grid();
    let mut grid_pairs = 0;
    for a in &grid {
        for b in &grid {
            if std::ptr::eq(a, b) {
                continue;
            }
            check(!equivalent_bruteforce(a, b).map_err(|e| e.to_string())?, format!("grid holds equivalent {a} and {b}"))?;
            check(disagrees(a, b)?, format!("grid pair {a} / {b} not separated"))?;
            grid_pairs += 1;
        }
    }
    Ok(format!("{pairs} mutants caught, {VARIANT_PAIRS} variants agree, {} two-variable classes ({grid_pairs} ordered pairs)", grid.len()))
}

fn criterion_7() -> Outcome {
    let mut checked = 0;
    for i in 0..400 {
        let seed = 7_000 + i as u64;
        let q = gen_random_rp(&GenSpec::rp(1 + i % 8, i % 7, i % 3, seed)).map_err(|e| e.to_string())?;
        let nq = normalize(&q);
        let (ke, ku) = (nq.existentials().len(), nq.universals().len());
        let size = build_verification_set(&q).map_err(|e| e.to_string())?.len();
        check(size <= 2 + ke + 3 * ku, format!("{q}: {size} items > 2 + {ke} + 3·{ku}"))?;
        checked += 1;
    }
    let worked = build_verification_set(&worked_example()).map_err(|e| e.to_string())?.len();
    check(worked == WORKED_VERIFICATION_SIZE, format!("worked example has {worked} items"))?;
    Ok(format!("{checked} queries within bound, worked example {worked}"))
}

fn criterion_8() -> Outcome {
    for i in 0..NORMALIZE_QUERIES {
        let seed = 8_000 + i as u64;
        let n = 1 + i % 4;
        let spec = GenSpec::rp(n, 1 + i % 5, 1 + i % 2, seed);
        let q = if i % 2 == 0 { gen_random_rp_raw(&spec) } else { gen_random_general(&spec) }.map_err(|e| e.to_string())?;
        let normal = normalize(&q).to_query();
        let (a, b) = (CompiledQuery::new(&q).map_err(|e| e.to_string())?, CompiledQuery::new(&normal).map_err(|e| e.to_string())?);
        let objects = 1u64 << (1u32 << n);
        let tuples: Vec<Tuple> = (0..1u32 << n).map(|b| Tuple::new(n, VarSet::from_bits(b)).unwrap()).collect();
        for obj in 0..objects {
            let present: Vec<Tuple> = tuples.iter().copied().filter(|t| obj & (1 << t.true_set().bits()) != 0).collect();
            let before = q.evaluate_tuples(&present).map_err(|e| e.to_string())?;
            let after = normal.evaluate_tuples(&present).map_err(|e| e.to_string())?;
            check(before == after, format!("{q} vs {normal} differ on object {obj:#x}"))?;
            check(a.label(obj) == before && b.label(obj) == after, format!("compiled evaluation disagrees on {q}"))?;
        }
    }
    Ok(format!("{NORMALIZE_QUERIES} queries preserved on every object"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("learning the worked example", criterion_1),
        ("verification set of the worked example", criterion_2),
        ("qhorn-1 round trip", criterion_3),
        ("role-preserving round trip", criterion_4),
        ("equivalence vs brute force", criterion_5),
        ("verification soundness and completeness", criterion_6),
        ("verification set size", criterion_7),
        ("normalization preserves semantics", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} [{:?}]", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
