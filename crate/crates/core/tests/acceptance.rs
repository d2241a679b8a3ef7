//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use bsync::bits::{
    count_executions, count_executions_with, decompose, decompose_with, is_bit_decomposable,
    scaled_count, FormulaTree, Limits, Strategy,
};
use bsync::calculus::{enumerate_executions, parse_process, ProcessTerm};
use bsync::ctlgraph::{build_ctg, encode_poset, has_deadlock, to_poset, ControlGraph};
use bsync::oracles::{brute_force_extensions, chi_square_uniformity};
use bsync::polynomials::Rational;
use bsync::random::seeded;
use bsync::sampler::{choose_branch, sample_execution, Sampler};
use bsync::subclasses::{
    fj_count, gen_arch, gen_fork_join, is_arch, is_fork_join, sp_tree,
};
use num_bigint::BigUint;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// Counts through the default strategy and flags non-integral volumes.
fn bits_count(g: &ControlGraph) -> Result<BigUint, String> {
    count_executions(g).map_err(|e| e.to_string())
}

fn example1_count() -> Outcome {
    let start = Instant::now();
    let g = common::example1();
    let count = bits_count(&g)?;
    ensure(count == BigUint::from(14u32), || format!("count {count}"))?;
    let tree = decompose(&g, Strategy::Default).map_err(|e| e.to_string())?;
    let mut leaves = tree.leaf_volumes();
    leaves.sort();
    let f8 = 40320;
    ensure(leaves == vec![ratio(6, f8), ratio(8, f8)], || format!("leaf volumes {leaves:?}"))?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!("14 executions, leaves 6/8! + 8/8!, {t:.2?}"))
}

fn sys_count() -> Outcome {
    let start = Instant::now();
    let p = parse_process(&common::sys_text()).map_err(|e| e.to_string())?;
    let g = build_ctg(&p).map_err(|e| e.to_string())?;
    let count = bits_count(&g)?;
    let t = start.elapsed();
    ensure(count == BigUint::from(1_975_974u32), || format!("count {count}"))?;
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("1975974 executions in {t:.2?}"))
}

fn deadlock_agreement() -> Outcome {
    let mut corpus = common::exhaustive_corpus(7, 5);
    let exhaustive = corpus.len();
    let mut rng = seeded(2024);
    for i in 0..200 {
        corpus.push(common::random_term(&mut rng, 6 + i % 5, 3));
    }
    let mut deadlocked = 0;
    for p in &corpus {
        let sem = enumerate_executions(p, 10_000_000).map_err(|e| format!("{p}: {e}"))?;
        let g = build_ctg(p).map_err(|e| format!("{p}: {e}"))?;
        ensure(sem.has_deadlock() == has_deadlock(&g), || {
            format!("{p}: semantics says {}, graph says {}", sem.has_deadlock(), has_deadlock(&g))
        })?;
        deadlocked += sem.has_deadlock() as usize;
    }
    Ok(format!(
        "{exhaustive} exhaustive + 200 random terms, {deadlocked} deadlocked, 0 disagreements"
    ))
}

fn oracle_triangle() -> Outcome {
    let mut rng = seeded(77);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 200 {
        attempts += 1;
        ensure(attempts < 100_000, || "too few deadlock-free terms".into())?;
        let actions = rng.gen_range(1..=8);
        let p = common::random_term(&mut rng, actions, 3);
        let sem = enumerate_executions(&p, 10_000_000).map_err(|e| e.to_string())?;
        if sem.has_deadlock() {
            continue;
        }
        let g = build_ctg(&p).map_err(|e| e.to_string())?;
        let brute = brute_force_extensions(&g).map_err(|e| e.to_string())?;
        let bits = bits_count(&g)?;
        let sem_set: BTreeSet<_> = sem.executions.iter().collect();
        let brute_set: BTreeSet<_> = brute.iter().collect();
        ensure(sem_set == brute_set, || format!("{p}: execution sets differ"))?;
        ensure(bits == BigUint::from(brute.len()), || {
            format!("{p}: enumerate {} vs bits {bits}", sem.executions.len())
        })?;
        checked += 1;
    }
    Ok("200 deadlock-free terms, enumerate = brute force = bits".into())
}

fn confluence() -> Outcome {
    let mut rng = seeded(5);
    for i in 0..50 {
        let n = rng.gen_range(2..=7);
        let g = common::random_dag(&mut rng, n, 0.3);
        let reference = bits_count(&g)?;
        for s in 0..2u64 {
            let seed = 1000 * i + s;
            let c = count_executions_with(&g, Strategy::Random(seed), Limits::default())
                .map_err(|e| e.to_string())?;
            ensure(c == reference, || format!("dag {i}, seed {seed}: {c} vs {reference}"))?;
        }
    }
    Ok("50 DAGs x 2 random strategies, all counts equal".into())
}

fn integrality() -> Outcome {
    let mut rng = seeded(6);
    let mut graphs: Vec<ControlGraph> = vec![common::example1(), common::fig5(), common::crown()];
    for _ in 0..200 {
        let n = rng.gen_range(1..=9);
        let p = rng.gen_range(0.1..0.7);
        graphs.push(common::random_dag(&mut rng, n, p));
    }
    let mut checked = 0;
    for g in &graphs {
        for strategy in [Strategy::Default, Strategy::Literal, Strategy::Random(checked as u64)] {
            let tree = decompose_with(g, strategy, Limits::default()).map_err(|e| e.to_string())?;
            scaled_count(&tree.volume(), g.len()).map_err(|e| e.to_string())?;
            checked += 1;
        }
    }
    Ok(format!("{checked} decompositions, n! * volume always an integer"))
}

fn uniformity() -> Outcome {
    let start = Instant::now();
    let mut cases = vec![("fig5".to_string(), common::fig5()), ("example1".into(), common::example1())];
    let mut rng = seeded(9);
    while cases.len() < 12 {
        let n = rng.gen_range(3..=6);
        let g = common::random_dag(&mut rng, n, 0.4);
        let c = brute_force_extensions(&g).map_err(|e| e.to_string())?.len();
        if (2..=12).contains(&c) {
            cases.push((format!("random{}", cases.len() - 1), g));
        }
    }
    let mut worst = 1.0f64;
    for (i, (name, g)) in cases.iter().enumerate() {
        let support = brute_force_extensions(g).map_err(|e| e.to_string())?;
        let draws = sample_execution(g, 10_000, 100 + i as u64).map_err(|e| e.to_string())?;
        ensure(draws.iter().all(|e| g.is_linear_extension(e)), || format!("{name}: invalid draw"))?;
        let (_, p) = chi_square_uniformity(&draws, &support).map_err(|e| e.to_string())?;
        ensure(p > 0.001, || format!("{name}: p = {p}"))?;
        worst = worst.min(p);
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(300), || format!("took {t:?}"))?;
    Ok(format!("12 posets x 10^4 draws, smallest p = {worst:.4}, {t:.2?}"))
}

fn split_probability() -> Outcome {
    let g = common::example1();
    let tree = decompose(&g, Strategy::Default).map_err(|e| e.to_string())?;
    let FormulaTree::Split { x, y, right, .. } = &tree else {
        return Err("no split at the root".into());
    };
    let names = (g.label(*x).unwrap().to_string(), g.label(*y).unwrap().to_string());
    ensure(names == ("x3".into(), "x4".into()), || format!("split on {names:?}"))?;
    let runs = 10_000;
    let mut rng = seeded(8);
    let hits = (0..runs)
        .filter(|_| std::ptr::eq(choose_branch(&tree, &mut rng), right.as_ref()))
        .count();
    let p = 8.0 / 14.0;
    let freq = hits as f64 / runs as f64;
    let sigma = (p * (1.0 - p) / runs as f64).sqrt();
    ensure((freq - p).abs() <= 3.0 * sigma, || format!("frequency {freq}"))?;
    // The full sampler must pick the same branch at the same rate.
    let sampler = Sampler::new(&g).map_err(|e| e.to_string())?;
    let mut rng = seeded(88);
    let mut x4_first = 0;
    for _ in 0..runs {
        let e = sampler.sample(&mut rng).map_err(|e| e.to_string())?;
        let pos = |l: &str| e.0.iter().position(|a| a.to_string() == l).unwrap();
        x4_first += (pos("x4") < pos("x3")) as usize;
    }
    let sampled = x4_first as f64 / runs as f64;
    ensure((sampled - p).abs() <= 3.0 * sigma, || format!("sampled frequency {sampled}"))?;
    Ok(format!("x4 before x3: branch {freq:.4}, sampler {sampled:.4}, target {p:.4} +/- {:.4}", 3.0 * sigma))
}

fn fork_join_fast_path() -> Outcome {
    let mut fj_terms: Vec<ProcessTerm> = common::exhaustive_corpus(7, 5)
        .into_iter()
        .filter(is_fork_join)
        .collect();
    let mut rng = seeded(10);
    for size in 1..=12 {
        for _ in 0..20 {
            fj_terms.push(gen_fork_join(size, &mut rng).map_err(|e| e.to_string())?);
        }
    }
    for p in &fj_terms {
        let t = sp_tree(p).map_err(|e| format!("{p}: {e}"))?;
        let brute = brute_force_extensions(&build_ctg(p).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .len();
        ensure(fj_count(&t) == BigUint::from(brute), || format!("{p}: fj {} vs {brute}", fj_count(&t)))?;
    }
    let checked = fj_terms.len();
    let (bits, secs) = common::with_big_stack(|| {
        let start = Instant::now();
        let p = gen_fork_join(200_000, &mut seeded(2)).expect("generate");
        let count = fj_count(&sp_tree(&p).expect("fork-join"));
        let secs = start.elapsed().as_secs_f64();
        drop(p);
        (count.bits(), secs)
    });
    ensure(secs < 60.0, || format!("2e5 actions took {secs:.1}s"))?;
    Ok(format!("{checked} small instances match brute force; 2e5 actions -> {bits}-bit count in {secs:.2}s"))
}

fn recognizer_soundness() -> Outcome {
    let mut rng = seeded(12);
    for i in 0..1000 {
        let size = 1 + i % 60;
        let p = gen_fork_join(size, &mut rng).map_err(|e| e.to_string())?;
        ensure(is_fork_join(&p), || format!("not fork-join: {p}"))?;
        let g = build_ctg(&p).map_err(|e| e.to_string())?;
        ensure(is_bit_decomposable(&g) == Ok(true), || format!("not BIT-decomposable: {p}"))?;
    }
    for i in 0..1000 {
        let n = 1 + i % 40;
        let k = rng.gen_range(0..=n.min(6));
        let p = gen_arch(n, k, &mut rng).map_err(|e| e.to_string())?;
        ensure(is_arch(&p) == Ok(true), || format!("not arch: {p}"))?;
    }
    let crown = encode_poset(&to_poset(&common::crown()).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let g = build_ctg(&crown).map_err(|e| e.to_string())?;
    ensure(is_bit_decomposable(&g) == Ok(false), || "crown reported BIT-decomposable".into())?;
    Ok("1000 fork-join, 1000 arch instances recognized; crown rejected".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("eight-node DAG count and leaf volumes", example1_count),
        ("Sys count", sys_count),
        ("deadlock iff cycle or residual barrier", deadlock_agreement),
        ("enumeration, brute force and BITS agree", oracle_triangle),
        ("confluence of random strategies", confluence),
        ("integrality of n! * volume", integrality),
        ("sampler uniformity", uniformity),
        ("split branch probability", split_probability),
        ("fork-join counting", fork_join_fast_path),
        ("recognizer soundness", recognizer_soundness),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
