mod common;

use bsync::calculus::{parse_process, validate, Execution};
use bsync::ctlgraph::build_ctg;
use bsync::oracles::{brute_force_extensions, chi_square_uniformity};
use bsync::random::seeded;
use bsync::subclasses::{
    fj_count, fj_sample, gen_arch, gen_fork_join, is_arch, is_fork_join, is_promise_process, sp_tree,
    SPTree, SubclassError,
};
use num_bigint::BigUint;

#[test]
fn tree_encoding_is_fork_join() {
    let t = parse_process("nu(B) (a.<B>0 || <B>b.0 || <B>c.0)").unwrap();
    assert!(is_fork_join(&t));
    assert!(is_fork_join(&parse_process("nu(B) [a1.<B> a2.0 || <B> b1.0 || c1.<B> 0]").unwrap()));
}

#[test]
fn sys_is_not_fork_join() {
    let sys = parse_process(&common::sys_text()).unwrap();
    assert!(!is_fork_join(&sys));
    assert_eq!(sp_tree(&sys), Err(SubclassError::NotForkJoin));
}

#[test]
fn outer_join_before_inner_is_rejected() {
    let p = parse_process("nu(A) nu(B) (a.<A><B>0 || <A><B>b.0)").unwrap();
    assert!(!is_fork_join(&p));
}

#[test]
fn fork_join_corpus_matches_brute_force() {
    let mut checked = 0;
    for p in common::exhaustive_corpus(6, 5).iter().filter(|p| is_fork_join(p)) {
        let t = sp_tree(p).unwrap();
        assert_eq!(t.size(), p.size());
        let g = build_ctg(p).unwrap();
        assert_eq!(fj_count(&t), BigUint::from(brute_force_extensions(&g).unwrap().len()), "{p}");
        checked += 1;
    }
    assert!(checked > 100);
}

fn frequencies(t: &SPTree, draws: usize, seed: u64) -> Vec<Execution> {
    let mut rng = seeded(seed);
    (0..draws).map(|_| fj_sample(t, &mut rng)).collect()
}

#[test]
fn fork_join_sampling_is_uniform() {
    let a = || SPTree::atom("a");
    let cases = [
        SPTree::par([a(), SPTree::atom("b")]),
        SPTree::seq([a(), SPTree::par([SPTree::atom("b"), SPTree::atom("c")])]),
        SPTree::seq([a(), SPTree::par([SPTree::seq([SPTree::atom("b"), SPTree::atom("c")]), SPTree::atom("d")])]),
    ];
    for (i, t) in cases.iter().enumerate() {
        let g = t.to_graph();
        let support = brute_force_extensions(&g).unwrap();
        assert_eq!(BigUint::from(support.len()), fj_count(t));
        let draws = frequencies(t, 10_000, i as u64);
        assert!(draws.iter().all(|e| g.is_linear_extension(e)));
        let (_, p) = chi_square_uniformity(&draws, &support).unwrap();
        assert!(p > 0.001, "case {i}: p = {p}");
    }
    let chain = SPTree::seq([SPTree::atom("a"), SPTree::atom("b"), SPTree::atom("c")]);
    assert!(frequencies(&chain, 50, 1).iter().all(|e| e.to_string() == "a b c"));
}

#[test]
fn promise_examples() {
    assert!(is_promise_process(&parse_process("0").unwrap()));
    assert!(is_promise_process(&parse_process("nu(B) (a.<B>0 || b.<B>0)").unwrap()));
    let fj = parse_process("nu(J) (a.<J>0 || b.<J>0 || <J>c.0)").unwrap();
    assert!(is_fork_join(&fj));
    assert!(!is_promise_process(&fj));
}

#[test]
fn arch_is_sound() {
    let mut rng = seeded(21);
    for n in 0..25 {
        for k in 0..=n.min(5) {
            let p = gen_arch(n, k, &mut rng).unwrap();
            assert!(is_arch(&p).unwrap());
            assert!(is_promise_process(&p));
            assert!(validate(&p).is_ok());
            if k == 0 {
                assert_eq!(fj_count(&sp_tree(&p).unwrap()), BigUint::from(1u32));
            }
        }
    }
}

#[test]
fn generators_are_reproducible() {
    let a = gen_fork_join(40, &mut seeded(3)).unwrap();
    let b = gen_fork_join(40, &mut seeded(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(gen_fork_join(1, &mut seeded(0)).unwrap().size(), 1);
    assert!(matches!(gen_fork_join(0, &mut seeded(0)), Err(SubclassError::InvalidParameters(_))));
    assert_eq!(gen_arch(6, 2, &mut seeded(9)).unwrap(), gen_arch(6, 2, &mut seeded(9)).unwrap());
}

#[test]
fn large_generated_instances_count() {
    let bits = common::with_big_stack(|| {
        let p = gen_fork_join(20_000, &mut seeded(5)).unwrap();
        fj_count(&sp_tree(&p).unwrap()).bits()
    });
    assert!(bits > 1000);
}
