//! Independent ground truth: exhaustive enumeration of linear extensions,
//! a downset dynamic program, baseline samplers and a uniformity test.

pub mod bench;

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::calculus::{ActionLabel, Execution};
use crate::ctlgraph::{has_deadlock, ControlGraph};
use crate::random::{seeded, RandomSource};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("the graph has a cycle or a residual barrier")]
    DeadlockedGraph,
    #[error("{0} vertices exceed the brute-force cap of {1}")]
    TooManyVertices(usize, usize),
    #[error("more than {0} linear extensions")]
    TooManyExtensions(usize),
    #[error("{0} downsets exceed the cap of {1}")]
    TooManyStates(usize, usize),
    #[error("sample `{0}` is not in the support")]
    UnknownOutcome(Execution),
    #[error("empty support")]
    EmptySupport,
}

/// Caps for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceLimits {
    pub max_vertices: usize,
    pub max_extensions: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits {
            max_vertices: 12,
            max_extensions: 10_000_000,
        }
    }
}

fn check_dag(g: &ControlGraph) -> Result<(), OracleError> {
    if has_deadlock(g) {
        Err(OracleError::DeadlockedGraph)
    } else {
        Ok(())
    }
}

/// All linear extensions of `g` in lexicographic order of label sequence.
pub fn brute_force_extensions(g: &ControlGraph) -> Result<Vec<Execution>, OracleError> {
    brute_force_extensions_with(g, BruteForceLimits::default())
}

pub fn brute_force_extensions_with(
    g: &ControlGraph,
    limits: BruteForceLimits,
) -> Result<Vec<Execution>, OracleError> {
    check_dag(g)?;
    if g.len() > limits.max_vertices {
        return Err(OracleError::TooManyVertices(g.len(), limits.max_vertices));
    }
    let labels: Vec<ActionLabel> = (0..g.len())
        .map(|i| g.label(i).cloned().expect("action vertex"))
        .collect();
    // Candidates tried in label order so output is lexicographic.
    let mut by_label: Vec<usize> = (0..g.len()).collect();
    by_label.sort_by(|&a, &b| labels[a].cmp(&labels[b]));

    struct Search<'a> {
        g: &'a ControlGraph,
        labels: &'a [ActionLabel],
        by_label: &'a [usize],
        indeg: Vec<usize>,
        prefix: Vec<usize>,
        out: Vec<Execution>,
        cap: usize,
    }
    impl Search<'_> {
        fn go(&mut self) -> Result<(), OracleError> {
            if self.prefix.len() == self.g.len() {
                if self.out.len() == self.cap {
                    return Err(OracleError::TooManyExtensions(self.cap));
                }
                self.out.push(Execution(
                    self.prefix.iter().map(|&i| self.labels[i].clone()).collect(),
                ));
                return Ok(());
            }
            for k in 0..self.by_label.len() {
                let u = self.by_label[k];
                if self.indeg[u] != 0 {
                    continue;
                }
                self.indeg[u] = usize::MAX;
                for &v in self.g.succ(u) {
                    self.indeg[v] -= 1;
                }
                self.prefix.push(u);
                let r = self.go();
                self.prefix.pop();
                for &v in self.g.succ(u) {
                    self.indeg[v] += 1;
                }
                self.indeg[u] = 0;
                r?;
            }
            Ok(())
        }
    }

    let mut s = Search {
        g,
        labels: &labels,
        by_label: &by_label,
        indeg: (0..g.len()).map(|i| g.pred(i).len()).collect(),
        prefix: Vec::new(),
        out: Vec::new(),
        cap: limits.max_extensions,
    };
    s.go()?;
    Ok(s.out)
}

/// Number of linear extensions by dynamic programming over downsets.
///
/// Exponential in the width only; handles posets far too large to
/// enumerate. Fails once more than `max_states` downsets are reached.
pub fn count_by_downsets(g: &ControlGraph, max_states: usize) -> Result<BigUint, OracleError> {
    check_dag(g)?;
    let n = g.len();
    if n > 128 {
        return Err(OracleError::TooManyVertices(n, 128));
    }
    let preds: Vec<u128> = (0..n)
        .map(|v| g.pred(v).iter().fold(0u128, |m, &u| m | (1u128 << u)))
        .collect();
    let full: u128 = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    // Level-by-level: every downset of size k, with the number of ways to reach it.
    let mut level: HashMap<u128, BigUint> = HashMap::from([(0u128, BigUint::one())]);
    let mut seen = 1usize;
    for _ in 0..n {
        let mut next: HashMap<u128, BigUint> = HashMap::new();
        for (set, ways) in &level {
            for v in 0..n {
                let bit = 1u128 << v;
                if set & bit == 0 && preds[v] & !set == 0 {
                    *next.entry(set | bit).or_insert_with(BigUint::zero) += ways;
                }
            }
        }
        seen += next.len();
        if seen > max_states {
            return Err(OracleError::TooManyStates(seen, max_states));
        }
        level = next;
    }
    Ok(level.remove(&full).unwrap_or_else(BigUint::zero))
}

/// `k` independent uniform picks from the enumerated extensions.
pub fn brute_force_sampler(
    g: &ControlGraph,
    k: usize,
    seed: u64,
) -> Result<Vec<Execution>, OracleError> {
    let all = brute_force_extensions(g)?;
    if all.is_empty() {
        return Err(OracleError::EmptySupport);
    }
    let mut rng = seeded(seed);
    Ok((0..k)
        .map(|_| all[rng.gen_range(0..all.len())].clone())
        .collect())
}

/// Approximate sampler: a lazy adjacent-transposition Markov chain.
///
/// Each step stays put with probability 1/2; otherwise it picks a position
/// `i` uniformly and swaps the elements at `i` and `i+1` when they are
/// incomparable. The laziness makes the chain aperiodic (a 2-antichain
/// would otherwise alternate deterministically). The stationary law is
/// uniform, but samples are only as good as the burn-in.
pub fn mcmc_sampler(
    g: &ControlGraph,
    k: usize,
    burn_in: usize,
    steps_between: usize,
    seed: u64,
) -> Result<Vec<Execution>, OracleError> {
    let order = g.topological_order().ok_or(OracleError::DeadlockedGraph)?;
    if has_deadlock(g) {
        return Err(OracleError::DeadlockedGraph);
    }
    let mut rng = seeded(seed);
    let mut state = order;
    let n = state.len();
    let advance = |state: &mut Vec<usize>, rng: &mut RandomSource, steps: usize| {
        if n < 2 {
            return;
        }
        for _ in 0..steps {
            if rng.gen_bool(0.5) {
                continue;
            }
            let i = rng.gen_range(0..n - 1);
            let (x, y) = (state[i], state[i + 1]);
            if !g.has_edge(x, y) {
                state.swap(i, i + 1);
            }
        }
    };
    advance(&mut state, &mut rng, burn_in);
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        if j > 0 {
            advance(&mut state, &mut rng, steps_between);
        }
        out.push(Execution(
            state
                .iter()
                .map(|&i| g.label(i).cloned().expect("action vertex"))
                .collect(),
        ));
    }
    Ok(out)
}

/// Pearson chi-square statistic of `samples` against the uniform law on
/// `support`, with its p-value (`|support| - 1` degrees of freedom).
pub fn chi_square_uniformity(
    samples: &[Execution],
    support: &[Execution],
) -> Result<(f64, f64), OracleError> {
    if support.is_empty() {
        return Err(OracleError::EmptySupport);
    }
    let index: HashMap<&Execution, usize> =
        support.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut counts = vec![0u64; support.len()];
    for s in samples {
        match index.get(s) {
            Some(&i) => counts[i] += 1,
            None => return Err(OracleError::UnknownOutcome(s.clone())),
        }
    }
    if support.len() == 1 {
        return Ok((0.0, 1.0));
    }
    let expected = samples.len() as f64 / support.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new((support.len() - 1) as f64).expect("positive degrees of freedom");
    Ok((stat, dist.sf(stat)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctlgraph::parse_edge_list;

    pub(crate) const EXAMPLE1: &str = "x1 -> x2\nx2 -> x3\nx2 -> x4\nx3 -> x5\nx3 -> x6\n\
        x4 -> x5\nx4 -> x6\nx4 -> x7\nx5 -> x8\nx6 -> x8\nx7 -> x8\n";

    fn dag(s: &str) -> ControlGraph {
        parse_edge_list(s).unwrap()
    }

    #[test]
    fn example1_has_14() {
        let g = dag(EXAMPLE1);
        let all = brute_force_extensions(&g).unwrap();
        assert_eq!(all.len(), 14);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|e| g.is_linear_extension(e)));
        assert_eq!(count_by_downsets(&g, 1 << 20).unwrap(), BigUint::from(14u32));
    }

    #[test]
    fn antichain_and_fig5() {
        assert_eq!(brute_force_extensions(&dag("a\nb\nc\n")).unwrap().len(), 6);
        assert_eq!(brute_force_extensions(&dag("1 -> 2\n3\n")).unwrap().len(), 3);
    }

    #[test]
    fn caps() {
        let big: String = (0..13).map(|i| format!("v{i}\n")).collect();
        assert!(matches!(
            brute_force_extensions(&dag(&big)),
            Err(OracleError::TooManyVertices(13, 12))
        ));
        let lim = BruteForceLimits {
            max_vertices: 12,
            max_extensions: 5,
        };
        assert!(matches!(
            brute_force_extensions_with(&dag("a\nb\nc\n"), lim),
            Err(OracleError::TooManyExtensions(5))
        ));
    }

    #[test]
    fn cyclic_rejected() {
        assert_eq!(
            brute_force_extensions(&dag("a -> b\nb -> a\n")),
            Err(OracleError::DeadlockedGraph)
        );
    }

    #[test]
    fn samplers_on_chain() {
        let g = dag("a -> b\nb -> c\n");
        for e in brute_force_sampler(&g, 20, 1).unwrap() {
            assert_eq!(e.to_string(), "a b c");
        }
        for e in mcmc_sampler(&g, 20, 100, 5, 1).unwrap() {
            assert_eq!(e.to_string(), "a b c");
        }
    }

    #[test]
    fn samplers_on_antichain_are_balanced() {
        let g = dag("a\nb\n");
        let support = brute_force_extensions(&g).unwrap();
        let s = brute_force_sampler(&g, 10_000, 7).unwrap();
        assert!(chi_square_uniformity(&s, &support).unwrap().1 > 0.001);
        let s = mcmc_sampler(&g, 10_000, 100, 10, 7).unwrap();
        assert!(chi_square_uniformity(&s, &support).unwrap().1 > 0.001);
    }

    #[test]
    fn mcmc_example1_uniform() {
        let g = dag(EXAMPLE1);
        let support = brute_force_extensions(&g).unwrap();
        let s = mcmc_sampler(&g, 10_000, 2_000, 200, 3).unwrap();
        assert!(s.iter().all(|e| g.is_linear_extension(e)));
        let (_, p) = chi_square_uniformity(&s, &support).unwrap();
        assert!(p > 0.001, "p = {p}");
    }

    #[test]
    fn chi_square_closed_forms() {
        let support: Vec<Execution> = ["a", "b", "c"]
            .iter()
            .map(|l| Execution(vec![ActionLabel::from(*l)]))
            .collect();
        let balanced: Vec<Execution> = support.iter().cycle().take(300).cloned().collect();
        let (stat, p) = chi_square_uniformity(&balanced, &support).unwrap();
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let skewed = vec![support[0].clone(); 300];
        let (stat, _) = chi_square_uniformity(&skewed, &support).unwrap();
        assert!((stat - 600.0).abs() < 1e-9);
        let stranger = Execution(vec![ActionLabel::from("z")]);
        assert_eq!(
            chi_square_uniformity(std::slice::from_ref(&stranger), &support),
            Err(OracleError::UnknownOutcome(stranger))
        );
    }
}
