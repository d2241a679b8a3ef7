//! BITS decomposition: exact counting of linear extensions through the
//! volume of the order polytope.
//!
//! Every vertex becomes a variable in `[0, 1]`. Removing a vertex integrates
//! the current integrand `Ψ` between the bounds its remaining neighbours
//! impose:
//!
//! | rule | shape of `y`            | update                   |
//! |------|-------------------------|--------------------------|
//! | B    | one predecessor `x`     | `Ψ' = ∫_x^1 Ψ dy`        |
//! | I    | `x -> y -> z`           | `Ψ' = ∫_x^z Ψ dy`        |
//! | T    | one successor `z`       | `Ψ' = ∫_0^z Ψ dy`        |
//! | Free | no neighbour            | `Ψ' = ∫_0^1 Ψ dy`        |
//! | S    | `x`, `y` incomparable   | `Ψ' = Ψ_{x<y} + Ψ_{y<x}` |
//!
//! The count is `n!` times the final volume.

mod work;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::BarrierName;
use crate::ctlgraph::{has_deadlock, ControlGraph};
use crate::polynomials::{rational_from_str, rational_to_string, Bound, Polynomial, Rational, Var};
use crate::random::{seeded, RandomSource};

use work::Work;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("the graph has a cycle or an unresolved barrier")]
    DeadlockedGraph(Vec<BarrierName>),
    #[error("n! times the volume is not an integer: {0}")]
    NonIntegerVolume(String),
    #[error("decomposition exceeded {0} leaves")]
    TooManyLeaves(usize),
    #[error("decomposition ran past its deadline")]
    Timeout,
}

/// One rule application. Nodes are vertex indices of the input graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecompStep {
    B(usize),
    I(usize),
    T(usize),
    S(usize, usize),
    /// Removal of a vertex with no neighbour left.
    Free(usize),
}

/// One integration `∫_lo^hi … d var`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Integration {
    pub var: Var,
    pub lo: Bound,
    pub hi: Bound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormulaTree {
    Leaf {
        #[serde(with = "ratio_text")]
        volume: Rational,
        trace: Vec<DecompStep>,
        /// Innermost integration first.
        integrand_stack: Vec<Integration>,
    },
    /// `left` adds `x < y`, `right` adds `y < x`.
    Split {
        x: usize,
        y: usize,
        left: Box<FormulaTree>,
        right: Box<FormulaTree>,
    },
}

mod ratio_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::polynomials::{rational_from_str, rational_to_string, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        rational_from_str(&text).ok_or_else(|| D::Error::custom(format!("bad rational `{text}`")))
    }
}

impl FormulaTree {
    pub fn volume(&self) -> Rational {
        let mut acc = Rational::zero();
        self.for_each_leaf(&mut |v, _, _| acc += v);
        acc
    }

    pub fn num_leaves(&self) -> usize {
        let mut k = 0;
        self.for_each_leaf(&mut |_, _, _| k += 1);
        k
    }

    pub fn num_splits(&self) -> usize {
        self.num_leaves() - 1
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, FormulaTree::Leaf { .. })
    }

    /// Leaf volumes in left-to-right order.
    pub fn leaf_volumes(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        self.for_each_leaf(&mut |v, _, _| out.push(v.clone()));
        out
    }

    fn for_each_leaf<'a>(
        &'a self,
        f: &mut dyn FnMut(&'a Rational, &'a [DecompStep], &'a [Integration]),
    ) {
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                FormulaTree::Leaf {
                    volume,
                    trace,
                    integrand_stack,
                } => f(volume, trace, integrand_stack),
                FormulaTree::Split { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Which rule to apply next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Free vertices, then B/T, then I, lowest index first; splits only
    /// when nothing else applies, on the incomparable pair sharing the
    /// most neighbours (ties to the lexicographically smallest pair).
    #[default]
    Default,
    /// As `Default`, but a vertex without neighbours is integrated away
    /// only when it is the last one; other isolated vertices are split on.
    Literal,
    /// Uniform choice among the applicable rules, with a split on a
    /// uniformly drawn incomparable pair a quarter of the time.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_leaves: usize,
    /// Branches with at least this many vertices left run in parallel.
    pub parallel_threshold: usize,
    /// Checked before every rule application.
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_leaves: 1 << 20,
            parallel_threshold: 14,
            deadline: None,
        }
    }
}

fn prepare(g: &ControlGraph) -> Result<ControlGraph, BitsError> {
    if has_deadlock(g) {
        return Err(BitsError::DeadlockedGraph(g.residual_barriers()));
    }
    Ok(if g.is_transitively_reduced() {
        g.clone()
    } else {
        g.transitive_reduction()
    })
}

fn classify(w: &Work, v: usize) -> Option<DecompStep> {
    match (w.pred[v].len(), w.succ[v].len()) {
        (0, 0) => Some(DecompStep::Free(v)),
        (1, 0) => Some(DecompStep::B(v)),
        (0, 1) => Some(DecompStep::T(v)),
        (1, 1) => Some(DecompStep::I(v)),
        _ => None,
    }
}

/// Every B, I and T application available on `g`, by vertex index, then
/// every split pair when `with_splits` is set. Vertices without any
/// neighbour are not listed: no rule covers them.
pub fn applicable_rules(g: &ControlGraph, with_splits: bool) -> Result<Vec<DecompStep>, BitsError> {
    let g = prepare(g)?;
    let w = Work::new(&g);
    let mut out: Vec<DecompStep> = w
        .live()
        .filter_map(|v| classify(&w, v))
        .filter(|s| !matches!(s, DecompStep::Free(_)))
        .collect();
    if with_splits {
        out.extend(
            w.incomparable_pairs(true)
                .into_iter()
                .map(|(x, y)| DecompStep::S(x, y)),
        );
    }
    Ok(out)
}

#[derive(Clone)]
struct Branch {
    work: Work,
    psi: Polynomial,
    trace: Vec<DecompStep>,
    stack: Vec<Integration>,
}

impl Branch {
    fn apply(&mut self, step: DecompStep) {
        let (y, lo, hi) = match step {
            DecompStep::B(y) => {
                let x = *self.work.pred[y].first().expect("B has a predecessor");
                self.work.remove_leaf(y);
                (y, Bound::Var(Var(x)), Bound::ConstOne)
            }
            DecompStep::T(y) => {
                let z = *self.work.succ[y].first().expect("T has a successor");
                self.work.remove_leaf(y);
                (y, Bound::ConstZero, Bound::Var(Var(z)))
            }
            DecompStep::I(y) => {
                let (x, z) = self.work.remove_intermediate(y);
                (y, Bound::Var(Var(x)), Bound::Var(Var(z)))
            }
            DecompStep::Free(y) => {
                self.work.remove_leaf(y);
                (y, Bound::ConstZero, Bound::ConstOne)
            }
            DecompStep::S(..) => unreachable!("splits fork the branch"),
        };
        let var = Var(y);
        self.psi = self.psi.integrate(var, lo, hi);
        self.trace.push(step);
        self.stack.push(Integration { var, lo, hi });
    }

    fn fork(mut self, x: usize, y: usize) -> (Branch, Branch) {
        let step = DecompStep::S(x, y);
        self.trace.push(step);
        let mut other = self.clone();
        self.work.add_order(x, y);
        other.work.add_order(y, x);
        (self, other)
    }

    fn into_leaf(self) -> FormulaTree {
        let volume = self.psi.as_constant().unwrap_or_else(Rational::zero);
        FormulaTree::Leaf {
            volume,
            trace: self.trace,
            integrand_stack: self.stack,
        }
    }
}

/// Rule queue for the deterministic strategies: rank, then vertex index.
/// Entries may be stale and are checked again when popped.
struct Queue(std::collections::BTreeSet<(u8, usize)>);

fn rank(step: DecompStep) -> u8 {
    match step {
        DecompStep::Free(_) => 0,
        DecompStep::B(_) | DecompStep::T(_) => 1,
        DecompStep::I(_) => 2,
        DecompStep::S(..) => 3,
    }
}

impl Queue {
    fn fill(w: &Work) -> Self {
        let mut q = Queue(Default::default());
        for v in w.live() {
            q.touch(w, v);
        }
        q
    }

    fn touch(&mut self, w: &Work, v: usize) {
        if w.alive[v] {
            if let Some(s) = classify(w, v) {
                self.0.insert((rank(s), v));
            }
        }
    }

    fn pop(&mut self, w: &Work, literal: bool) -> Option<DecompStep> {
        let mut deferred = Vec::new();
        let found = loop {
            let Some((r, v)) = self.0.pop_first() else {
                break None;
            };
            if !w.alive[v] {
                continue;
            }
            match classify(w, v) {
                Some(s) if rank(s) == r => {
                    if literal && matches!(s, DecompStep::Free(_)) && w.remaining > 1 {
                        deferred.push((r, v));
                        continue;
                    }
                    break Some(s);
                }
                Some(s) => {
                    self.0.insert((rank(s), v));
                }
                None => {}
            }
        };
        self.0.extend(deferred);
        found
    }
}

fn neighbours(w: &Work, step: DecompStep) -> Vec<usize> {
    let v = match step {
        DecompStep::B(v) | DecompStep::I(v) | DecompStep::T(v) | DecompStep::Free(v) => v,
        DecompStep::S(..) => return Vec::new(),
    };
    w.pred[v].iter().chain(w.succ[v].iter()).copied().collect()
}

fn best_pair(w: &Work, with_isolated: bool) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), usize)> = None;
    for (x, y) in w.incomparable_pairs(with_isolated) {
        let s = w.shared_neighbours(x, y);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some(((x, y), s));
        }
    }
    best.map(|(p, _)| p)
}

struct Ctx {
    limits: Limits,
    leaves: AtomicUsize,
}

impl Ctx {
    fn leaf(&self, br: Branch) -> Result<FormulaTree, BitsError> {
        if self.leaves.fetch_add(1, Ordering::Relaxed) >= self.limits.max_leaves {
            return Err(BitsError::TooManyLeaves(self.limits.max_leaves));
        }
        Ok(br.into_leaf())
    }

    fn check(&self) -> Result<(), BitsError> {
        match self.limits.deadline {
            Some(d) if Instant::now() >= d => Err(BitsError::Timeout),
            _ => Ok(()),
        }
    }
}

fn run_ordered(mut br: Branch, literal: bool, ctx: &Ctx) -> Result<FormulaTree, BitsError> {
    let mut q = Queue::fill(&br.work);
    while br.work.remaining > 0 {
        ctx.check()?;
        if let Some(step) = q.pop(&br.work, literal) {
            let around = neighbours(&br.work, step);
            br.apply(step);
            for v in around {
                q.touch(&br.work, v);
            }
            continue;
        }
        let (x, y) = best_pair(&br.work, literal).expect("a stuck non-empty graph has an incomparable pair");
        let parallel = br.work.remaining >= ctx.limits.parallel_threshold;
        let (a, b) = br.fork(x, y);
        let (left, right) = if parallel {
            rayon::join(|| run_ordered(a, literal, ctx), || run_ordered(b, literal, ctx))
        } else {
            (run_ordered(a, literal, ctx), run_ordered(b, literal, ctx))
        };
        return Ok(FormulaTree::Split {
            x,
            y,
            left: Box::new(left?),
            right: Box::new(right?),
        });
    }
    ctx.leaf(br)
}

fn run_random(mut br: Branch, rng: &mut RandomSource, ctx: &Ctx) -> Result<FormulaTree, BitsError> {
    while br.work.remaining > 0 {
        ctx.check()?;
        let rules: Vec<DecompStep> = br.work.live().filter_map(|v| classify(&br.work, v)).collect();
        let want_split = rules.is_empty() || rng.gen_bool(0.25);
        let pair = if want_split {
            let pairs = br.work.incomparable_pairs(false);
            (!pairs.is_empty()).then(|| pairs[rng.gen_range(0..pairs.len())])
        } else {
            None
        };
        match pair {
            Some((x, y)) => {
                let (a, b) = br.fork(x, y);
                let left = run_random(a, rng, ctx)?;
                let right = run_random(b, rng, ctx)?;
                return Ok(FormulaTree::Split {
                    x,
                    y,
                    left: Box::new(left),
                    right: Box::new(right),
                });
            }
            None => {
                let step = rules[rng.gen_range(0..rules.len())];
                br.apply(step);
            }
        }
    }
    ctx.leaf(br)
}

pub fn decompose(g: &ControlGraph, strategy: Strategy) -> Result<FormulaTree, BitsError> {
    decompose_with(g, strategy, Limits::default())
}

pub fn decompose_with(
    g: &ControlGraph,
    strategy: Strategy,
    limits: Limits,
) -> Result<FormulaTree, BitsError> {
    let g = prepare(g)?;
    let br = Branch {
        work: Work::new(&g),
        psi: Polynomial::one(),
        trace: Vec::new(),
        stack: Vec::new(),
    };
    let ctx = Ctx {
        limits,
        leaves: AtomicUsize::new(0),
    };
    match strategy {
        Strategy::Default => run_ordered(br, false, &ctx),
        Strategy::Literal => run_ordered(br, true, &ctx),
        Strategy::Random(seed) => run_random(br, &mut seeded(seed), &ctx),
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// `n! · volume`, which must be a non-negative integer.
pub fn scaled_count(volume: &Rational, n: usize) -> Result<BigUint, BitsError> {
    let scaled = volume * Rational::from_integer(BigInt::from(factorial(n)));
    if !scaled.is_integer() || scaled.is_negative() {
        return Err(BitsError::NonIntegerVolume(rational_to_string(&scaled)));
    }
    Ok(scaled.to_integer().magnitude().clone())
}

/// Number of linear extensions of `g`.
pub fn count_executions(g: &ControlGraph) -> Result<BigUint, BitsError> {
    count_executions_with(g, Strategy::Default, Limits::default())
}

pub fn count_executions_with(
    g: &ControlGraph,
    strategy: Strategy,
    limits: Limits,
) -> Result<BigUint, BitsError> {
    let tree = decompose_with(g, strategy, limits)?;
    scaled_count(&tree.volume(), g.len())
}

/// Whether B, I and T alone empty the graph. Vertices left without
/// neighbours are set aside and count as removed at the end.
pub fn is_bit_decomposable(g: &ControlGraph) -> Result<bool, BitsError> {
    let g = prepare(g)?;
    let mut w = Work::new(&g);
    let mut todo: Vec<usize> = w.live().collect();
    while let Some(v) = todo.pop() {
        if !w.alive[v] {
            continue;
        }
        let around: Vec<usize> = w.pred[v].iter().chain(w.succ[v].iter()).copied().collect();
        match classify(&w, v) {
            Some(DecompStep::B(_)) | Some(DecompStep::T(_)) => w.remove_leaf(v),
            Some(DecompStep::I(_)) => {
                w.remove_intermediate(v);
            }
            _ => continue,
        }
        todo.extend(around);
    }
    let done = w.live().all(|v| w.is_isolated(v));
    Ok(done)
}

/// Parse the `"num/den"` form used in serialized trees.
pub fn parse_volume(text: &str) -> Option<Rational> {
    rational_from_str(text)
}
