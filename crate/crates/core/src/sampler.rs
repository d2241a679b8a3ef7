//! Uniform random executions: pick a leaf of the decomposition in
//! proportion to its volume, draw a uniform point of its polytope one
//! coordinate at a time by inverting the marginal CDFs, and rank the
//! coordinates.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::bits::{decompose, scaled_count, BitsError, FormulaTree, Integration, Strategy};
use crate::calculus::{ActionLabel, Execution};
use crate::ctlgraph::ControlGraph;
use crate::polynomials::{rational_to_f64, Bound, Polynomial, Rational, Var};
use crate::random::{seeded, RandomSource};

/// Retries after coordinate ties before giving up.
const MAX_RESAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error("numerical failure while inverting a marginal: {0}")]
    NumericalFailure(String),
    #[error("two coordinates are equal")]
    TieDetected,
    #[error("the formula tree has zero volume")]
    EmptyTree,
}

/// A point of the order polytope, one coordinate per element.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub coords: Vec<(ActionLabel, f64)>,
}

/// Elements sorted by coordinate.
pub fn rank_to_execution(p: &SamplePoint) -> Result<Execution, SamplerError> {
    let mut order: Vec<&(ActionLabel, f64)> = p.coords.iter().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    if order.windows(2).any(|w| w[0].1 == w[1].1) {
        return Err(SamplerError::TieDetected);
    }
    Ok(Execution(order.into_iter().map(|(l, _)| l.clone()).collect()))
}

/// Draw `true` with probability `a / (a + b)`, exactly.
fn bernoulli_ratio(a: &Rational, b: &Rational, rng: &mut RandomSource) -> bool {
    let lcm = num_integer::Integer::lcm(a.denom(), b.denom());
    let wa = (a * Rational::from_integer(lcm.clone())).to_integer();
    let wb = (b * Rational::from_integer(lcm)).to_integer();
    let total = (&wa + &wb).magnitude().clone();
    if total.is_zero() {
        return rng.gen_bool(0.5);
    }
    rng.gen_biguint_below(&total) < *wa.magnitude()
}

/// Walk down from the root, entering each side of a split with
/// probability proportional to its volume.
pub fn choose_branch<'a>(t: &'a FormulaTree, rng: &mut RandomSource) -> &'a FormulaTree {
    let mut node = t;
    while let FormulaTree::Split { left, right, .. } = node {
        node = if bernoulli_ratio(&left.volume(), &right.volume(), rng) {
            left
        } else {
            right
        };
    }
    node
}

/// `Ψ_0 = 1, Ψ_k = ∫ Ψ_{k-1}` along the leaf's stack; `Ψ_{k-1}` is the
/// unnormalized density of the `k`-th variable once outer ones are fixed.
fn integrands(stack: &[Integration]) -> Vec<Polynomial> {
    let mut out = Vec::with_capacity(stack.len());
    let mut psi = Polynomial::one();
    for step in stack {
        let next = psi.integrate(step.var, step.lo, step.hi);
        out.push(psi);
        psi = next;
    }
    out
}

fn taylor_shift(p: &[Rational], a: &Rational) -> Vec<Rational> {
    // Horner with (s + a) in place of t: q(s) = p(a + s).
    let mut q: Vec<Rational> = vec![Rational::zero(); p.len()];
    for c in p.iter().rev() {
        for i in (1..q.len()).rev() {
            q[i] = &q[i - 1] + &(&q[i] * a);
        }
        q[0] = &q[0] * a + c;
    }
    q
}

fn bound_value(b: Bound, fixed: &[Option<f64>]) -> Result<f64, SamplerError> {
    match b {
        Bound::ConstZero => Ok(0.0),
        Bound::ConstOne => Ok(1.0),
        Bound::Var(Var(v)) => fixed
            .get(v)
            .copied()
            .flatten()
            .ok_or_else(|| SamplerError::NumericalFailure(format!("bound x{v} not fixed yet"))),
    }
}

fn exact(x: f64) -> Rational {
    Rational::from_float(x).expect("finite coordinate")
}

fn taylor_shift_f64(p: &[f64], a: f64) -> Vec<f64> {
    let mut q = vec![0.0; p.len()];
    for c in p.iter().rev() {
        for i in (1..q.len()).rev() {
            q[i] = q[i - 1] + q[i] * a;
        }
        q[0] = q[0] * a + c;
    }
    q
}

/// Worst tolerated ratio between the magnitude bound of the normalizing
/// constant and its value before the exact path takes over.
const MAX_CANCELLATION: f64 = 1e6;

/// Coefficients of the CDF on `[a, b]` as a polynomial in `s = t - a`,
/// from a float restriction when it is well conditioned.
fn cdf_fast(f: &Polynomial, y: Var, fixed: &[Option<f64>], a: f64, b: f64) -> Option<Vec<f64>> {
    let (c, m) = f
        .restrict_univariate_bounded(y, |Var(v)| fixed.get(v).copied().flatten())
        .ok()?;
    let anti = |p: Vec<f64>| -> Vec<f64> {
        p.into_iter()
            .enumerate()
            .map(|(k, x)| x / (k as f64 + 1.0))
            .collect()
    };
    let q = anti(taylor_shift_f64(&c, a));
    let qm = anti(taylor_shift_f64(&m, a));
    let w = b - a;
    let at = |p: &[f64]| p.iter().rev().fold(0.0, |acc, x| acc * w + x) * w;
    let (total, bound) = (at(&q), at(&qm));
    if !(total > 0.0) || bound > total * MAX_CANCELLATION {
        return None;
    }
    Some(q.into_iter().map(|x| x / total).collect())
}

fn cdf_exact(f: &Polynomial, y: Var, fixed: &[Option<f64>], a: f64, b: f64) -> Result<Vec<f64>, SamplerError> {
    let uni = f
        .restrict_univariate_exact(y, |Var(v)| fixed.get(v).copied().flatten().map(exact))
        .map_err(|e| SamplerError::NumericalFailure(e.to_string()))?;
    let ra = exact(a);
    let width = exact(b) - &ra;
    let anti: Vec<Rational> = taylor_shift(&uni, &ra)
        .iter()
        .enumerate()
        .map(|(k, c)| c / Rational::from_integer((k as u64 + 1).into()))
        .collect();
    let mut total = Rational::zero();
    for c in anti.iter().rev() {
        total = total * &width + c;
    }
    total *= &width;
    if !total.is_positive() {
        return Err(SamplerError::NumericalFailure("non-positive normalizing constant".into()));
    }
    Ok(anti.iter().map(|c| rational_to_f64(&(c / &total))).collect())
}

/// Solve `CDF(t) = u` on `[a, b]` by bisection.
fn invert(coeffs: &[f64], a: f64, b: f64, u: f64) -> Result<f64, SamplerError> {
    let cdf = |t: f64| {
        let s = t - a;
        coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c) * s
    };
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = cdf(mid);
        if !(-1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(SamplerError::NumericalFailure(format!("CDF({mid}) = {v}")));
        }
        if v < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) / 2.0)
}

fn draw_coords(
    stack: &[Integration],
    dens: &[Polynomial],
    n: usize,
    rng: &mut RandomSource,
) -> Result<Vec<Option<f64>>, SamplerError> {
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for (step, f) in stack.iter().zip(dens).rev() {
        let a = bound_value(step.lo, &fixed)?;
        let b = bound_value(step.hi, &fixed)?;
        if !(a < b) {
            return Err(SamplerError::TieDetected);
        }
        let coeffs = match cdf_fast(f, step.var, &fixed, a, b) {
            Some(c) => c,
            None => cdf_exact(f, step.var, &fixed, a, b)?,
        };
        let u = loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                break u;
            }
        };
        fixed[step.var.0] = Some(invert(&coeffs, a, b, u)?);
    }
    Ok(fixed)
}

fn leaf_stack(leaf: &FormulaTree) -> &[Integration] {
    match leaf {
        FormulaTree::Leaf {
            integrand_stack, ..
        } => integrand_stack,
        FormulaTree::Split { .. } => panic!("sample_point needs a leaf"),
    }
}

fn to_point(fixed: Vec<Option<f64>>, labels: &[ActionLabel]) -> Result<SamplePoint, SamplerError> {
    let coords = labels
        .iter()
        .zip(fixed)
        .map(|(l, x)| {
            x.map(|x| (l.clone(), x))
                .ok_or_else(|| SamplerError::NumericalFailure(format!("no coordinate for {l}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(SamplePoint { coords })
}

/// A uniform point of the leaf's polytope. `labels` names the vertices the
/// leaf's variables refer to.
pub fn sample_point(
    leaf: &FormulaTree,
    labels: &[ActionLabel],
    rng: &mut RandomSource,
) -> Result<SamplePoint, SamplerError> {
    let stack = leaf_stack(leaf);
    let dens = integrands(stack);
    to_point(draw_coords(stack, &dens, labels.len(), rng)?, labels)
}

/// Decomposition of one graph, prepared for repeated draws.
pub struct Sampler {
    labels: Vec<ActionLabel>,
    leaves: Vec<(Vec<Integration>, OnceLock<Vec<Polynomial>>)>,
    /// Running totals of `n! · volume` over the leaves.
    cumulative: Vec<BigUint>,
}

impl Sampler {
    pub fn new(g: &ControlGraph) -> Result<Self, SamplerError> {
        Self::from_tree(g, &decompose(g, Strategy::Default)?)
    }

    pub fn from_tree(g: &ControlGraph, tree: &FormulaTree) -> Result<Self, SamplerError> {
        let labels: Vec<ActionLabel> = (0..g.len())
            .map(|i| {
                g.label(i)
                    .cloned()
                    .ok_or_else(|| SamplerError::Bits(BitsError::DeadlockedGraph(g.residual_barriers())))
            })
            .collect::<Result<_, _>>()?;
        let mut leaves = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = BigUint::zero();
        let mut stack = vec![tree];
        while let Some(t) = stack.pop() {
            match t {
                FormulaTree::Leaf {
                    volume,
                    integrand_stack,
                    ..
                } => {
                    acc += scaled_count(volume, g.len())?;
                    cumulative.push(acc.clone());
                    leaves.push((integrand_stack.clone(), OnceLock::new()));
                }
                FormulaTree::Split { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        if acc.is_zero() {
            return Err(SamplerError::EmptyTree);
        }
        Ok(Sampler {
            labels,
            leaves,
            cumulative,
        })
    }

    /// Number of linear extensions, as a by-product of the decomposition.
    pub fn count(&self) -> &BigUint {
        self.cumulative.last().expect("at least one leaf")
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    fn pick_leaf(&self, rng: &mut RandomSource) -> usize {
        let r = rng.gen_biguint_below(self.count());
        self.cumulative.partition_point(|c| *c <= r)
    }

    pub fn sample_point(&self, rng: &mut RandomSource) -> Result<SamplePoint, SamplerError> {
        let i = self.pick_leaf(rng);
        let (stack, dens) = &self.leaves[i];
        let dens = dens.get_or_init(|| integrands(stack));
        to_point(draw_coords(stack, dens, self.labels.len(), rng)?, &self.labels)
    }

    /// One execution; ties in the drawn point trigger a fresh draw.
    pub fn sample(&self, rng: &mut RandomSource) -> Result<Execution, SamplerError> {
        for _ in 0..MAX_RESAMPLES {
            match rank_to_execution(&self.sample_point(rng)?) {
                Err(SamplerError::TieDetected) => continue,
                other => return other,
            }
        }
        Err(SamplerError::TieDetected)
    }
}

/// `k` independent uniform executions of `g`, reproducible from `seed`.
pub fn sample_execution(g: &ControlGraph, k: usize, seed: u64) -> Result<Vec<Execution>, SamplerError> {
    let s = Sampler::new(g)?;
    let mut rng = seeded(seed);
    (0..k).map(|_| s.sample(&mut rng)).collect()
}

/// Fraction of the tree's volume on the left of its root split, as a float.
pub fn root_split_ratio(t: &FormulaTree) -> Option<f64> {
    match t {
        FormulaTree::Split { left, .. } => (left.volume() / t.volume()).to_f64(),
        FormulaTree::Leaf { .. } => None,
    }
}
