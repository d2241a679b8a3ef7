use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::calculus::{ActionLabel, BarrierName, Execution, ProcessTerm};
use crate::ctlgraph::{build_ctg, ControlGraph, Node};
use crate::random::RandomSource;

use super::SubclassError;

/// The stack-discipline judgment: syncing is only allowed on the most
/// recently bound barrier still open on the current thread.
pub fn is_fork_join(p: &ProcessTerm) -> bool {
    let mut todo: Vec<(&ProcessTerm, Vec<&BarrierName>)> = vec![(p, Vec::new())];
    while let Some((t, mut stack)) = todo.pop() {
        match t {
            ProcessTerm::Stop => {}
            ProcessTerm::Act(_, q) => todo.push((q, stack)),
            ProcessTerm::Par(l, r) => {
                todo.push((r, stack.clone()));
                todo.push((l, stack));
            }
            ProcessTerm::New(b, q) => {
                stack.push(b);
                todo.push((q, stack));
            }
            ProcessTerm::Sync(b, q) => {
                if stack.last() != Some(&b) {
                    return false;
                }
                stack.pop();
                todo.push((q, stack));
            }
        }
    }
    true
}

/// Series-parallel shape of a causal order, kept in alternating normal
/// form: composite nodes have at least two children and never a child of
/// their own kind. `Empty` only ever appears alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SPTree {
    Empty,
    Atom(ActionLabel),
    Seq(Vec<SPTree>),
    Par(Vec<SPTree>),
}

impl SPTree {
    fn compose(parts: impl IntoIterator<Item = SPTree>, series: bool) -> SPTree {
        let mut kids = Vec::new();
        for p in parts {
            match p {
                SPTree::Empty => {}
                SPTree::Seq(c) if series => kids.extend(c),
                SPTree::Par(c) if !series => kids.extend(c),
                other => kids.push(other),
            }
        }
        match kids.len() {
            0 => SPTree::Empty,
            1 => kids.pop().expect("one child"),
            _ if series => SPTree::Seq(kids),
            _ => SPTree::Par(kids),
        }
    }

    /// Series composition, flattened.
    pub fn seq(parts: impl IntoIterator<Item = SPTree>) -> SPTree {
        SPTree::compose(parts, true)
    }

    /// Parallel composition, flattened.
    pub fn par(parts: impl IntoIterator<Item = SPTree>) -> SPTree {
        SPTree::compose(parts, false)
    }

    pub fn atom(label: impl Into<ActionLabel>) -> SPTree {
        SPTree::Atom(label.into())
    }

    /// Number of atoms.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |t| n += matches!(t, SPTree::Atom(_)) as usize);
        n
    }

    pub fn labels(&self) -> Vec<ActionLabel> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let SPTree::Atom(a) = t {
                out.push(a.clone());
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a SPTree)) {
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            f(t);
            if let SPTree::Seq(c) | SPTree::Par(c) = t {
                stack.extend(c.iter().rev());
            }
        }
    }

    /// Covering DAG of the order: every maximal atom of a series child
    /// points to every minimal atom of the next one.
    pub fn to_graph(&self) -> ControlGraph {
        fn ends(t: &SPTree, out: &mut ControlGraph, ids: &HashMap<&ActionLabel, usize>) -> (Vec<usize>, Vec<usize>) {
            match t {
                SPTree::Empty => (Vec::new(), Vec::new()),
                SPTree::Atom(a) => (vec![ids[a]], vec![ids[a]]),
                SPTree::Par(c) => {
                    let (mut lo, mut hi) = (Vec::new(), Vec::new());
                    for k in c {
                        let (l, h) = ends(k, out, ids);
                        lo.extend(l);
                        hi.extend(h);
                    }
                    (lo, hi)
                }
                SPTree::Seq(c) => {
                    let parts: Vec<_> = c.iter().map(|k| ends(k, out, ids)).collect();
                    for w in parts.windows(2) {
                        for &u in &w[0].1 {
                            for &v in &w[1].0 {
                                out.add_edge(u, v);
                            }
                        }
                    }
                    (parts[0].0.clone(), parts[parts.len() - 1].1.clone())
                }
            }
        }
        let labels = self.labels();
        let mut g = ControlGraph::new();
        for a in &labels {
            g.add_node(Node::Action(a.clone())).expect("distinct labels");
        }
        let ids: HashMap<&ActionLabel, usize> = labels.iter().enumerate().map(|(i, a)| (a, i)).collect();
        ends(self, &mut g, &ids);
        g
    }
}

impl fmt::Display for SPTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SPTree::Empty => f.write_str("()"),
            SPTree::Atom(a) => write!(f, "{a}"),
            SPTree::Seq(c) | SPTree::Par(c) => {
                f.write_str(if matches!(self, SPTree::Seq(_)) { "Seq(" } else { "Par(" })?;
                for (i, k) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// What a subterm contributes relative to the innermost open barrier:
/// `closed` never reaches it, `open` is the part before it together with
/// the continuations that run after it. The two are independent.
#[derive(Default)]
struct Part<'a> {
    closed: Option<SPTree>,
    open: Option<(SPTree, Vec<&'a ProcessTerm>)>,
}

fn join_parts<'a>(a: Part<'a>, b: Part<'a>) -> Part<'a> {
    let closed = match (a.closed, b.closed) {
        (Some(x), Some(y)) => Some(SPTree::par([x, y])),
        (x, y) => x.or(y),
    };
    let open = match (a.open, b.open) {
        (Some((s, mut k)), Some((t, k2))) => {
            k.extend(k2);
            Some((SPTree::par([s, t]), k))
        }
        (x, y) => x.or(y),
    };
    Part { closed, open }
}

/// Shape read directly off the term. `None` when a prefix would sit above
/// both a part that reaches the barrier and one that does not; the order
/// may then fail to be series-parallel and the caller falls back to the
/// graph.
fn syntactic(p: &ProcessTerm) -> Option<Part<'_>> {
    // Peel the action prefix iteratively; chains can be very long.
    let mut prefix = Vec::new();
    let mut t = p;
    while let ProcessTerm::Act(a, q) = t {
        prefix.push(SPTree::Atom(a.clone()));
        t = q;
    }
    let inner = match t {
        ProcessTerm::Stop => Part::default(),
        ProcessTerm::Act(..) => unreachable!(),
        ProcessTerm::Sync(_, q) => Part {
            closed: None,
            open: Some((SPTree::Empty, vec![&**q])),
        },
        ProcessTerm::Par(l, r) => join_parts(syntactic(l)?, syntactic(r)?),
        ProcessTerm::New(_, body) => {
            let r = syntactic(body)?;
            match r.open {
                None => r,
                Some((before, conts)) => {
                    let mut after = Part::default();
                    for k in conts {
                        after = join_parts(after, syntactic(k)?);
                    }
                    match (after.closed, after.open) {
                        (Some(_), Some(_)) => return None,
                        (None, Some((s, k))) => Part {
                            closed: r.closed,
                            open: Some((SPTree::seq([before, s]), k)),
                        },
                        (c, None) => {
                            let tail = SPTree::seq([before, c.unwrap_or(SPTree::Empty)]);
                            Part {
                                closed: Some(SPTree::par([r.closed.unwrap_or(SPTree::Empty), tail])),
                                open: None,
                            }
                        }
                    }
                }
            }
        }
    };
    if prefix.is_empty() {
        return Some(inner);
    }
    match (inner.closed, inner.open) {
        (Some(_), Some(_)) => None,
        (c, None) => {
            prefix.push(c.unwrap_or(SPTree::Empty));
            Some(Part {
                closed: Some(SPTree::seq(prefix)),
                open: None,
            })
        }
        (None, Some((s, k))) => {
            prefix.push(s);
            Some(Part {
                closed: None,
                open: Some((SPTree::seq(prefix), k)),
            })
        }
    }
}

/// Series-parallel decomposition of a transitively reduced DAG.
pub fn sp_tree_of_graph(g: &ControlGraph) -> Result<SPTree, SubclassError> {
    let all: Vec<usize> = (0..g.len()).collect();
    let mut member = vec![false; g.len()];
    split_set(g, all, &mut member)
}

fn components(g: &ControlGraph, set: &[usize], member: &[bool]) -> Vec<Vec<usize>> {
    let mut seen: HashMap<usize, ()> = HashMap::new();
    let mut out = Vec::new();
    for &s in set {
        if seen.contains_key(&s) {
            continue;
        }
        let mut comp = vec![s];
        seen.insert(s, ());
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            i += 1;
            for &v in g.succ(u).iter().chain(g.pred(u)) {
                if member[v] && !seen.contains_key(&v) {
                    seen.insert(v, ());
                    comp.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn split_set(g: &ControlGraph, set: Vec<usize>, member: &mut Vec<bool>) -> Result<SPTree, SubclassError> {
    let label = |v: usize| g.label(v).cloned().ok_or(SubclassError::NotSeriesParallel);
    match set.len() {
        0 => return Ok(SPTree::Empty),
        1 => return Ok(SPTree::Atom(label(set[0])?)),
        _ => {}
    }
    for &v in &set {
        member[v] = true;
    }
    let comps = components(g, &set, member);
    if comps.len() > 1 {
        for &v in &set {
            member[v] = false;
        }
        let kids = comps
            .into_iter()
            .map(|c| split_set(g, c, member))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(SPTree::par(kids));
    }
    // Series cuts are exactly the prefixes of a topological order whose
    // maximal elements all cover every minimal element of the rest.
    let order = {
        let mut indeg: HashMap<usize, usize> = set
            .iter()
            .map(|&v| (v, g.pred(v).iter().filter(|&&u| member[u]).count()))
            .collect();
        let mut ready: Vec<usize> = set.iter().copied().filter(|v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(set.len());
        while let Some(u) = ready.pop() {
            order.push(u);
            for &v in g.succ(u) {
                if member[v] {
                    let d = indeg.get_mut(&v).expect("member");
                    *d -= 1;
                    if *d == 0 {
                        ready.push(v);
                    }
                }
            }
        }
        order
    };
    let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut cuts = Vec::new();
    for k in 1..order.len() {
        let in_a = |v: usize| member[v] && pos[&v] < k;
        let in_b = |v: usize| member[v] && pos[&v] >= k;
        let maxima: Vec<usize> = order[..k]
            .iter()
            .copied()
            .filter(|&u| !g.succ(u).iter().any(|&v| in_a(v)))
            .collect();
        let minima: Vec<usize> = order[k..]
            .iter()
            .copied()
            .filter(|&v| !g.pred(v).iter().any(|&u| in_b(u)))
            .collect();
        let crossing: usize = maxima
            .iter()
            .map(|&u| g.succ(u).iter().filter(|&&v| in_b(v) && minima.contains(&v)).count())
            .sum();
        if crossing == maxima.len() * minima.len() {
            cuts.push(k);
        }
    }
    for &v in &set {
        member[v] = false;
    }
    if cuts.is_empty() {
        return Err(SubclassError::NotSeriesParallel);
    }
    let mut kids = Vec::new();
    let mut start = 0;
    for end in cuts.into_iter().chain([order.len()]) {
        kids.push(split_set(g, order[start..end].to_vec(), member)?);
        start = end;
    }
    Ok(SPTree::seq(kids))
}

/// Series-parallel shape of a fork-join process.
pub fn sp_tree(p: &ProcessTerm) -> Result<SPTree, SubclassError> {
    if !is_fork_join(p) {
        return Err(SubclassError::NotForkJoin);
    }
    if let Some(part) = syntactic(p) {
        if part.open.is_none() {
            return Ok(part.closed.unwrap_or(SPTree::Empty));
        }
    }
    let g = build_ctg(p)?;
    sp_tree_of_graph(&g)
}

/// Smallest prime factor of every integer up to `n`.
fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            for j in (i..=n).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
            }
        }
    }
    spf
}

fn product(mut xs: Vec<BigUint>) -> BigUint {
    if xs.is_empty() {
        return BigUint::one();
    }
    while xs.len() > 1 {
        xs = xs
            .chunks(2)
            .map(|c| if c.len() == 2 { &c[0] * &c[1] } else { c[0].clone() })
            .collect();
    }
    xs.pop().expect("one factor")
}

/// Number of linear extensions: the product over parallel nodes of the
/// multinomial coefficient of their children's sizes.
pub fn fj_count(t: &SPTree) -> BigUint {
    // Exponent of each k! in the result.
    let mut fact_exp: BTreeMap<usize, i64> = BTreeMap::new();
    let mut sizes: HashMap<*const SPTree, usize> = HashMap::new();
    let mut stack = vec![(t, false)];
    while let Some((node, done)) = stack.pop() {
        match node {
            SPTree::Empty => {
                sizes.insert(node, 0);
            }
            SPTree::Atom(_) => {
                sizes.insert(node, 1);
            }
            SPTree::Seq(c) | SPTree::Par(c) if !done => {
                stack.push((node, true));
                stack.extend(c.iter().map(|k| (k, false)));
            }
            SPTree::Seq(c) | SPTree::Par(c) => {
                let total: usize = c.iter().map(|k| sizes[&(k as *const SPTree)]).sum();
                if matches!(node, SPTree::Par(_)) {
                    *fact_exp.entry(total).or_default() += 1;
                    for k in c {
                        *fact_exp.entry(sizes[&(k as *const SPTree)]).or_default() -= 1;
                    }
                }
                sizes.insert(node, total);
            }
        }
    }
    let top = fact_exp.keys().next_back().copied().unwrap_or(0);
    // j appears in k! for every k >= j: suffix sums give the power of j.
    let mut power = vec![0i64; top + 2];
    for (&k, &e) in &fact_exp {
        power[k] += e;
    }
    for j in (0..=top).rev() {
        power[j] += power[j + 1];
    }
    let spf = smallest_prime_factors(top);
    let mut prime_exp: BTreeMap<u32, i64> = BTreeMap::new();
    for (j, &e) in power.iter().enumerate().take(top + 1).skip(2) {
        if e == 0 {
            continue;
        }
        let mut m = j;
        while m > 1 {
            let p = spf[m];
            *prime_exp.entry(p).or_default() += e;
            m /= p as usize;
        }
    }
    let factors: Vec<BigUint> = prime_exp
        .into_iter()
        .map(|(p, e)| {
            debug_assert!(e >= 0, "multinomials are integers");
            num_traits::pow(BigUint::from(p), e as usize)
        })
        .collect();
    product(factors)
}

/// A uniform linear extension: children of a parallel node are sampled
/// independently and interleaved by a uniform shuffle of their positions.
pub fn fj_sample(t: &SPTree, rng: &mut RandomSource) -> Execution {
    fn go(t: &SPTree, rng: &mut RandomSource) -> Vec<ActionLabel> {
        match t {
            SPTree::Empty => Vec::new(),
            SPTree::Atom(a) => vec![a.clone()],
            SPTree::Seq(c) => c.iter().flat_map(|k| go(k, rng)).collect(),
            SPTree::Par(c) => {
                let runs: Vec<Vec<ActionLabel>> = c.iter().map(|k| go(k, rng)).collect();
                let mut slots: Vec<usize> = runs
                    .iter()
                    .enumerate()
                    .flat_map(|(i, r)| std::iter::repeat_n(i, r.len()))
                    .collect();
                slots.shuffle(rng);
                let mut iters: Vec<_> = runs.into_iter().map(Vec::into_iter).collect();
                slots
                    .into_iter()
                    .map(|i| iters[i].next().expect("slot per element"))
                    .collect()
            }
        }
    }
    Execution(go(t, rng))
}

/// Sizes up to which generation is exactly uniform.
pub const UNIFORM_GEN_LIMIT: usize = 500;

/// Shape counts: `t[n]` for a thread of `n` actions (`α.C(n-1)`), `c[m]`
/// for a continuation of `m` actions (`0`, a thread, or a join of two
/// threads followed by a thread), `u[k]` for ordered pairs of threads.
struct ShapeCounts {
    t: Vec<BigUint>,
    c: Vec<BigUint>,
    u: Vec<BigUint>,
}

fn shape_counts() -> &'static ShapeCounts {
    static COUNTS: OnceLock<ShapeCounts> = OnceLock::new();
    COUNTS.get_or_init(|| {
        let n = UNIFORM_GEN_LIMIT;
        let mut t = vec![BigUint::zero(); n + 1];
        let mut c = vec![BigUint::zero(); n + 1];
        let mut u = vec![BigUint::zero(); n + 1];
        c[0] = BigUint::one();
        for m in 1..=n {
            t[m] = c[m - 1].clone();
            let mut pairs = BigUint::zero();
            for i in 1..m {
                pairs += &t[i] * &t[m - i];
            }
            u[m] = pairs;
            let mut joins = BigUint::zero();
            for k in 2..m {
                joins += &u[k] * &t[m - k];
            }
            c[m] = &t[m] + joins;
        }
        ShapeCounts { t, c, u }
    })
}

/// Node of a generated shape: a run of actions ending in a join or in `0`.
enum Shape {
    Chain(usize, Option<Box<(Shape, Shape, Shape)>>),
}

/// Draw the shape of `C(m)`.
fn draw_continuation(m: usize, rng: &mut RandomSource) -> Shape {
    let mut run = 0;
    let mut m = m;
    loop {
        if m == 0 {
            return Shape::Chain(run, None);
        }
        let join = if m <= UNIFORM_GEN_LIMIT {
            let sc = shape_counts();
            rng.gen_biguint_below(&sc.c[m]) >= sc.t[m]
        } else {
            rng.gen_bool(1.0 / 3.0)
        };
        if !join || m < 3 {
            run += 1;
            m -= 1;
            continue;
        }
        let (i, j) = draw_join_split(m, rng);
        let left = draw_continuation(i - 1, rng);
        let right = draw_continuation(j - 1, rng);
        let after = draw_continuation(m - i - j - 1, rng);
        return Shape::Chain(run, Some(Box::new((left, right, after))));
    }
}

/// Sizes `(i, j)` of the two joined threads in `C(m)`.
fn draw_join_split(m: usize, rng: &mut RandomSource) -> (usize, usize) {
    if m > UNIFORM_GEN_LIMIT {
        // Uniform composition of m into three positive parts.
        let mut cut = rand::seq::index::sample(rng, m - 1, 2).into_vec();
        cut.sort_unstable();
        return (cut[0] + 1, cut[1] - cut[0]);
    }
    let sc = shape_counts();
    let weight = |k: usize| &sc.u[k] * &sc.t[m - k];
    let total: BigUint = (2..m).map(weight).sum();
    let mut r = rng.gen_biguint_below(&total);
    let mut k = 2;
    loop {
        let w = weight(k);
        if r < w {
            break;
        }
        r -= w;
        k += 1;
    }
    let total: BigUint = (1..k).map(|i| &sc.t[i] * &sc.t[k - i]).sum();
    let mut r = rng.gen_biguint_below(&total);
    let mut i = 1;
    loop {
        let w = &sc.t[i] * &sc.t[k - i];
        if r < w {
            break;
        }
        r -= w;
        i += 1;
    }
    (i, k - i)
}

struct Namer {
    actions: usize,
    barriers: usize,
}

impl Namer {
    fn action(&mut self) -> ActionLabel {
        self.actions += 1;
        ActionLabel::new(format!("a{}", self.actions))
    }

    fn barrier(&mut self) -> BarrierName {
        self.barriers += 1;
        BarrierName::new(format!("J{}", self.barriers))
    }
}

/// A thread `α.C` whose `0` leaves become `exit` syncs.
fn render_thread(s: &Shape, exit: Option<&BarrierName>, names: &mut Namer) -> ProcessTerm {
    let head = names.action();
    ProcessTerm::Act(head, Box::new(render(s, exit, names)))
}

fn render(s: &Shape, exit: Option<&BarrierName>, names: &mut Namer) -> ProcessTerm {
    let Shape::Chain(run, join) = s;
    let labels: Vec<ActionLabel> = (0..*run).map(|_| names.action()).collect();
    let tail = match join {
        None => match exit {
            Some(b) => ProcessTerm::sync(b.clone(), ProcessTerm::Stop),
            None => ProcessTerm::Stop,
        },
        Some(parts) => {
            let (left, right, after) = &**parts;
            let b = names.barrier();
            let l = render_thread(left, Some(&b), names);
            let r = render_thread(right, Some(&b), names);
            let k = render_thread(after, exit, names);
            ProcessTerm::new_barrier(
                b.clone(),
                ProcessTerm::par_all([l, r, ProcessTerm::sync(b, k)]),
            )
        }
    };
    labels
        .into_iter()
        .rev()
        .fold(tail, |acc, a| ProcessTerm::Act(a, Box::new(acc)))
}

/// A random fork-join term with `size` actions.
///
/// Shapes follow `T(n) = α.C(n-1)` and `C(m) = 0 | T(m) | join(T(i), T(j)).T(k)`
/// with `i + j + k = m`; the thread after a join always starts with an
/// action. Up to [`UNIFORM_GEN_LIMIT`] actions every shape is equally
/// likely; beyond, joins are drawn with probability 1/3 and split sizes
/// uniformly.
pub fn gen_fork_join(size: usize, rng: &mut RandomSource) -> Result<ProcessTerm, SubclassError> {
    if size == 0 {
        return Err(SubclassError::InvalidParameters("size must be at least 1".into()));
    }
    let shape = draw_continuation(size - 1, rng);
    let mut names = Namer {
        actions: 0,
        barriers: 0,
    };
    Ok(render_thread(&shape, None, &mut names))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::parse_process;
    use crate::random::seeded;

    fn sp(text: &str) -> SPTree {
        sp_tree(&parse_process(text).unwrap()).unwrap()
    }

    #[test]
    fn judgment() {
        assert!(is_fork_join(&parse_process("nu(B) (a.<B>0 || <B>b.0 || <B>c.0)").unwrap()));
        assert!(is_fork_join(&parse_process("a.0").unwrap()));
        assert!(!is_fork_join(&parse_process("nu(B) nu(C) (<B><C>a.0 || <C><B>b.0)").unwrap()));
    }

    #[test]
    fn shapes() {
        assert_eq!(sp("a.b.0"), SPTree::Seq(vec![SPTree::atom("a"), SPTree::atom("b")]));
        assert_eq!(
            sp("a.(b.0 || c.0)"),
            SPTree::Seq(vec![
                SPTree::atom("a"),
                SPTree::Par(vec![SPTree::atom("b"), SPTree::atom("c")])
            ])
        );
        assert_eq!(sp("0"), SPTree::Empty);
    }

    #[test]
    fn join_shape() {
        let t = sp("nu(J) (a.<J>0 || b.<J>0 || <J>c.0)");
        assert_eq!(t.to_string(), "Seq(Par(a, b), c)");
    }

    #[test]
    fn mixed_participation_falls_back() {
        let p = parse_process("nu(B) (a.(b.<B>0 || c.0) || <B>d.0)").unwrap();
        assert!(syntactic(&p).is_none());
        assert_eq!(sp_tree(&p).unwrap().to_string(), "Seq(a, Par(c, Seq(b, d)))");
        let n = parse_process("nu(B) (a.(b.<B>0 || c.0) || e.<B>d.0)").unwrap();
        assert!(syntactic(&n).is_none());
        assert_eq!(sp_tree(&n), Err(SubclassError::NotSeriesParallel));
    }

    #[test]
    fn counts() {
        let chain = SPTree::seq((0..5).map(|i| SPTree::atom(format!("c{i}"))));
        assert_eq!(fj_count(&chain), BigUint::one());
        assert_eq!(
            fj_count(&SPTree::par([SPTree::atom("a"), SPTree::atom("b")])),
            BigUint::from(2u32)
        );
        let t = SPTree::seq([
            SPTree::atom("a"),
            SPTree::par([SPTree::seq([SPTree::atom("b"), SPTree::atom("c")]), SPTree::atom("d")]),
        ]);
        assert_eq!(fj_count(&t), BigUint::from(3u32));
        let anti = SPTree::par((0..10).map(|i| SPTree::atom(format!("x{i}"))));
        assert_eq!(fj_count(&anti), BigUint::from(3_628_800u32));
        assert_eq!(fj_count(&SPTree::Empty), BigUint::one());
    }

    #[test]
    fn sampling_respects_series() {
        let t = sp("a.(b.0 || c.d.0)");
        let mut rng = seeded(4);
        let g = t.to_graph();
        for _ in 0..100 {
            assert!(g.is_linear_extension(&fj_sample(&t, &mut rng)));
        }
    }

    #[test]
    fn shape_counts_small() {
        let sc = shape_counts();
        // C(3) is a chain or one join of two single actions followed by one.
        assert_eq!(sc.t[1], BigUint::one());
        assert_eq!(sc.t[3], BigUint::one());
        assert_eq!(sc.c[3], BigUint::from(2u32));
        assert_eq!(sc.t[5], BigUint::from(5u32));
    }

    #[test]
    fn generated_terms_are_fork_join() {
        let mut rng = seeded(11);
        for size in 1..40 {
            let p = gen_fork_join(size, &mut rng).unwrap();
            assert_eq!(p.size(), size);
            assert!(is_fork_join(&p), "{p}");
            let t = sp_tree(&p).unwrap();
            assert_eq!(t.size(), size);
            let g = build_ctg(&p).unwrap();
            assert_eq!(t.to_graph().transitive_reduction().canonical(), g.canonical());
        }
    }
}
