//! Control graphs: the covering DAG of the causal order of a process.

mod build;
mod io;
mod poset;

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::calculus::{ActionLabel, BarrierName};

pub use build::{build_ctg, build_ctg_literal, build_ctg_unreduced, MAX_REDUCTION_NODES};
pub use io::{parse_edge_list, to_dot, to_edge_list};
pub use poset::{encode_poset, same_labelled, to_poset, Poset};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CtgError {
    #[error("node {0} is already present")]
    DuplicateNode(Node),
    #[error("action label `{0}` occurs more than once")]
    DuplicateLabel(ActionLabel),
    #[error("the graph has a cycle or an unresolved barrier{}", residual_suffix(.0))]
    DeadlockedGraph(Vec<BarrierName>),
    #[error("edge {0} -> {1} is implied by a longer path")]
    NotTransitivelyReduced(ActionLabel, ActionLabel),
    #[error("the input relation has a cycle")]
    CyclicInput,
    #[error("graph has {0} vertices; transitive reduction is capped at {1}")]
    TooLarge(usize, usize),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

fn residual_suffix(names: &[BarrierName]) -> String {
    if names.is_empty() {
        String::new()
    } else {
        let names: Vec<_> = names.iter().map(|b| b.to_string()).collect();
        format!(" (residual barrier {})", names.join(", "))
    }
}

/// A control-graph vertex.
///
/// Barrier vertices remember which binder they belong to, so nested
/// binders reusing one name never collide.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Action(ActionLabel),
    Barrier { name: BarrierName, binder: usize },
}

impl Node {
    pub fn action(label: impl Into<ActionLabel>) -> Self {
        Node::Action(label.into())
    }

    pub fn barrier(name: impl Into<BarrierName>, binder: usize) -> Self {
        Node::Barrier {
            name: name.into(),
            binder,
        }
    }

    pub fn is_barrier(&self) -> bool {
        matches!(self, Node::Barrier { .. })
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Action(a) => write!(f, "{a}"),
            Node::Barrier { name, .. } => write!(f, "<{name}>"),
        }
    }
}

/// Directed graph over actions and (residual) barriers.
///
/// Vertices are addressed by dense indices; adjacency lists are kept
/// sorted and free of duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ControlGraph {
    nodes: Vec<Node>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    index: HashMap<Node, usize>,
}

impl ControlGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// A graph over action vertices `labels` with the given index edges.
    pub fn from_edges(
        labels: impl IntoIterator<Item = ActionLabel>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, CtgError> {
        let mut g = ControlGraph::new();
        for l in labels {
            g.add_node(Node::Action(l))?;
        }
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn index_of(&self, n: &Node) -> Option<usize> {
        self.index.get(n).copied()
    }

    pub fn contains(&self, n: &Node) -> bool {
        self.index.contains_key(n)
    }

    pub fn succ(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn pred(&self, i: usize) -> &[usize] {
        &self.pred[i]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    /// Label of an action vertex; `None` for barriers.
    pub fn label(&self, i: usize) -> Option<&ActionLabel> {
        match &self.nodes[i] {
            Node::Action(a) => Some(a),
            Node::Barrier { .. } => None,
        }
    }

    pub fn add_node(&mut self, n: Node) -> Result<usize, CtgError> {
        if self.index.contains_key(&n) {
            return Err(CtgError::DuplicateNode(n));
        }
        let i = self.nodes.len();
        self.index.insert(n.clone(), i);
        self.nodes.push(n);
        self.succ.push(Vec::new());
        self.pred.push(Vec::new());
        Ok(i)
    }

    /// Insert an edge; returns false if it was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        match self.succ[u].binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.succ[u].insert(pos, v);
                let pos = self.pred[v].binary_search(&u).unwrap_err();
                self.pred[v].insert(pos, u);
                true
            }
        }
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        match self.succ[u].binary_search(&v) {
            Ok(pos) => {
                self.succ[u].remove(pos);
                let pos = self.pred[v].binary_search(&u).unwrap();
                self.pred[v].remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// Copy without the vertices for which `drop` holds (and their edges).
    pub fn without(&self, drop: impl Fn(usize) -> bool) -> ControlGraph {
        let mut map = vec![usize::MAX; self.len()];
        let mut g = ControlGraph::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !drop(i) {
                map[i] = g.add_node(n.clone()).expect("distinct nodes");
            }
        }
        for (u, v) in self.edges() {
            if map[u] != usize::MAX && map[v] != usize::MAX {
                g.add_edge(map[u], map[v]);
            }
        }
        g
    }

    /// Vertices with no incoming edge, ascending.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.pred[i].is_empty()).collect()
    }

    pub fn barrier_nodes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.nodes[i].is_barrier())
            .collect()
    }

    /// Kahn order, smallest index first among ready vertices; `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.pred.iter().map(Vec::len).collect();
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..self.len())
            .filter(|&i| indeg[i] == 0)
            .map(std::cmp::Reverse)
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(std::cmp::Reverse(u)) = ready.pop() {
            order.push(u);
            for &v in &self.succ[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.push(std::cmp::Reverse(v));
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }

    pub fn has_cycle(&self) -> bool {
        self.topological_order().is_none()
    }

    /// Strict descendants of every vertex. Requires an acyclic graph.
    pub fn reachability(&self) -> Option<Vec<FixedBitSet>> {
        let order = self.topological_order()?;
        let n = self.len();
        let mut reach = vec![FixedBitSet::with_capacity(n); n];
        for &u in order.iter().rev() {
            let mut r = FixedBitSet::with_capacity(n);
            for &v in &self.succ[u] {
                r.insert(v);
                r.union_with(&reach[v]);
            }
            reach[u] = r;
        }
        Some(reach)
    }

    /// Whether `v` is reachable from `u` by a nonempty path.
    pub fn reaches(&self, u: usize, v: usize) -> bool {
        let mut seen = FixedBitSet::with_capacity(self.len());
        let mut stack = self.succ[u].clone();
        while let Some(w) = stack.pop() {
            if w == v {
                return true;
            }
            if !seen.put(w) {
                stack.extend_from_slice(&self.succ[w]);
            }
        }
        false
    }

    /// First edge implied by a longer path, if any. Requires an acyclic graph.
    pub fn transitive_edge(&self) -> Option<(usize, usize)> {
        let reach = self.reachability()?;
        for u in 0..self.len() {
            for &v in &self.succ[u] {
                if self.succ[u].iter().any(|&w| w != v && reach[w].contains(v)) {
                    return Some((u, v));
                }
            }
        }
        None
    }

    pub fn is_transitively_reduced(&self) -> bool {
        self.transitive_edge().is_none()
    }

    /// Remove every edge implied by a longer path. A cyclic graph is
    /// returned unchanged.
    pub fn transitive_reduction(&self) -> ControlGraph {
        let Some(order) = self.topological_order() else {
            return self.clone();
        };
        let n = self.len();
        let mut pos = vec![0; n];
        for (i, &u) in order.iter().enumerate() {
            pos[u] = i;
        }
        let mut reach = vec![FixedBitSet::new(); n];
        let mut keep: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &u in order.iter().rev() {
            let mut succ = self.succ[u].clone();
            succ.sort_unstable_by_key(|&v| pos[v]);
            let mut r = FixedBitSet::with_capacity(n);
            for v in succ {
                if r.contains(v) {
                    continue;
                }
                keep[u].push(v);
                r.insert(v);
                r.union_with(&reach[v]);
            }
            reach[u] = r;
        }
        let mut g = ControlGraph {
            nodes: self.nodes.clone(),
            succ: vec![Vec::new(); n],
            pred: vec![Vec::new(); n],
            index: self.index.clone(),
        };
        for (u, vs) in keep.into_iter().enumerate() {
            for v in vs {
                g.add_edge(u, v);
            }
        }
        g
    }

    /// The same graph with vertices renumbered in ascending node order,
    /// so equal graphs compare equal regardless of construction order.
    pub fn canonical(&self) -> ControlGraph {
        let mut ids: Vec<usize> = (0..self.len()).collect();
        ids.sort_by(|&a, &b| self.nodes[a].cmp(&self.nodes[b]));
        let mut map = vec![0; self.len()];
        let mut g = ControlGraph::new();
        for &i in &ids {
            map[i] = g.add_node(self.nodes[i].clone()).expect("distinct nodes");
        }
        for (u, v) in self.edges() {
            g.add_edge(map[u], map[v]);
        }
        g
    }

    /// Edge set over node values; convenient for comparisons in tests.
    pub fn edge_set(&self) -> std::collections::BTreeSet<(Node, Node)> {
        self.edges()
            .map(|(u, v)| (self.nodes[u].clone(), self.nodes[v].clone()))
            .collect()
    }

    /// Whether `e` lists every action vertex exactly once, respecting all edges.
    pub fn is_linear_extension(&self, e: &crate::calculus::Execution) -> bool {
        if e.len() != self.len() {
            return false;
        }
        let mut pos = vec![usize::MAX; self.len()];
        for (k, a) in e.steps().iter().enumerate() {
            match self.index_of(&Node::Action(a.clone())) {
                Some(i) if pos[i] == usize::MAX => pos[i] = k,
                _ => return false,
            }
        }
        self.edges().all(|(u, v)| pos[u] < pos[v])
    }

    /// Names of barrier vertices still present.
    pub fn residual_barriers(&self) -> Vec<BarrierName> {
        let mut v: Vec<BarrierName> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Barrier { name, .. } => Some(name.clone()),
                Node::Action(_) => None,
            })
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

/// `x ↝ g`: add `x` with an edge to every vertex of `g` that has no
/// incoming edge.
///
/// When `g` has no edges this is every vertex. Isolated vertices are
/// included in the mixed case too, otherwise the prefix would lose its
/// causal link to them. Adding an already present barrier merges into
/// it, which can create a self-loop; an already present action is an error.
pub fn prefix_node(x: Node, g: &ControlGraph) -> Result<ControlGraph, CtgError> {
    let roots = g.roots();
    let mut out = g.clone();
    let xi = match out.index_of(&x) {
        Some(i) if x.is_barrier() => i,
        Some(_) => return Err(CtgError::DuplicateNode(x)),
        None => out.add_node(x)?,
    };
    for r in roots {
        out.add_edge(xi, r);
    }
    Ok(out)
}

/// Union of vertex and edge sets; equal nodes are identified.
pub fn union(g: &ControlGraph, h: &ControlGraph) -> ControlGraph {
    let mut out = g.clone();
    let map: Vec<usize> = h
        .nodes()
        .iter()
        .map(|n| match out.index_of(n) {
            Some(i) => i,
            None => out.add_node(n.clone()).expect("fresh node"),
        })
        .collect();
    for (u, v) in h.edges() {
        out.add_edge(map[u], map[v]);
    }
    out
}

/// `⊗` for one vertex: bypass it with an edge for every path through it,
/// then remove it. A self-loop on the vertex is kept (with the vertex) as
/// the trace of an unresolvable barrier.
pub fn eliminate_node(g: &ControlGraph, v: usize) -> ControlGraph {
    let mut out = g.clone();
    let preds: Vec<usize> = g.pred(v).iter().copied().filter(|&p| p != v).collect();
    let succs: Vec<usize> = g.succ(v).iter().copied().filter(|&s| s != v).collect();
    for &p in &preds {
        for &s in &succs {
            out.add_edge(p, s);
        }
    }
    if g.has_edge(v, v) {
        for &p in &preds {
            out.remove_edge(p, v);
        }
        for &s in &succs {
            out.remove_edge(v, s);
        }
        out
    } else {
        out.without(|i| i == v)
    }
}

/// `⊗_B`: eliminate every barrier vertex named `name`. Absent names are a no-op.
pub fn eliminate_barrier(g: &ControlGraph, name: &BarrierName) -> ControlGraph {
    let mut out = g.clone();
    loop {
        let next = (0..out.len()).find(|&i| {
            matches!(out.node(i), Node::Barrier { name: n, .. } if n == name)
                && !out.has_edge(i, i)
        });
        match next {
            Some(i) => out = eliminate_node(&out, i),
            None => return out,
        }
    }
}

/// A graph signals a deadlock when it has a cycle (self-loops included) or
/// a barrier vertex survived construction.
pub fn has_deadlock(g: &ControlGraph) -> bool {
    g.nodes().iter().any(Node::is_barrier) || g.has_cycle()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Node {
        Node::action(s)
    }

    #[test]
    fn prefix_on_empty_graph() {
        let g = prefix_node(a("x"), &ControlGraph::new()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn prefix_on_edgeless_graph_connects_all() {
        let mut g = ControlGraph::new();
        g.add_node(a("b")).unwrap();
        let g = prefix_node(a("a"), &g).unwrap();
        assert_eq!(g.edge_set(), [(a("a"), a("b"))].into());
    }

    #[test]
    fn prefix_barrier_chain() {
        let g = prefix_node(a("a"), &ControlGraph::new()).unwrap();
        let g = prefix_node(Node::barrier("C", 1), &g).unwrap();
        let g = prefix_node(Node::barrier("B", 0), &g).unwrap();
        assert_eq!(
            g.edge_set(),
            [
                (Node::barrier("B", 0), Node::barrier("C", 1)),
                (Node::barrier("C", 1), a("a"))
            ]
            .into()
        );
    }

    #[test]
    fn prefix_reaches_isolated_vertices_in_mixed_graphs() {
        let mut g = ControlGraph::new();
        let b = g.add_node(a("b")).unwrap();
        let c = g.add_node(a("c")).unwrap();
        let d = g.add_node(a("d")).unwrap();
        g.add_edge(c, d);
        let g = prefix_node(a("a"), &g).unwrap();
        let ai = g.index_of(&a("a")).unwrap();
        assert!(g.has_edge(ai, b));
        assert!(g.has_edge(ai, c));
        assert!(!g.has_edge(ai, d));
    }

    #[test]
    fn duplicate_action_rejected() {
        let g = prefix_node(a("x"), &ControlGraph::new()).unwrap();
        assert_eq!(prefix_node(a("x"), &g), Err(CtgError::DuplicateNode(a("x"))));
    }

    #[test]
    fn eliminate_fans_out() {
        let mut g = ControlGraph::new();
        let b = g.add_node(Node::barrier("B", 0)).unwrap();
        let x = g.add_node(a("a")).unwrap();
        let y = g.add_node(a("b")).unwrap();
        g.add_edge(b, x);
        g.add_edge(b, y);
        let h = eliminate_barrier(&g, &BarrierName::from("B"));
        assert_eq!(h.len(), 2);
        assert_eq!(h.num_edges(), 0);
        assert!(!has_deadlock(&h));
    }

    #[test]
    fn eliminate_keeps_self_loop() {
        let mut g = ControlGraph::new();
        let b = g.add_node(Node::barrier("B", 0)).unwrap();
        let x = g.add_node(a("a")).unwrap();
        g.add_edge(b, b);
        g.add_edge(b, x);
        let h = eliminate_barrier(&g, &BarrierName::from("B"));
        let bi = h.index_of(&Node::barrier("B", 0)).unwrap();
        assert!(h.has_edge(bi, bi));
        assert!(has_deadlock(&h));
    }

    #[test]
    fn eliminate_absent_is_identity() {
        let mut g = ControlGraph::new();
        let x = g.add_node(a("a")).unwrap();
        let y = g.add_node(a("b")).unwrap();
        g.add_edge(x, y);
        assert_eq!(eliminate_barrier(&g, &BarrierName::from("B")), g);
    }

    #[test]
    fn transitive_reduction_drops_shortcuts() {
        let g = ControlGraph::from_edges(
            ["a", "b", "c"].map(ActionLabel::from),
            [(0, 1), (1, 2), (0, 2)],
        )
        .unwrap();
        assert!(!g.is_transitively_reduced());
        let r = g.transitive_reduction();
        assert!(r.is_transitively_reduced());
        assert_eq!(r.num_edges(), 2);
        assert!(!r.has_edge(0, 2));
    }

    #[test]
    fn union_is_commutative_on_sets() {
        let g = prefix_node(a("a"), &ControlGraph::new()).unwrap();
        let g = prefix_node(Node::barrier("B", 0), &g).unwrap();
        let h = prefix_node(Node::barrier("B", 0), &ControlGraph::new()).unwrap();
        let h = prefix_node(a("b"), &h).unwrap();
        assert_eq!(union(&g, &h).canonical(), union(&h, &g).canonical());
    }
}
