//! Control graph construction.
//!
//! Two routes are provided. `build_ctg_literal` follows the structural
//! recursion directly, with one merged vertex per bound barrier; it
//! copies graphs at every step and is meant as a reference. The default
//! builder works in occurrence form: every `<B>` occurrence is its own
//! vertex and `nu(B)` bypasses all occurrences of its barrier at once. Each
//! fragment tracks its in-degree-0 vertices, so construction is linear
//! in the size of the term plus the number of edges created.

use std::collections::HashMap;

use crate::calculus::{ActionLabel, BarrierName, ProcessTerm};

use super::{eliminate_node, prefix_node, union, ControlGraph, CtgError, Node};

/// Largest graph `build_ctg` will transitively reduce (quadratic memory).
pub const MAX_REDUCTION_NODES: usize = 1 << 15;

/// Control graph of `p`, transitively reduced when acyclic.
pub fn build_ctg(p: &ProcessTerm) -> Result<ControlGraph, CtgError> {
    let g = build_ctg_unreduced(p)?;
    if g.len() > MAX_REDUCTION_NODES {
        return Err(CtgError::TooLarge(g.len(), MAX_REDUCTION_NODES));
    }
    Ok(g.transitive_reduction())
}

/// Occurrence-form construction without the final reduction.
///
/// Its transitive closure is the causal order, but edges implied by longer
/// paths may remain.
pub fn build_ctg_unreduced(p: &ProcessTerm) -> Result<ControlGraph, CtgError> {
    let mut b = Builder::default();
    let mut scope = Vec::new();
    b.build(p, &mut scope)?;
    Ok(b.finish())
}

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    alive: Vec<bool>,
    labels: HashMap<ActionLabel, usize>,
    binders: usize,
}

struct Scope {
    name: BarrierName,
    binder: usize,
    occurrences: Vec<usize>,
}

impl Builder {
    fn add(&mut self, n: Node) -> Result<usize, CtgError> {
        let i = self.nodes.len();
        if let Node::Action(a) = &n {
            if self.labels.insert(a.clone(), i).is_some() {
                return Err(CtgError::DuplicateLabel(a.clone()));
            }
        }
        self.nodes.push(n);
        self.succ.push(Vec::new());
        self.pred.push(Vec::new());
        self.alive.push(true);
        Ok(i)
    }

    fn edge(&mut self, u: usize, v: usize) {
        self.succ[u].push(v);
        self.pred[v].push(u);
    }

    /// Returns the in-degree-0 vertices of the fragment built for `p`.
    fn build(&mut self, p: &ProcessTerm, scope: &mut Vec<Scope>) -> Result<Vec<usize>, CtgError> {
        // Walk down the prefix chain, then attach it bottom-up.
        let mut chain = Vec::new();
        let mut cur = p;
        let roots = loop {
            match cur {
                ProcessTerm::Act(a, q) => {
                    chain.push(Node::Action(a.clone()));
                    cur = q;
                }
                ProcessTerm::Sync(b, q) => {
                    let node = match scope.iter().rev().find(|s| &s.name == b) {
                        Some(s) => Node::barrier(b.clone(), s.binder),
                        // Free barrier: never eliminated, so it stays as a deadlock witness.
                        None => Node::barrier(b.clone(), usize::MAX),
                    };
                    chain.push(node);
                    cur = q;
                }
                ProcessTerm::Stop => break Vec::new(),
                ProcessTerm::Par(l, r) => {
                    let mut roots = self.build(l, scope)?;
                    roots.extend(self.build(r, scope)?);
                    break roots;
                }
                ProcessTerm::New(b, body) => {
                    let binder = self.binders;
                    self.binders += 1;
                    scope.push(Scope {
                        name: b.clone(),
                        binder,
                        occurrences: Vec::new(),
                    });
                    let roots = self.build(body, scope)?;
                    let s = scope.pop().expect("scope");
                    break self.eliminate(s, roots);
                }
            }
        };
        let mut roots = roots;
        for node in chain.into_iter().rev() {
            let binder = match &node {
                Node::Barrier { name, binder } => Some((name.clone(), *binder)),
                Node::Action(_) => None,
            };
            let x = self.add(node)?;
            for &r in &roots {
                self.edge(x, r);
            }
            if let Some((name, binder)) = binder {
                if let Some(s) = scope
                    .iter_mut()
                    .rev()
                    .find(|s| s.name == name && s.binder == binder)
                {
                    s.occurrences.push(x);
                }
            }
            roots = vec![x];
        }
        Ok(roots)
    }

    fn eliminate(&mut self, s: Scope, roots: Vec<usize>) -> Vec<usize> {
        if s.occurrences.is_empty() {
            return roots;
        }
        let mut is_occ = vec![false; 0];
        is_occ.resize(self.nodes.len(), false);
        for &o in &s.occurrences {
            is_occ[o] = true;
        }
        let mut preds = Vec::new();
        let mut succs = Vec::new();
        let mut internal = false;
        for &o in &s.occurrences {
            for &p in &self.pred[o] {
                if is_occ[p] {
                    internal = true;
                } else {
                    preds.push(p);
                }
            }
            for &q in &self.succ[o] {
                if is_occ[q] {
                    internal = true;
                } else {
                    succs.push(q);
                }
            }
        }
        preds.sort_unstable();
        preds.dedup();
        succs.sort_unstable();
        succs.dedup();
        // Detach the occurrences.
        for &o in &s.occurrences {
            for p in std::mem::take(&mut self.pred[o]) {
                self.succ[p].retain(|&x| x != o);
            }
            for q in std::mem::take(&mut self.succ[o]) {
                self.pred[q].retain(|&x| x != o);
            }
            self.alive[o] = false;
        }
        for &p in &preds {
            for &q in &succs {
                self.edge(p, q);
            }
        }
        if internal {
            // The barrier precedes itself: keep one vertex with a self-loop.
            let r = self.nodes.len();
            self.nodes.push(Node::barrier(s.name, s.binder));
            self.succ.push(vec![r]);
            self.pred.push(vec![r]);
            self.alive.push(true);
        }
        let mut out: Vec<usize> = roots.into_iter().filter(|&r| !is_occ[r]).collect();
        out.extend(succs.into_iter().filter(|&q| self.pred[q].is_empty()));
        out
    }

    fn finish(self) -> ControlGraph {
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut g = ControlGraph::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if self.alive[i] {
                map[i] = g.add_node(n.clone()).expect("unique vertices");
            }
        }
        for (u, vs) in self.succ.iter().enumerate() {
            if !self.alive[u] {
                continue;
            }
            for &v in vs {
                g.add_edge(map[u], map[v]);
            }
        }
        g
    }
}

/// Direct structural recursion with merged barrier vertices.
///
/// Quadratic; intended for small terms and for cross-checking `build_ctg`.
pub fn build_ctg_literal(p: &ProcessTerm) -> Result<ControlGraph, CtgError> {
    let mut fresh = 0;
    literal(p, &mut Vec::new(), &mut fresh)
}

fn literal(
    p: &ProcessTerm,
    scope: &mut Vec<(BarrierName, usize)>,
    fresh: &mut usize,
) -> Result<ControlGraph, CtgError> {
    match p {
        ProcessTerm::Stop => Ok(ControlGraph::new()),
        ProcessTerm::Act(a, q) => prefix_node(Node::Action(a.clone()), &literal(q, scope, fresh)?),
        ProcessTerm::Sync(b, q) => {
            let binder = scope
                .iter()
                .rev()
                .find(|(n, _)| n == b)
                .map_or(usize::MAX, |(_, k)| *k);
            prefix_node(Node::barrier(b.clone(), binder), &literal(q, scope, fresh)?)
        }
        ProcessTerm::Par(l, r) => Ok(union(&literal(l, scope, fresh)?, &literal(r, scope, fresh)?)),
        ProcessTerm::New(b, body) => {
            let binder = *fresh;
            *fresh += 1;
            scope.push((b.clone(), binder));
            let g = literal(body, scope, fresh);
            scope.pop();
            let g = g?;
            Ok(match g.index_of(&Node::barrier(b.clone(), binder)) {
                Some(v) => eliminate_node(&g, v),
                None => g,
            })
        }
    }
}
