use std::collections::BTreeSet;

use crate::calculus::{ActionLabel, BarrierName, ProcessTerm};

use super::{has_deadlock, ControlGraph, CtgError};

/// A finite poset given by its covering relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    elements: Vec<ActionLabel>,
    covering: BTreeSet<(usize, usize)>,
}

impl Poset {
    /// Checks that `covering` is acyclic and transitively reduced.
    pub fn new(
        elements: Vec<ActionLabel>,
        covering: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, CtgError> {
        let g = ControlGraph::from_edges(elements.iter().cloned(), covering)?;
        to_poset(&g).map_err(|e| match e {
            CtgError::DeadlockedGraph(_) => CtgError::CyclicInput,
            other => other,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ActionLabel] {
        &self.elements
    }

    /// Covering pairs `(smaller, larger)` as element indices.
    pub fn covering(&self) -> &BTreeSet<(usize, usize)> {
        &self.covering
    }

    pub fn covering_labels(&self) -> Vec<(ActionLabel, ActionLabel)> {
        self.covering
            .iter()
            .map(|&(a, b)| (self.elements[a].clone(), self.elements[b].clone()))
            .collect()
    }

    pub fn to_graph(&self) -> ControlGraph {
        ControlGraph::from_edges(self.elements.iter().cloned(), self.covering.iter().copied())
            .expect("poset elements are distinct")
    }
}

/// Read the covering poset off a deadlock-free, reduced control graph.
pub fn to_poset(g: &ControlGraph) -> Result<Poset, CtgError> {
    if has_deadlock(g) {
        return Err(CtgError::DeadlockedGraph(g.residual_barriers()));
    }
    if let Some((u, v)) = g.transitive_edge() {
        return Err(CtgError::NotTransitivelyReduced(
            g.label(u).cloned().expect("action"),
            g.label(v).cloned().expect("action"),
        ));
    }
    Ok(Poset {
        elements: (0..g.len()).map(|i| g.label(i).cloned().expect("action")).collect(),
        covering: g.edges().collect(),
    })
}

fn barrier_for(label: &ActionLabel, i: usize) -> BarrierName {
    let ident = label
        .as_str()
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ident {
        BarrierName::new(format!("B_{label}"))
    } else {
        BarrierName::new(format!("B{i}"))
    }
}

/// A process whose causal order is `u`.
///
/// Each element `x` becomes `<B_x> x.[<B_y1>0 || ... || <B_yk>0]` over its
/// upper covers `y1..yk`; `x` can only fire after every lower cover has
/// reached `B_x`. Elements are emitted in topological order, ties broken
/// by label.
pub fn encode_poset(u: &Poset) -> Result<ProcessTerm, CtgError> {
    let g = u.to_graph();
    let order = {
        let n = g.len();
        let mut indeg: Vec<usize> = (0..n).map(|i| g.pred(i).len()).collect();
        let mut ready: BTreeSet<(&ActionLabel, usize)> = (0..n)
            .filter(|&i| indeg[i] == 0)
            .map(|i| (&u.elements[i], i))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(first) = ready.pop_first() {
            let x = first.1;
            order.push(x);
            for &y in g.succ(x) {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    ready.insert((&u.elements[y], y));
                }
            }
        }
        if order.len() != n {
            return Err(CtgError::CyclicInput);
        }
        order
    };
    let names: Vec<BarrierName> = (0..g.len())
        .map(|i| barrier_for(&u.elements[i], i))
        .collect();
    let threads = order.iter().map(|&x| {
        let tail = ProcessTerm::par_all(
            g.succ(x)
                .iter()
                .map(|&y| ProcessTerm::sync(names[y].clone(), ProcessTerm::Stop)),
        );
        ProcessTerm::sync(
            names[x].clone(),
            ProcessTerm::act(u.elements[x].clone(), tail),
        )
    });
    let body = ProcessTerm::par_all(threads);
    Ok(order
        .iter()
        .rev()
        .fold(body, |p, &x| ProcessTerm::new_barrier(names[x].clone(), p)))
}

/// Whether two posets have the same labelled elements and covering pairs,
/// regardless of element order.
pub fn same_labelled(a: &Poset, b: &Poset) -> bool {
    let mut x = a.covering_labels();
    let mut y = b.covering_labels();
    x.sort();
    y.sort();
    let mut ea = a.elements.clone();
    let mut eb = b.elements.clone();
    ea.sort();
    eb.sort();
    x == y && ea == eb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctlgraph::build_ctg;

    fn labels(v: &[&str]) -> Vec<ActionLabel> {
        v.iter().map(|s| ActionLabel::from(*s)).collect()
    }

    fn round_trip(p: &Poset) -> Poset {
        to_poset(&build_ctg(&encode_poset(p).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn singleton_encoding() {
        let p = Poset::new(labels(&["a"]), []).unwrap();
        assert_eq!(encode_poset(&p).unwrap().to_string(), "nu(B_a) <B_a> a.0");
    }

    #[test]
    fn chain_round_trip() {
        let p = Poset::new(labels(&["a", "b"]), [(0, 1)]).unwrap();
        assert!(same_labelled(&round_trip(&p), &p));
    }

    #[test]
    fn crown_round_trip() {
        // a_i < b_j for i != j
        let el = labels(&["a1", "a2", "a3", "b1", "b2", "b3"]);
        let cov = [(0, 4), (0, 5), (1, 3), (1, 5), (2, 3), (2, 4)];
        let p = Poset::new(el, cov).unwrap();
        assert!(same_labelled(&round_trip(&p), &p));
    }

    #[test]
    fn bipartite_fig1() {
        let el = labels(&["a1", "a2", "b1", "b2"]);
        let g = ControlGraph::from_edges(el, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let p = to_poset(&g).unwrap();
        assert_eq!(p.covering().len(), 4);
    }

    #[test]
    fn empty_and_chain() {
        assert!(to_poset(&ControlGraph::new()).unwrap().is_empty());
        let g = ControlGraph::from_edges(labels(&["a", "b", "c"]), [(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            to_poset(&g).unwrap().covering().iter().copied().collect::<Vec<_>>(),
            vec![(0, 1), (1, 2)]
        );
    }

    #[test]
    fn rejects_bad_relations() {
        assert_eq!(
            Poset::new(labels(&["a", "b"]), [(0, 1), (1, 0)]),
            Err(CtgError::CyclicInput)
        );
        assert!(matches!(
            Poset::new(labels(&["a", "b", "c"]), [(0, 1), (1, 2), (0, 2)]),
            Err(CtgError::NotTransitivelyReduced(..))
        ));
    }
}
