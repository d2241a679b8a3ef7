use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;

use crate::ctlgraph::ControlGraph;

/// Mutable DAG the rules consume. Kept transitively reduced throughout.
#[derive(Debug, Clone)]
pub(super) struct Work {
    pub succ: Vec<BTreeSet<usize>>,
    pub pred: Vec<BTreeSet<usize>>,
    pub alive: Vec<bool>,
    pub remaining: usize,
    /// Position of every vertex in some topological order of the current graph.
    topo: Vec<usize>,
}

impl Work {
    /// `g` must be acyclic and transitively reduced.
    pub fn new(g: &ControlGraph) -> Self {
        let n = g.len();
        let mut w = Work {
            succ: (0..n).map(|i| g.succ(i).iter().copied().collect()).collect(),
            pred: (0..n).map(|i| g.pred(i).iter().copied().collect()).collect(),
            alive: vec![true; n],
            remaining: n,
            topo: vec![0; n],
        };
        w.retopo();
        w
    }

    pub fn live(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.alive.len()).filter(|&i| self.alive[i])
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.succ[v].is_empty() && self.pred[v].is_empty()
    }

    fn retopo(&mut self) {
        let n = self.alive.len();
        let mut indeg: Vec<usize> = (0..n).map(|i| self.pred[i].len()).collect();
        let mut stack: Vec<usize> = self.live().filter(|&i| indeg[i] == 0).collect();
        let mut k = 0;
        while let Some(u) = stack.pop() {
            self.topo[u] = k;
            k += 1;
            for &v in &self.succ[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    stack.push(v);
                }
            }
        }
        debug_assert_eq!(k, self.remaining);
    }

    fn detach(&mut self, v: usize) {
        for s in std::mem::take(&mut self.succ[v]) {
            self.pred[s].remove(&v);
        }
        for p in std::mem::take(&mut self.pred[v]) {
            self.succ[p].remove(&v);
        }
        self.alive[v] = false;
        self.remaining -= 1;
    }

    /// Path `x ⇝ z`, pruned by topological position.
    pub fn reaches(&self, x: usize, z: usize) -> bool {
        let limit = self.topo[z];
        let mut seen = BTreeSet::new();
        let mut stack = vec![x];
        while let Some(u) = stack.pop() {
            for &v in &self.succ[u] {
                if v == z {
                    return true;
                }
                if self.topo[v] < limit && seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        false
    }

    pub fn remove_leaf(&mut self, v: usize) {
        self.detach(v);
    }

    /// Remove `y` with single predecessor `x` and single successor `z`,
    /// keeping the order `x < z`.
    pub fn remove_intermediate(&mut self, y: usize) -> (usize, usize) {
        let x = *self.pred[y].first().expect("one predecessor");
        let z = *self.succ[y].first().expect("one successor");
        self.detach(y);
        if !self.reaches(x, z) {
            self.succ[x].insert(z);
            self.pred[z].insert(x);
        }
        (x, z)
    }

    fn closure(&self, start: usize, forward: bool) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            let next = if forward { &self.succ[u] } else { &self.pred[u] };
            for &v in next {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Add `x -> y` for incomparable `x`, `y` and drop the edges it makes redundant.
    pub fn add_order(&mut self, x: usize, y: usize) {
        let up = self.closure(x, false);
        let down = self.closure(y, true);
        for &u in &up {
            let doomed: Vec<usize> = self.succ[u].intersection(&down).copied().collect();
            for v in doomed {
                self.succ[u].remove(&v);
                self.pred[v].remove(&u);
            }
        }
        self.succ[x].insert(y);
        self.pred[y].insert(x);
        self.retopo();
    }

    /// Incomparable pairs `(x, y)` with `x < y`. Isolated vertices only
    /// take part when `with_isolated` is set.
    pub fn incomparable_pairs(&self, with_isolated: bool) -> Vec<(usize, usize)> {
        let n = self.alive.len();
        let mut order: Vec<usize> = self.live().collect();
        order.sort_by_key(|&v| std::cmp::Reverse(self.topo[v]));
        let mut down = vec![FixedBitSet::with_capacity(n); n];
        for &u in &order {
            let mut set = FixedBitSet::with_capacity(n);
            set.insert(u);
            for &v in &self.succ[u] {
                set.union_with(&down[v]);
            }
            down[u] = set;
        }
        let busy: Vec<usize> = self
            .live()
            .filter(|&v| with_isolated || !self.is_isolated(v))
            .collect();
        let mut out = Vec::new();
        for (i, &x) in busy.iter().enumerate() {
            for &y in &busy[i + 1..] {
                if !down[x].contains(y) && !down[y].contains(x) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn shared_neighbours(&self, x: usize, y: usize) -> usize {
        self.succ[x].intersection(&self.succ[y]).count()
            + self.pred[x].intersection(&self.pred[y]).count()
    }
}
