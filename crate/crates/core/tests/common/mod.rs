//! Shared corpora and helpers for the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use bsync::calculus::{ActionLabel, BarrierName, ProcessTerm};
use bsync::ctlgraph::{parse_edge_list, ControlGraph, Node};
use bsync::random::RandomSource;
use rand::Rng;

pub const EXAMPLE1: &str = "x1 -> x2\nx2 -> x3\nx2 -> x4\nx3 -> x5\nx3 -> x6\n\
    x4 -> x5\nx4 -> x6\nx4 -> x7\nx5 -> x8\nx6 -> x8\nx7 -> x8\n";

pub fn example1() -> ControlGraph {
    parse_edge_list(EXAMPLE1).unwrap()
}

pub fn fig5() -> ControlGraph {
    parse_edge_list("1 -> 2\n3\n").unwrap()
}

/// Crown on 3+3 elements: a_i below b_j exactly when i != j.
pub fn crown() -> ControlGraph {
    parse_edge_list(
        "a1 -> b2\na1 -> b3\na2 -> b1\na2 -> b3\na3 -> b1\na3 -> b2\n",
    )
    .unwrap()
}

pub fn sys_text() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/samples/fig2_sys.bsp")).unwrap()
}

/// Every term of the given weight (one unit per action, sync, parallel
/// composition and binder), with at most two nested binders. Actions are
/// placeholders; `label_actions` names them.
fn shapes(w: usize, depth: usize, memo: &mut HashMap<(usize, usize), Vec<ProcessTerm>>) -> Vec<ProcessTerm> {
    if let Some(v) = memo.get(&(w, depth)) {
        return v.clone();
    }
    let mut out = Vec::new();
    if w == 0 {
        out.push(ProcessTerm::Stop);
    } else {
        for q in shapes(w - 1, depth, memo) {
            out.push(ProcessTerm::act("_", q.clone()));
            for d in 0..depth {
                out.push(ProcessTerm::sync(format!("B{d}").as_str(), q.clone()));
            }
        }
        if depth < 2 {
            for q in shapes(w - 1, depth + 1, memo) {
                out.push(ProcessTerm::new_barrier(format!("B{depth}").as_str(), q));
            }
        }
        for wl in 1..w - 1 {
            let ls = shapes(wl, depth, memo);
            let rs = shapes(w - 1 - wl, depth, memo);
            for l in &ls {
                for r in &rs {
                    out.push(ProcessTerm::par(l.clone(), r.clone()));
                }
            }
        }
    }
    memo.insert((w, depth), out.clone());
    out
}

/// Rename placeholder actions to a1, a2, ... in syntactic order.
pub fn label_actions(p: &ProcessTerm) -> ProcessTerm {
    fn go(p: &ProcessTerm, k: &mut usize) -> ProcessTerm {
        match p {
            ProcessTerm::Stop => ProcessTerm::Stop,
            ProcessTerm::Act(_, q) => {
                *k += 1;
                let l = ActionLabel::new(format!("a{k}"));
                ProcessTerm::Act(l, Box::new(go(q, k)))
            }
            ProcessTerm::Sync(b, q) => ProcessTerm::Sync(b.clone(), Box::new(go(q, k))),
            ProcessTerm::New(b, q) => ProcessTerm::New(b.clone(), Box::new(go(q, k))),
            ProcessTerm::Par(l, r) => {
                let l = go(l, k);
                ProcessTerm::par(l, go(r, k))
            }
        }
    }
    go(p, &mut 0)
}

fn binders(p: &ProcessTerm) -> usize {
    let mut n = 0;
    p.walk(&mut |t| {
        if matches!(t, ProcessTerm::New(..)) {
            n += 1;
        }
    });
    n
}

/// Exhaustive corpus: all terms up to `max_weight` with at most
/// `max_actions` actions and two binders.
pub fn exhaustive_corpus(max_weight: usize, max_actions: usize) -> Vec<ProcessTerm> {
    let mut memo = HashMap::new();
    let mut out = Vec::new();
    for w in 0..=max_weight {
        for s in shapes(w, 0, &mut memo) {
            if s.size() <= max_actions && binders(&s) <= 2 {
                out.push(label_actions(&s));
            }
        }
    }
    out
}

/// A random well-scoped term with `actions` actions and up to `barriers`
/// binders; barrier waits are sprinkled at random in scope.
pub fn random_term(rng: &mut RandomSource, actions: usize, barriers: usize) -> ProcessTerm {
    fn go(
        rng: &mut RandomSource,
        actions: usize,
        scope: &mut Vec<BarrierName>,
        budget: &mut usize,
        fresh: &mut usize,
    ) -> ProcessTerm {
        // Optionally open a binder here.
        if *budget > 0 && rng.gen_bool(0.3) {
            *budget -= 1;
            let b = BarrierName::new(format!("B{fresh}"));
            *fresh += 1;
            scope.push(b.clone());
            let body = go(rng, actions, scope, budget, fresh);
            scope.pop();
            return ProcessTerm::New(b, Box::new(body));
        }
        if actions >= 2 && rng.gen_bool(0.45) {
            let l = rng.gen_range(1..actions);
            let left = go(rng, l, scope, budget, fresh);
            let right = go(rng, actions - l, scope, budget, fresh);
            return ProcessTerm::par(left, right);
        }
        let mut p = if actions <= 1 {
            ProcessTerm::Stop
        } else {
            go(rng, actions - 1, scope, budget, fresh)
        };
        if !scope.is_empty() && rng.gen_bool(0.5) {
            let b = scope[rng.gen_range(0..scope.len())].clone();
            p = ProcessTerm::Sync(b, Box::new(p));
        }
        if actions >= 1 {
            p = ProcessTerm::act("_", p);
        }
        if !scope.is_empty() && rng.gen_bool(0.4) {
            let b = scope[rng.gen_range(0..scope.len())].clone();
            p = ProcessTerm::Sync(b, Box::new(p));
        }
        p
    }
    let mut budget = barriers;
    let t = go(rng, actions, &mut Vec::new(), &mut budget, &mut 0);
    label_actions(&t)
}

/// Random DAG on `v1..vn`: each pair `i < j` is an edge with probability `p`.
pub fn random_dag(rng: &mut RandomSource, n: usize, p: f64) -> ControlGraph {
    let mut g = ControlGraph::new();
    for i in 1..=n {
        g.add_node(Node::action(format!("v{i}"))).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// Run `f` on a thread with a stack big enough for very deep terms.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(f)
        .unwrap()
        .join()
        .unwrap()
}
