use std::collections::HashMap;
use std::fmt::Write;

use crate::calculus::ActionLabel;

use super::{ControlGraph, CtgError, Node};

fn sorted_ids(g: &ControlGraph) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..g.len()).collect();
    ids.sort_by(|&a, &b| g.node(a).cmp(g.node(b)));
    ids
}

fn dot_id(n: &Node) -> String {
    match n {
        Node::Action(a) => format!("\"{}\"", a.as_str().replace('"', "\\\"")),
        Node::Barrier { name, binder } if *binder == usize::MAX => format!("\"<{name}>\""),
        Node::Barrier { name, binder } => format!("\"<{name}>#{binder}\""),
    }
}

/// Graphviz rendering: actions as ellipses, residual barriers as boxes.
pub fn to_dot(g: &ControlGraph) -> String {
    let ids = sorted_ids(g);
    let mut out = String::from("digraph ctg {\n");
    for &i in &ids {
        let n = g.node(i);
        match n {
            Node::Action(_) => writeln!(out, "  {} [shape=ellipse];", dot_id(n)),
            Node::Barrier { name, .. } => {
                writeln!(out, "  {} [shape=box, label=\"{name}\"];", dot_id(n))
            }
        }
        .unwrap();
    }
    for &u in &ids {
        let mut succ: Vec<usize> = g.succ(u).to_vec();
        succ.sort_by(|&a, &b| g.node(a).cmp(g.node(b)));
        for v in succ {
            writeln!(out, "  {} -> {};", dot_id(g.node(u)), dot_id(g.node(v))).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// One `u -> v` line per edge, then one line per isolated vertex.
pub fn to_edge_list(g: &ControlGraph) -> String {
    let ids = sorted_ids(g);
    let mut out = String::new();
    for &u in &ids {
        let mut succ: Vec<usize> = g.succ(u).to_vec();
        succ.sort_by(|&a, &b| g.node(a).cmp(g.node(b)));
        for v in succ {
            writeln!(out, "{} -> {}", g.node(u), g.node(v)).unwrap();
        }
    }
    for &u in &ids {
        if g.succ(u).is_empty() && g.pred(u).is_empty() {
            writeln!(out, "{}", g.node(u)).unwrap();
        }
    }
    out
}

/// Parse the `u -> v` format. A bare name declares a vertex; `#` starts a
/// comment. Vertices are numbered in order of first appearance.
pub fn parse_edge_list(text: &str) -> Result<ControlGraph, CtgError> {
    let mut g = ControlGraph::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut vertex = |g: &mut ControlGraph, name: &str, line: usize| -> Result<usize, CtgError> {
        if name.is_empty() || name.chars().any(char::is_whitespace) || name.contains("->") {
            return Err(CtgError::Format {
                line,
                message: format!("bad vertex name `{name}`"),
            });
        }
        if let Some(&i) = ids.get(name) {
            return Ok(i);
        }
        let i = g.add_node(Node::Action(ActionLabel::new(name)))?;
        ids.insert(name.to_owned(), i);
        Ok(i)
    };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match content.split_once("->") {
            Some((u, v)) => {
                let u = vertex(&mut g, u.trim(), line)?;
                let v = vertex(&mut g, v.trim(), line)?;
                g.add_edge(u, v);
            }
            None => {
                vertex(&mut g, content, line)?;
            }
        }
    }
    Ok(g)
}
