use std::collections::{BTreeSet, HashMap};

use super::term::{ActionLabel, BarrierName, ProcessTerm};
use super::CalculusError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Rewrite repeated labels to `name#k` instead of failing.
    pub auto_rename: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// The validated term; differs from the input only when labels were renamed.
    pub term: ProcessTerm,
    pub labels: BTreeSet<ActionLabel>,
    /// Labels that occurred more than once (renamed when `auto_rename` is set).
    pub duplicates: Vec<ActionLabel>,
    /// Barriers bound by some `nu` but never waited on inside its scope.
    pub unused_barriers: Vec<BarrierName>,
}

/// Check label uniqueness and barrier scoping with default options.
pub fn validate(p: &ProcessTerm) -> Result<ValidationReport, CalculusError> {
    validate_with(p, ValidationOptions::default())
}

pub fn validate_with(
    p: &ProcessTerm,
    opts: ValidationOptions,
) -> Result<ValidationReport, CalculusError> {
    // Scoping and unused binders.
    let mut unused = Vec::new();
    check_scope(p, &mut Vec::new(), &mut unused)?;

    // Label uniqueness.
    let mut seen: HashMap<ActionLabel, usize> = HashMap::new();
    let mut duplicates = Vec::new();
    for l in p.labels() {
        let n = seen.entry(l.clone()).or_insert(0);
        *n += 1;
        if *n == 2 {
            duplicates.push(l);
        }
    }
    let term = if duplicates.is_empty() {
        p.clone()
    } else if opts.auto_rename {
        rename_duplicates(p, &seen)
    } else {
        return Err(CalculusError::DuplicateLabel(duplicates[0].clone()));
    };
    Ok(ValidationReport {
        labels: term.labels().into_iter().collect(),
        term,
        duplicates,
        unused_barriers: unused,
    })
}

// Scope entries: (barrier, used?)
fn check_scope(
    p: &ProcessTerm,
    scope: &mut Vec<(BarrierName, bool)>,
    unused: &mut Vec<BarrierName>,
) -> Result<(), CalculusError> {
    let mut cur = p;
    loop {
        match cur {
            ProcessTerm::Stop => return Ok(()),
            ProcessTerm::Act(_, q) => cur = q,
            ProcessTerm::Sync(b, q) => {
                match scope.iter_mut().rev().find(|(n, _)| n == b) {
                    Some(entry) => entry.1 = true,
                    None => return Err(CalculusError::UnboundBarrier(b.clone())),
                }
                cur = q;
            }
            ProcessTerm::New(b, q) => {
                scope.push((b.clone(), false));
                let r = check_scope(q, scope, unused);
                let (name, used) = scope.pop().expect("scope entry");
                r?;
                if !used {
                    unused.push(name);
                }
                return Ok(());
            }
            ProcessTerm::Par(l, r) => {
                check_scope(l, scope, unused)?;
                cur = r;
            }
        }
    }
}

fn rename_duplicates(p: &ProcessTerm, counts: &HashMap<ActionLabel, usize>) -> ProcessTerm {
    let taken: BTreeSet<String> = counts.keys().map(|l| l.as_str().to_owned()).collect();
    let mut next: HashMap<ActionLabel, usize> = HashMap::new();
    let mut fresh = |l: &ActionLabel| -> ActionLabel {
        if counts[l] < 2 {
            return l.clone();
        }
        let k = next.entry(l.clone()).or_insert(0);
        *k += 1;
        if *k == 1 {
            return l.clone();
        }
        loop {
            let candidate = format!("{}#{}", l, k);
            if !taken.contains(&candidate) {
                return ActionLabel::new(candidate);
            }
            *k += 1;
        }
    };
    map_labels(p, &mut fresh)
}

/// Rebuild `p` with every action label passed through `f`, in syntactic order.
fn map_labels(p: &ProcessTerm, f: &mut impl FnMut(&ActionLabel) -> ActionLabel) -> ProcessTerm {
    // Sequential prefixes are rebuilt iteratively.
    let mut chain = Vec::new();
    let mut cur = p;
    let tail = loop {
        match cur {
            ProcessTerm::Act(a, q) => {
                chain.push(ProcessTerm::Act(f(a), Box::new(ProcessTerm::Stop)));
                cur = q;
            }
            ProcessTerm::Sync(b, q) => {
                chain.push(ProcessTerm::Sync(b.clone(), Box::new(ProcessTerm::Stop)));
                cur = q;
            }
            ProcessTerm::New(b, q) => {
                chain.push(ProcessTerm::New(b.clone(), Box::new(ProcessTerm::Stop)));
                cur = q;
            }
            ProcessTerm::Stop => break ProcessTerm::Stop,
            ProcessTerm::Par(l, r) => {
                let l2 = map_labels(l, f);
                break ProcessTerm::par(l2, map_labels(r, f));
            }
        }
    };
    chain.into_iter().rev().fold(tail, |acc, node| match node {
        ProcessTerm::Act(a, _) => ProcessTerm::Act(a, Box::new(acc)),
        ProcessTerm::Sync(b, _) => ProcessTerm::Sync(b, Box::new(acc)),
        ProcessTerm::New(b, _) => ProcessTerm::New(b, Box::new(acc)),
        _ => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::parse_process;

    #[test]
    fn duplicate_label_rejected() {
        let p = parse_process("a.0 || a.0").unwrap();
        assert_eq!(
            validate(&p),
            Err(CalculusError::DuplicateLabel(ActionLabel::from("a")))
        );
    }

    #[test]
    fn unbound_barrier_rejected() {
        let p = parse_process("<B>0").unwrap();
        assert_eq!(
            validate(&p),
            Err(CalculusError::UnboundBarrier(BarrierName::from("B")))
        );
        // scope ends at the binder
        let p = parse_process("(nu(B) <B>0) || <B>0").unwrap();
        assert!(validate(&p).is_err());
    }

    #[test]
    fn intro_validates() {
        let p = parse_process("nu(B) [a1.<B> a2.0 || <B> b1.0 || c1.<B> 0]").unwrap();
        let r = validate(&p).unwrap();
        let labels: Vec<_> = r.labels.iter().map(|l| l.to_string()).collect();
        assert_eq!(labels, ["a1", "a2", "b1", "c1"]);
        assert!(r.unused_barriers.is_empty());
    }

    #[test]
    fn unused_barrier_reported() {
        let p = parse_process("nu(B) nu(C) <C> a.0").unwrap();
        let r = validate(&p).unwrap();
        assert_eq!(r.unused_barriers, vec![BarrierName::from("B")]);
    }

    #[test]
    fn auto_rename() {
        let p = parse_process("a.a.0 || a.b.0").unwrap();
        let r = validate_with(&p, ValidationOptions { auto_rename: true }).unwrap();
        assert_eq!(r.term.to_string(), "a.a#2.0 || a#3.b.0");
        assert_eq!(r.duplicates, vec![ActionLabel::from("a")]);
        assert_eq!(r.labels.len(), 4);
    }
}
