//! Small-step operational semantics and exhaustive execution enumeration.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::term::{ActionLabel, BarrierName, Execution, ProcessTerm};
use super::CalculusError;

/// Cross every `<B>` that is immediately available, stopping at action
/// prefixes and at a rebinding `nu(B)`.
pub fn sync_b(p: &ProcessTerm, b: &BarrierName) -> ProcessTerm {
    match p {
        ProcessTerm::Stop => ProcessTerm::Stop,
        ProcessTerm::Act(..) => p.clone(),
        ProcessTerm::Par(l, r) => ProcessTerm::par(sync_b(l, b), sync_b(r, b)),
        ProcessTerm::New(c, _) if c == b => p.clone(),
        ProcessTerm::New(c, q) => ProcessTerm::New(c.clone(), Box::new(sync_b(q, b))),
        ProcessTerm::Sync(c, q) if c == b => (**q).clone(),
        ProcessTerm::Sync(..) => p.clone(),
    }
}

/// Whether some `<B>` is still reachable in `p` without crossing a rebinding `nu(B)`.
pub fn wait_b(p: &ProcessTerm, b: &BarrierName) -> bool {
    match p {
        ProcessTerm::Stop => false,
        ProcessTerm::Act(_, q) => wait_b(q, b),
        ProcessTerm::Par(l, r) => wait_b(l, b) || wait_b(r, b),
        ProcessTerm::New(c, _) if c == b => false,
        ProcessTerm::New(_, q) => wait_b(q, b),
        ProcessTerm::Sync(c, _) if c == b => true,
        ProcessTerm::Sync(_, q) => wait_b(q, b),
    }
}

/// All one-step derivatives of `p`, leftmost-innermost redex first.
pub fn step(p: &ProcessTerm) -> Vec<(ActionLabel, ProcessTerm)> {
    let mut out = Vec::new();
    step_into(p, &mut out);
    out
}

fn step_into(p: &ProcessTerm, out: &mut Vec<(ActionLabel, ProcessTerm)>) {
    match p {
        ProcessTerm::Stop | ProcessTerm::Sync(..) => {}
        ProcessTerm::Act(a, q) => out.push((a.clone(), (**q).clone())),
        ProcessTerm::Par(l, r) => {
            for (a, l2) in step(l) {
                out.push((a, ProcessTerm::Par(Box::new(l2), r.clone())));
            }
            for (a, r2) in step(r) {
                out.push((a, ProcessTerm::Par(l.clone(), Box::new(r2))));
            }
        }
        ProcessTerm::New(b, body) => {
            let synced = sync_b(body, b);
            if wait_b(&synced, b) {
                // lift: the barrier stays in place
                for (a, body2) in step(body) {
                    out.push((a, ProcessTerm::New(b.clone(), Box::new(body2))));
                }
            } else {
                // sync: every participant has arrived, the binder is discharged
                step_into(&synced, out);
            }
        }
    }
}

/// How barrier crossings relate to action steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum SyncMode {
    /// A barrier whose participants have all arrived is crossed at once, as
    /// a silent move. Equivalent to the printed rules except where crossing
    /// an inner barrier exposes an outer one with no action in between.
    #[default]
    Eager,
    /// The printed rules only: a crossing happens together with an action.
    Strict,
}

/// Cross every barrier that is ready, repeatedly, until none is.
///
/// Crossings only ever enable further crossings, so the result does not
/// depend on the order in which they are performed.
pub fn normalize(p: &ProcessTerm) -> ProcessTerm {
    match p {
        ProcessTerm::Stop | ProcessTerm::Act(..) | ProcessTerm::Sync(..) => p.clone(),
        ProcessTerm::Par(l, r) => ProcessTerm::par(normalize(l), normalize(r)),
        ProcessTerm::New(b, body) => {
            let body = normalize(body);
            let q = sync_b(&body, b);
            if wait_b(&q, b) {
                ProcessTerm::New(b.clone(), Box::new(body))
            } else if q == body {
                // no occurrence left: the binder is inert
                q
            } else {
                normalize(&q)
            }
        }
    }
}

/// Successors of `p` under `mode`; in eager mode states are normalized.
pub fn step_with(p: &ProcessTerm, mode: SyncMode) -> Vec<(ActionLabel, ProcessTerm)> {
    match mode {
        SyncMode::Strict => step(p),
        SyncMode::Eager => step(p).into_iter().map(|(a, q)| (a, normalize(&q))).collect(),
    }
}

fn initial(p: &ProcessTerm, mode: SyncMode) -> ProcessTerm {
    match mode {
        SyncMode::Strict => p.clone(),
        SyncMode::Eager => normalize(p),
    }
}

fn finished(p: &ProcessTerm, mode: SyncMode) -> bool {
    match mode {
        SyncMode::Strict => p.is_terminated(),
        SyncMode::Eager => {
            let mut done = true;
            p.walk(&mut |t| {
                if matches!(t, ProcessTerm::Act(..) | ProcessTerm::Sync(..)) {
                    done = false;
                }
            });
            done
        }
    }
}

/// A maximal run that stopped in a state which is not terminated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadlockWitness {
    pub trace: Execution,
    pub state: ProcessTerm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    /// Complete executions in lexicographic order of label sequence.
    pub executions: Vec<Execution>,
    /// Maximal runs ending in a stuck state (first one found per distinct trace).
    pub deadlocks: Vec<DeadlockWitness>,
}

impl Enumeration {
    pub fn has_deadlock(&self) -> bool {
        !self.deadlocks.is_empty()
    }
}

/// Depth-first exploration of every maximal transition sequence of `p`.
///
/// Fails with `LimitExceeded` as soon as more than `limit` distinct complete
/// executions exist.
pub fn enumerate_executions(p: &ProcessTerm, limit: usize) -> Result<Enumeration, CalculusError> {
    enumerate_executions_with(p, limit, SyncMode::Eager)
}

pub fn enumerate_executions_with(
    p: &ProcessTerm,
    limit: usize,
    mode: SyncMode,
) -> Result<Enumeration, CalculusError> {
    let mut executions = BTreeSet::new();
    let mut deadlocks: Vec<DeadlockWitness> = Vec::new();
    let mut trace = Vec::new();
    let mut search = Search {
        mode,
        executions: &mut executions,
        deadlocks: &mut deadlocks,
        limit,
    };
    search.dfs(&initial(p, mode), &mut trace)?;
    deadlocks.sort_by(|a, b| a.trace.cmp(&b.trace));
    deadlocks.dedup_by(|a, b| a.trace == b.trace);
    Ok(Enumeration {
        executions: executions.into_iter().collect(),
        deadlocks,
    })
}

struct Search<'a> {
    mode: SyncMode,
    executions: &'a mut BTreeSet<Execution>,
    deadlocks: &'a mut Vec<DeadlockWitness>,
    limit: usize,
}

impl Search<'_> {
    fn dfs(&mut self, p: &ProcessTerm, trace: &mut Vec<ActionLabel>) -> Result<(), CalculusError> {
        let next = step_with(p, self.mode);
        if next.is_empty() {
            if finished(p, self.mode) {
                self.executions.insert(Execution(trace.clone()));
                if self.executions.len() > self.limit {
                    return Err(CalculusError::LimitExceeded(self.limit));
                }
            } else {
                self.deadlocks.push(DeadlockWitness {
                    trace: Execution(trace.clone()),
                    state: p.clone(),
                });
            }
            return Ok(());
        }
        for (a, q) in next {
            trace.push(a);
            self.dfs(&q, trace)?;
            trace.pop();
        }
        Ok(())
    }
}

/// Execution count obtained from the state graph, memoized on states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpaceCount {
    pub executions: BigUint,
    pub deadlock_reachable: bool,
    pub states: usize,
}

/// Count complete executions by path counting over the reachable state graph.
///
/// Works for processes whose state space fits in memory even when the number
/// of executions is far too large to enumerate.
pub fn count_state_space(p: &ProcessTerm) -> StateSpaceCount {
    count_state_space_with(p, SyncMode::Eager)
}

pub fn count_state_space_with(p: &ProcessTerm, mode: SyncMode) -> StateSpaceCount {
    let mut memo: HashMap<ProcessTerm, (BigUint, bool)> = HashMap::new();
    let (executions, deadlock_reachable) = count_from(&initial(p, mode), mode, &mut memo);
    StateSpaceCount {
        executions,
        deadlock_reachable,
        states: memo.len(),
    }
}

fn count_from(
    p: &ProcessTerm,
    mode: SyncMode,
    memo: &mut HashMap<ProcessTerm, (BigUint, bool)>,
) -> (BigUint, bool) {
    if let Some(v) = memo.get(p) {
        return v.clone();
    }
    let next = step_with(p, mode);
    let result = if next.is_empty() {
        if finished(p, mode) {
            (BigUint::one(), false)
        } else {
            (BigUint::zero(), true)
        }
    } else {
        let mut total = BigUint::zero();
        let mut dead = false;
        for (_, q) in next {
            let (n, d) = count_from(&q, mode, memo);
            total += n;
            dead |= d;
        }
        (total, dead)
    };
    memo.insert(p.clone(), result.clone());
    result
}
