use rand::seq::index;
use rand::seq::SliceRandom;

use crate::calculus::{ActionLabel, BarrierName, ProcessTerm};
use crate::random::RandomSource;

use super::SubclassError;

/// What the main thread does, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MainEvent {
    Act(ActionLabel),
    Spawn(BarrierName),
    Sync(BarrierName),
}

/// `Q` is a run of actions ending in `<B>0`.
fn is_promise_of(q: &ProcessTerm, b: &BarrierName) -> bool {
    let mut t = q;
    loop {
        match t {
            ProcessTerm::Act(_, r) => t = r,
            ProcessTerm::Sync(c, r) => return c == b && matches!(**r, ProcessTerm::Stop),
            _ => return false,
        }
    }
}

/// Main-thread trace when `p` derives from the empty pending set, `None`
/// otherwise. A spawn's two sides may come in either order; bare parallel
/// composition anywhere else is rejected.
pub fn main_thread(p: &ProcessTerm) -> Option<Vec<MainEvent>> {
    let mut pending: Vec<&BarrierName> = Vec::new();
    let mut events = Vec::new();
    let mut t = p;
    loop {
        match t {
            ProcessTerm::Stop => return pending.is_empty().then_some(events),
            ProcessTerm::Act(a, q) => {
                events.push(MainEvent::Act(a.clone()));
                t = q;
            }
            ProcessTerm::Sync(b, q) => {
                let at = pending.iter().position(|&x| x == b)?;
                pending.swap_remove(at);
                events.push(MainEvent::Sync(b.clone()));
                t = q;
            }
            ProcessTerm::New(b, body) => {
                if pending.contains(&b) {
                    return None;
                }
                let ProcessTerm::Par(l, r) = &**body else {
                    return None;
                };
                let main = if is_promise_of(r, b) {
                    l
                } else if is_promise_of(l, b) {
                    r
                } else {
                    return None;
                };
                pending.push(b);
                events.push(MainEvent::Spawn(b.clone()));
                t = main;
            }
            ProcessTerm::Par(..) => return None,
        }
    }
}

/// The promise judgment.
pub fn is_promise_process(p: &ProcessTerm) -> bool {
    main_thread(p).is_some()
}

/// Promise process whose main thread never spawns after its first sync.
pub fn is_arch(p: &ProcessTerm) -> Result<bool, SubclassError> {
    let events = main_thread(p).ok_or(SubclassError::NotPromise)?;
    let first_sync = events.iter().position(|e| matches!(e, MainEvent::Sync(_)));
    let last_spawn = events.iter().rposition(|e| matches!(e, MainEvent::Spawn(_)));
    Ok(match (last_spawn, first_sync) {
        (Some(s), Some(y)) => s < y,
        _ => true,
    })
}

/// Uniform weak composition of `total` into `bins` parts.
fn weak_composition(total: usize, bins: usize, rng: &mut RandomSource) -> Vec<usize> {
    if bins == 0 {
        return Vec::new();
    }
    let mut bars = index::sample(rng, total + bins - 1, bins - 1).into_vec();
    bars.sort_unstable();
    let mut out = Vec::with_capacity(bins);
    let mut prev = 0;
    for (i, &b) in bars.iter().enumerate() {
        out.push(b - i - prev);
        prev = b - i;
    }
    out.push(total - prev);
    out
}

/// A random arch process with `n` actions and `k` promises.
///
/// The main thread spawns promises `P1..Pk` in order, then syncs on them
/// in a uniformly random order. Every promise gets one action; the other
/// `n - k` are spread by a uniform weak composition over the promise bodies
/// and the `2k + 1` gaps of the main thread.
pub fn gen_arch(n: usize, k: usize, rng: &mut RandomSource) -> Result<ProcessTerm, SubclassError> {
    if k > n {
        return Err(SubclassError::InvalidParameters(format!(
            "{k} promises need at least {k} actions, got {n}"
        )));
    }
    let parts = weak_composition(n - k, 3 * k + 1, rng);
    let (bodies, gaps) = parts.split_at(k);
    let mut order: Vec<usize> = (1..=k).collect();
    order.shuffle(rng);

    let mut next_main = 0;
    let mut main_labels = |count: usize| -> Vec<ActionLabel> {
        (0..count)
            .map(|_| {
                next_main += 1;
                ActionLabel::new(format!("m{next_main}"))
            })
            .collect()
    };
    let gap_labels: Vec<Vec<ActionLabel>> = gaps.iter().map(|&g| main_labels(g)).collect();
    let prefix = |labels: &[ActionLabel], tail: ProcessTerm| {
        labels
            .iter()
            .rev()
            .fold(tail, |acc, a| ProcessTerm::act(a.clone(), acc))
    };
    let barrier = |i: usize| BarrierName::new(format!("P{i}"));

    let mut t = prefix(&gap_labels[2 * k], ProcessTerm::Stop);
    for j in (0..k).rev() {
        t = ProcessTerm::sync(barrier(order[j]), t);
        t = prefix(&gap_labels[k + j], t);
    }
    for i in (1..=k).rev() {
        let body: Vec<ActionLabel> = (1..=bodies[i - 1] + 1)
            .map(|j| ActionLabel::new(format!("p{i}_{j}")))
            .collect();
        let promise = prefix(&body, ProcessTerm::sync(barrier(i), ProcessTerm::Stop));
        t = ProcessTerm::new_barrier(barrier(i), ProcessTerm::par(t, promise));
        t = prefix(&gap_labels[i - 1], t);
    }
    Ok(t)
}
