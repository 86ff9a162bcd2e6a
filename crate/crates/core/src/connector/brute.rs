//! Exhaustive reference solver. Shares no code with the exact solver beyond
//! the plan type, so it can serve as its oracle.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{ConnectError, ConnectionPlan};
use crate::model::{Mtkg, TaskId};

/// Largest graph the oracle accepts.
pub const ORACLE_TASK_LIMIT: usize = 20;

/// Tries every subset of non-terminal tasks and keeps the best under the
/// lexicographic objective (coverage, then size, then sorted ids).
pub fn brute_force_connect(
    g: &Mtkg,
    t_spec: &BTreeSet<TaskId>,
) -> Result<ConnectionPlan, ConnectError> {
    if g.task_count() > ORACLE_TASK_LIMIT {
        return Err(ConnectError::OracleSizeLimit {
            tasks: g.task_count(),
            limit: ORACLE_TASK_LIMIT,
        });
    }
    if t_spec.is_empty() {
        return Err(ConnectError::NoTerminals);
    }
    if let Some(t) = t_spec.iter().find(|t| !g.contains_task(t)) {
        return Err(ConnectError::UnknownTask(t.clone()));
    }

    let mut neighbours: BTreeMap<&TaskId, Vec<&TaskId>> = BTreeMap::new();
    for (a, b) in g.edges().keys() {
        neighbours.entry(a).or_default().push(b);
        neighbours.entry(b).or_default().push(a);
    }
    let others: Vec<&TaskId> = g.task_ids().filter(|t| !t_spec.contains(*t)).collect();

    let mut best: Option<(usize, Vec<&TaskId>)> = None;
    for mask in 0u32..(1u32 << others.len()) {
        let chosen: Vec<&TaskId> = others
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, t)| *t)
            .collect();
        let cov = coverage_bfs(&neighbours, t_spec, &chosen);
        let better = match &best {
            None => true,
            Some((bc, bset)) => {
                cov > *bc || (cov == *bc && (chosen.len(), &chosen) < (bset.len(), bset))
            }
        };
        if better {
            best = Some((cov, chosen));
        }
    }

    let (_, chosen) = best.expect("the empty subset is always evaluated");
    let t_add = chosen.into_iter().cloned().collect();
    Ok(ConnectionPlan::from_selection(
        g,
        t_spec.clone(),
        t_add,
        true,
    ))
}

fn coverage_bfs(
    neighbours: &BTreeMap<&TaskId, Vec<&TaskId>>,
    t_spec: &BTreeSet<TaskId>,
    chosen: &[&TaskId],
) -> usize {
    let allowed: BTreeSet<&TaskId> = t_spec.iter().chain(chosen.iter().copied()).collect();
    let mut seen: BTreeSet<&TaskId> = BTreeSet::new();
    let mut best = 0;
    for start in t_spec {
        if seen.contains(start) {
            continue;
        }
        let mut terminals = 0;
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(u) = queue.pop_front() {
            if t_spec.contains(u) {
                terminals += 1;
            }
            for v in neighbours.get(u).into_iter().flatten() {
                if allowed.contains(v) && seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        best = best.max(terminals);
    }
    best
}
