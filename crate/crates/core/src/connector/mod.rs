//! Choosing auxiliary tasks that connect the requested ones.
//!
//! Connectivity is taken on the undirected view of the graph. The objective
//! is lexicographic: maximise coverage (terminals inside the largest
//! connected component of the subgraph induced by terminals plus additions),
//! then minimise the number of additions, then prefer the lexicographically
//! smallest sorted addition list.

mod brute;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use itertools::Itertools;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{undirected_view, Mtkg, TaskId};

pub use brute::{brute_force_connect, ORACLE_TASK_LIMIT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConnectError {
    #[error("no tasks specified")]
    NoTerminals,
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("oracle size limit: graph has {tasks} tasks, limit is {limit}")]
    OracleSizeLimit { tasks: usize, limit: usize },
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
}

/// Result of the connection step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionPlan {
    pub t_spec: BTreeSet<TaskId>,
    pub t_add: BTreeSet<TaskId>,
    pub coverage: usize,
    /// Connected components of the induced subgraph, each sorted, ordered by
    /// their smallest member.
    pub components: Vec<BTreeSet<TaskId>>,
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConnectionPlan {
    /// Builds a plan for a given selection, computing components and coverage.
    pub fn from_selection(
        g: &Mtkg,
        t_spec: BTreeSet<TaskId>,
        t_add: BTreeSet<TaskId>,
        exact: bool,
    ) -> Self {
        let nodes: BTreeSet<TaskId> = t_spec.union(&t_add).cloned().collect();
        let components = induced_components(g, &nodes);
        let coverage = components
            .iter()
            .map(|c| c.intersection(&t_spec).count())
            .max()
            .unwrap_or(0);
        ConnectionPlan {
            t_spec,
            t_add,
            coverage,
            components,
            exact,
            note: None,
        }
    }

    pub fn nodes(&self) -> BTreeSet<TaskId> {
        self.t_spec.union(&self.t_add).cloned().collect()
    }

    /// The component holding the most terminals; the first such on ties.
    pub fn main_component(&self) -> Option<&BTreeSet<TaskId>> {
        self.components
            .iter()
            .rev()
            .max_by_key(|c| c.intersection(&self.t_spec).count())
    }

    /// Terminals outside [`ConnectionPlan::main_component`].
    pub fn disconnected_terminals(&self) -> BTreeSet<TaskId> {
        match self.main_component() {
            Some(main) => self.t_spec.difference(main).cloned().collect(),
            None => BTreeSet::new(),
        }
    }

    /// Checks the plan against `g`: membership, disjointness and that the
    /// stored components and coverage match a recomputation.
    pub fn check(&self, g: &Mtkg) -> Result<(), ConnectError> {
        if self.t_spec.is_empty() {
            return Err(ConnectError::NoTerminals);
        }
        for t in self.t_spec.iter().chain(&self.t_add) {
            if !g.contains_task(t) {
                return Err(ConnectError::UnknownTask(t.clone()));
            }
        }
        if let Some(t) = self.t_spec.intersection(&self.t_add).next() {
            return Err(ConnectError::InvalidPlan(format!(
                "{t} is both specified and added"
            )));
        }
        let fresh =
            ConnectionPlan::from_selection(g, self.t_spec.clone(), self.t_add.clone(), self.exact);
        if fresh.components != self.components {
            return Err(ConnectError::InvalidPlan(
                "components do not match the graph".into(),
            ));
        }
        if fresh.coverage != self.coverage {
            return Err(ConnectError::InvalidPlan(format!(
                "coverage {} does not match recomputed {}",
                self.coverage, fresh.coverage
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ConnectionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "add: {}", join_ids(&self.t_add))?;
        writeln!(f, "coverage: {}/{}", self.coverage, self.t_spec.len())?;
        writeln!(f, "exact: {}", self.exact)?;
        for (i, c) in self.components.iter().enumerate() {
            writeln!(f, "component {}: {}", i + 1, join_ids(c))?;
        }
        if let Some(note) = &self.note {
            writeln!(f, "note: {note}")?;
        }
        Ok(())
    }
}

pub(crate) fn join_ids<'a>(ids: impl IntoIterator<Item = &'a TaskId>) -> String {
    let s = ids.into_iter().join(",");
    if s.is_empty() {
        "(none)".to_string()
    } else {
        s
    }
}

/// Components of the undirected subgraph induced by `nodes`.
pub fn induced_components(g: &Mtkg, nodes: &BTreeSet<TaskId>) -> Vec<BTreeSet<TaskId>> {
    let index = TaskIndex::new(g);
    let mut included = vec![false; index.len()];
    for t in nodes {
        if let Some(&i) = index.pos.get(t) {
            included[i] = true;
        }
    }
    index
        .components(&included)
        .into_iter()
        .map(|c| c.into_iter().map(|i| index.ids[i].clone()).collect())
        .collect()
}

/// Dense indexing of tasks (sorted, so index order is id order) with the
/// undirected adjacency.
pub(crate) struct TaskIndex {
    pub ids: Vec<TaskId>,
    pub pos: BTreeMap<TaskId, usize>,
    pub adj: Vec<Vec<usize>>,
}

impl TaskIndex {
    pub fn new(g: &Mtkg) -> Self {
        let ids: Vec<TaskId> = g.task_ids().cloned().collect();
        let pos: BTreeMap<TaskId, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for (a, b) in undirected_view(g) {
            if let (Some(&i), Some(&j)) = (pos.get(&a), pos.get(&b)) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        TaskIndex { ids, pos, adj }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    fn union_find(&self, included: &[bool]) -> UnionFind<usize> {
        let mut uf = UnionFind::new(self.len());
        for (i, nbrs) in self.adj.iter().enumerate() {
            if !included[i] {
                continue;
            }
            for &j in nbrs {
                if j > i && included[j] {
                    uf.union(i, j);
                }
            }
        }
        uf
    }

    /// Components among included nodes, each ascending, ordered by first node.
    pub fn components(&self, included: &[bool]) -> Vec<Vec<usize>> {
        let uf = self.union_find(included);
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in (0..self.len()).filter(|&i| included[i]) {
            groups.entry(uf.find(i)).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort_by_key(|c| c[0]);
        out
    }

    /// Largest number of terminals sharing one component.
    pub fn coverage(&self, included: &[bool], terminals: &[usize]) -> usize {
        let uf = self.union_find(included);
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &t in terminals {
            *counts.entry(uf.find(t)).or_default() += 1;
        }
        counts.into_values().max().unwrap_or(0)
    }
}

fn resolve_terminals(
    g: &Mtkg,
    index: &TaskIndex,
    t_spec: &BTreeSet<TaskId>,
) -> Result<Vec<usize>, ConnectError> {
    if t_spec.is_empty() {
        return Err(ConnectError::NoTerminals);
    }
    t_spec
        .iter()
        .map(|t| {
            if g.contains_task(t) {
                Ok(index.pos[t])
            } else {
                Err(ConnectError::UnknownTask(t.clone()))
            }
        })
        .collect()
}

/// Non-terminals that can belong to some minimal optimal selection.
///
/// Keeps only nodes in components holding at least two terminals, then
/// repeatedly drops non-terminals with at most one remaining neighbour: such
/// a node never joins two parts, so no minimal selection contains it.
fn candidate_pool(index: &TaskIndex, terminals: &[usize]) -> Vec<usize> {
    let n = index.len();
    let mut is_terminal = vec![false; n];
    for &t in terminals {
        is_terminal[t] = true;
    }
    let mut alive = vec![false; n];
    for comp in index.components(&vec![true; n]) {
        if comp.iter().filter(|&&i| is_terminal[i]).count() >= 2 {
            for i in comp {
                alive[i] = true;
            }
        }
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            if alive[i] && !is_terminal[i] {
                let degree = index.adj[i].iter().filter(|&&j| alive[j]).count();
                if degree <= 1 {
                    alive[i] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&i| alive[i] && !is_terminal[i]).collect()
}

/// Lexicographically optimal connection plan.
///
/// Iterative deepening over the number of additions; within one size,
/// candidate subsets are visited in lexicographic order, so the first subset
/// reaching a coverage level is the tie-break winner for that size. Stops at
/// the highest coverage attainable in the whole graph or at `budget`.
/// Exponential in the number of additions.
pub fn connect_exact(
    g: &Mtkg,
    t_spec: &BTreeSet<TaskId>,
    budget: Option<usize>,
) -> Result<ConnectionPlan, ConnectError> {
    let index = TaskIndex::new(g);
    let terminals = resolve_terminals(g, &index, t_spec)?;
    let n = index.len();

    let attainable = index.coverage(&vec![true; n], &terminals);
    let pool = candidate_pool(&index, &terminals);

    let mut included = vec![false; n];
    for &t in &terminals {
        included[t] = true;
    }
    let mut best_cov = index.coverage(&included, &terminals);
    let mut best: Vec<usize> = Vec::new();

    let limit = budget.unwrap_or(usize::MAX).min(pool.len());
    let mut k = 0;
    while best_cov < attainable && k < limit {
        k += 1;
        let mut level: Option<(usize, Vec<usize>)> = None;
        for combo in pool.iter().copied().combinations(k) {
            for &i in &combo {
                included[i] = true;
            }
            let cov = index.coverage(&included, &terminals);
            for &i in &combo {
                included[i] = false;
            }
            if level.as_ref().is_none_or(|(c, _)| cov > *c) {
                let done = cov == attainable;
                level = Some((cov, combo));
                if done {
                    break;
                }
            }
        }
        if let Some((cov, combo)) = level {
            if cov > best_cov {
                best_cov = cov;
                best = combo;
            }
        }
    }

    let t_add = best.iter().map(|&i| index.ids[i].clone()).collect();
    let mut plan = ConnectionPlan::from_selection(g, t_spec.clone(), t_add, true);
    debug_assert_eq!(plan.coverage, best_cov);
    if best_cov < attainable {
        plan.note = Some(format!(
            "budget of {} addition(s) reached before attainable coverage {attainable}",
            budget.unwrap_or(0)
        ));
    } else if attainable < t_spec.len() {
        plan.note = Some(format!(
            "at most {attainable} of {} terminals can be connected in this graph",
            t_spec.len()
        ));
    }
    Ok(plan)
}

/// Heuristic plan: repeatedly join the pair of terminal components whose
/// connecting path needs the fewest new tasks.
pub fn connect_greedy(g: &Mtkg, t_spec: &BTreeSet<TaskId>) -> Result<ConnectionPlan, ConnectError> {
    let index = TaskIndex::new(g);
    let terminals = resolve_terminals(g, &index, t_spec)?;
    let n = index.len();
    let mut selected = vec![false; n];
    for &t in &terminals {
        selected[t] = true;
    }
    let mut is_terminal = vec![false; n];
    for &t in &terminals {
        is_terminal[t] = true;
    }

    loop {
        let comps: Vec<Vec<usize>> = index
            .components(&selected)
            .into_iter()
            .filter(|c| c.iter().any(|&i| is_terminal[i]))
            .collect();
        if comps.len() < 2 {
            break;
        }
        let mut comp_of = vec![usize::MAX; n];
        for (ci, c) in comps.iter().enumerate() {
            for &i in c {
                comp_of[i] = ci;
            }
        }
        // (cost, added ids, source component, target component)
        let mut best: Option<(usize, Vec<usize>, usize, usize)> = None;
        for (ci, comp) in comps.iter().enumerate() {
            let (dist, parent) = cheapest_paths(&index, &selected, comp);
            for (cj, target) in comps.iter().enumerate().skip(ci + 1) {
                let Some(&end) = target
                    .iter()
                    .filter(|&&t| dist[t] != usize::MAX)
                    .min_by_key(|&&t| (dist[t], t))
                else {
                    continue;
                };
                let mut added = Vec::new();
                let mut cur = end;
                while comp_of[cur] != ci {
                    if !selected[cur] {
                        added.push(cur);
                    }
                    cur = parent[cur];
                }
                added.sort_unstable();
                let candidate = (dist[end], added, ci, cj);
                if best.as_ref().is_none_or(|b| candidate < *b) {
                    best = Some(candidate);
                }
            }
        }
        match best {
            Some((_, added, _, _)) if !added.is_empty() => {
                for i in added {
                    selected[i] = true;
                }
            }
            _ => break,
        }
    }

    let t_add = (0..n)
        .filter(|&i| selected[i] && !is_terminal[i])
        .map(|i| index.ids[i].clone())
        .collect();
    Ok(ConnectionPlan::from_selection(
        g,
        t_spec.clone(),
        t_add,
        false,
    ))
}

/// Dijkstra from a component where entering an unselected node costs 1 and a
/// selected node costs 0. Ties resolve toward smaller node indices.
fn cheapest_paths(
    index: &TaskIndex,
    selected: &[bool],
    source: &[usize],
) -> (Vec<usize>, Vec<usize>) {
    let n = index.len();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for &s in source {
        dist[s] = 0;
        heap.push(Reverse((0usize, s)));
    }
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &v in &index.adj[u] {
            let nd = d + usize::from(!selected[v]);
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = u;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    (dist, parent)
}
