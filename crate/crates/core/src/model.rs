//! The multi-task knowledge graph: tasks as nodes, directed transfer edges
//! weighted by how many published methods used the transfer and how many of
//! those shared encoder or decoder parameters.
//!
//! A bi-directional relation is two directed edges, each with its own
//! weights. All maps are ordered, so iteration is lexicographic by task id.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a task. Non-empty, no whitespace, case-sensitive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TaskId(String);

impl TaskId {
    pub fn new(value: impl Into<String>) -> Result<Self, ModelError> {
        let value = value.into();
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            return Err(ModelError::InvalidTaskId(value));
        }
        Ok(TaskId(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TaskId {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        TaskId::new(value)
    }
}

impl From<TaskId> for String {
    fn from(id: TaskId) -> Self {
        id.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for TaskId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskId::new(s)
    }
}

/// Display metadata attached to a task.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInfo {
    pub id: TaskId,
    pub display_name: String,
    pub domain_tags: BTreeSet<String>,
}

impl TaskInfo {
    /// Metadata with the id doubling as display name and no tags.
    pub fn bare(id: TaskId) -> Self {
        TaskInfo {
            display_name: id.to_string(),
            id,
            domain_tags: BTreeSet::new(),
        }
    }
}

/// Method counts carried by one directed edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeWeights {
    /// Methods that performed the transfer.
    pub w_trans: u32,
    /// Methods among those that shared encoder parameters.
    pub w_share_e: u32,
    /// Methods among those that shared decoder parameters.
    pub w_share_d: u32,
}

impl EdgeWeights {
    pub const fn new(w_trans: u32, w_share_e: u32, w_share_d: u32) -> Self {
        EdgeWeights {
            w_trans,
            w_share_e,
            w_share_d,
        }
    }

    pub fn scaled(self, k: u32) -> Self {
        EdgeWeights::new(self.w_trans * k, self.w_share_e * k, self.w_share_d * k)
    }
}

impl fmt::Display for EdgeWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.w_trans, self.w_share_e, self.w_share_d)
    }
}

/// Ordered task pair keying a directed edge.
pub type EdgeKey = (TaskId, TaskId);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid task id {0:?}: must be non-empty and contain no whitespace")]
    InvalidTaskId(String),
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("self query on {0}")]
    SelfQuery(TaskId),
    #[error("invalid graph: {}", join_violations(.0))]
    InvalidGraph(Vec<Violation>),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// One broken graph invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    SelfLoop {
        task: TaskId,
    },
    UnknownEndpoint {
        src: TaskId,
        dst: TaskId,
        missing: TaskId,
    },
    ZeroTransfer {
        src: TaskId,
        dst: TaskId,
    },
    EncoderShareExceedsTransfer {
        src: TaskId,
        dst: TaskId,
        w_share_e: u32,
        w_trans: u32,
    },
    DecoderShareExceedsTransfer {
        src: TaskId,
        dst: TaskId,
        w_share_d: u32,
        w_trans: u32,
    },
    TaskKeyMismatch {
        key: TaskId,
        id: TaskId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { task } => write!(f, "self-loop at {task}"),
            Violation::UnknownEndpoint { src, dst, missing } => {
                write!(f, "edge ({src},{dst}) references unknown task {missing}")
            }
            Violation::ZeroTransfer { src, dst } => write!(f, "w_trans is zero on ({src},{dst})"),
            Violation::EncoderShareExceedsTransfer {
                src,
                dst,
                w_share_e,
                w_trans,
            } => write!(
                f,
                "w_share_e exceeds w_trans on ({src},{dst}): {w_share_e} > {w_trans}"
            ),
            Violation::DecoderShareExceedsTransfer {
                src,
                dst,
                w_share_d,
                w_trans,
            } => write!(
                f,
                "w_share_d exceeds w_trans on ({src},{dst}): {w_share_d} > {w_trans}"
            ),
            Violation::TaskKeyMismatch { key, id } => {
                write!(f, "task stored under {key} carries id {id}")
            }
        }
    }
}

/// Multi-task knowledge graph.
///
/// Immutable once built. [`Mtkg::from_parts`] accepts anything so that
/// [`validate_mtkg`] can report on it; [`MtkgBuilder::build`] and
/// [`Mtkg::try_from_parts`] only hand out valid graphs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Mtkg {
    tasks: BTreeMap<TaskId, TaskInfo>,
    edges: BTreeMap<EdgeKey, EdgeWeights>,
}

impl Mtkg {
    pub fn builder() -> MtkgBuilder {
        MtkgBuilder::default()
    }

    /// Assembles a graph without checking invariants.
    pub fn from_parts(
        tasks: BTreeMap<TaskId, TaskInfo>,
        edges: BTreeMap<EdgeKey, EdgeWeights>,
    ) -> Self {
        Mtkg { tasks, edges }
    }

    pub fn try_from_parts(
        tasks: BTreeMap<TaskId, TaskInfo>,
        edges: BTreeMap<EdgeKey, EdgeWeights>,
    ) -> Result<Self, ModelError> {
        let g = Mtkg::from_parts(tasks, edges);
        let violations = validate_mtkg(&g);
        if violations.is_empty() {
            Ok(g)
        } else {
            Err(ModelError::InvalidGraph(violations))
        }
    }

    pub fn tasks(&self) -> &BTreeMap<TaskId, TaskInfo> {
        &self.tasks
    }

    pub fn edges(&self) -> &BTreeMap<EdgeKey, EdgeWeights> {
        &self.edges
    }

    pub fn task_ids(&self) -> impl Iterator<Item = &TaskId> {
        self.tasks.keys()
    }

    pub fn contains_task(&self, id: &TaskId) -> bool {
        self.tasks.contains_key(id)
    }

    pub fn edge(&self, src: &TaskId, dst: &TaskId) -> Option<&EdgeWeights> {
        self.edges.get(&(src.clone(), dst.clone()))
    }

    pub fn has_edge(&self, src: &TaskId, dst: &TaskId) -> bool {
        self.edge(src, dst).is_some()
    }

    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Same topology with every weight multiplied by `k`.
    pub fn scaled(&self, k: u32) -> Mtkg {
        Mtkg {
            tasks: self.tasks.clone(),
            edges: self
                .edges
                .iter()
                .map(|(key, w)| (key.clone(), w.scaled(k)))
                .collect(),
        }
    }

    fn require(&self, id: &TaskId) -> Result<(), ModelError> {
        if self.contains_task(id) {
            Ok(())
        } else {
            Err(ModelError::UnknownTask(id.clone()))
        }
    }
}

/// Incremental construction of an [`Mtkg`]. Edge endpoints are registered as
/// bare tasks when not declared explicitly.
#[derive(Debug, Default)]
pub struct MtkgBuilder {
    tasks: BTreeMap<TaskId, TaskInfo>,
    edges: BTreeMap<EdgeKey, EdgeWeights>,
    errors: Vec<ModelError>,
}

impl MtkgBuilder {
    fn id(&mut self, raw: &str) -> Option<TaskId> {
        match TaskId::new(raw) {
            Ok(id) => {
                self.tasks
                    .entry(id.clone())
                    .or_insert_with(|| TaskInfo::bare(id.clone()));
                Some(id)
            }
            Err(e) => {
                self.errors.push(e);
                None
            }
        }
    }

    pub fn task(mut self, id: &str) -> Self {
        self.id(id);
        self
    }

    pub fn task_info(mut self, info: TaskInfo) -> Self {
        self.tasks.insert(info.id.clone(), info);
        self
    }

    /// Directed edge `src -> dst`; replaces any earlier weights on that key.
    pub fn uni(mut self, src: &str, dst: &str, weights: EdgeWeights) -> Self {
        if let (Some(s), Some(d)) = (self.id(src), self.id(dst)) {
            self.edges.insert((s, d), weights);
        }
        self
    }

    /// Both directed edges with identical weights.
    pub fn bi(self, a: &str, b: &str, weights: EdgeWeights) -> Self {
        self.uni(a, b, weights).uni(b, a, weights)
    }

    pub fn build(mut self) -> Result<Mtkg, ModelError> {
        if !self.errors.is_empty() {
            return Err(self.errors.swap_remove(0));
        }
        Mtkg::try_from_parts(self.tasks, self.edges)
    }
}

/// Every violated invariant, in canonical order. Empty means valid.
pub fn validate_mtkg(g: &Mtkg) -> Vec<Violation> {
    let mut out = Vec::new();
    for (key, info) in &g.tasks {
        if *key != info.id {
            out.push(Violation::TaskKeyMismatch {
                key: key.clone(),
                id: info.id.clone(),
            });
        }
    }
    for ((src, dst), w) in &g.edges {
        if src == dst {
            out.push(Violation::SelfLoop { task: src.clone() });
        }
        for end in [src, dst] {
            if !g.tasks.contains_key(end) {
                out.push(Violation::UnknownEndpoint {
                    src: src.clone(),
                    dst: dst.clone(),
                    missing: end.clone(),
                });
                if src == dst {
                    break;
                }
            }
        }
        if w.w_trans == 0 {
            out.push(Violation::ZeroTransfer {
                src: src.clone(),
                dst: dst.clone(),
            });
        }
        if w.w_share_e > w.w_trans {
            out.push(Violation::EncoderShareExceedsTransfer {
                src: src.clone(),
                dst: dst.clone(),
                w_share_e: w.w_share_e,
                w_trans: w.w_trans,
            });
        }
        if w.w_share_d > w.w_trans {
            out.push(Violation::DecoderShareExceedsTransfer {
                src: src.clone(),
                dst: dst.clone(),
                w_share_d: w.w_share_d,
                w_trans: w.w_trans,
            });
        }
    }
    out
}

/// True iff both `(a,b)` and `(b,a)` are edges.
pub fn is_bidirectional(g: &Mtkg, a: &TaskId, b: &TaskId) -> Result<bool, ModelError> {
    g.require(a)?;
    g.require(b)?;
    if a == b {
        return Err(ModelError::SelfQuery(a.clone()));
    }
    Ok(g.has_edge(a, b) && g.has_edge(b, a))
}

/// Unordered pairs `(lo, hi)` with `lo < hi` joined by an edge in either
/// direction.
pub fn undirected_view(g: &Mtkg) -> BTreeSet<(TaskId, TaskId)> {
    g.edges
        .keys()
        .filter(|(a, b)| a != b)
        .map(|(a, b)| {
            if a < b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            }
        })
        .collect()
}

/// Summary counts of a graph. `directed_edges = 2 * bi_pairs + uni_edges`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub tasks: usize,
    pub directed_edges: usize,
    pub bi_pairs: usize,
    pub uni_edges: usize,
    /// Distinct unordered task pairs, i.e. `bi_pairs + uni_edges`.
    pub undirected_pairs: usize,
    pub w_trans_histogram: BTreeMap<u32, usize>,
    pub w_share_e_histogram: BTreeMap<u32, usize>,
    pub w_share_d_histogram: BTreeMap<u32, usize>,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tasks={} edges={} bi_pairs={} uni={}",
            self.tasks, self.directed_edges, self.bi_pairs, self.uni_edges
        )
    }
}

pub fn stats(g: &Mtkg) -> GraphStats {
    let mut s = GraphStats {
        tasks: g.task_count(),
        directed_edges: g.edge_count(),
        ..GraphStats::default()
    };
    for ((src, dst), w) in &g.edges {
        if g.has_edge(dst, src) {
            // each pair is seen twice
            if src < dst {
                s.bi_pairs += 1;
            }
        } else {
            s.uni_edges += 1;
        }
        *s.w_trans_histogram.entry(w.w_trans).or_default() += 1;
        *s.w_share_e_histogram.entry(w.w_share_e).or_default() += 1;
        *s.w_share_d_histogram.entry(w.w_share_d).or_default() += 1;
    }
    s.undirected_pairs = s.bi_pairs + s.uni_edges;
    s
}
