//! Building the multi-task architecture graph from a connection plan.
//!
//! Every task gets an encoder feeding its own decoder. A transfer edge present
//! in one direction only becomes a decoder-to-decoder pass in that direction;
//! a bi-directional pair gets no pass. Encoders (and, for bi-directional
//! pairs, decoders) of adjacent tasks share parameters when most of the
//! recorded methods did so.

mod classify;
mod sharing;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connector::{ConnectError, ConnectionPlan};
use crate::model::{EdgeWeights, Mtkg, TaskId};

pub use classify::{
    classify, has_decoder_chain, sharing_groups, Classification, SharingGroups, Theta,
};
pub use sharing::{
    evaluate_sharing, InequalityCheck, ModuleShareDecision, ShareDecision, SharePolicy,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    Encoder,
    Decoder,
}

/// An encoder or decoder belonging to one task.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleRef {
    pub kind: ModuleKind,
    pub task: TaskId,
}

impl ModuleRef {
    pub fn encoder(task: &TaskId) -> Self {
        ModuleRef {
            kind: ModuleKind::Encoder,
            task: task.clone(),
        }
    }

    pub fn decoder(task: &TaskId) -> Self {
        ModuleRef {
            kind: ModuleKind::Decoder,
            task: task.clone(),
        }
    }
}

impl fmt::Display for ModuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ModuleKind::Encoder => 'E',
            ModuleKind::Decoder => 'D',
        };
        write!(f, "{k}({})", self.task)
    }
}

/// Directed information-passing connection.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pass {
    pub from: ModuleRef,
    pub to: ModuleRef,
}

impl Pass {
    pub fn new(from: ModuleRef, to: ModuleRef) -> Self {
        Pass { from, to }
    }

    /// Encoder to decoder of the same task.
    pub fn self_pass(task: &TaskId) -> Self {
        Pass::new(ModuleRef::encoder(task), ModuleRef::decoder(task))
    }

    pub fn is_self_pass(&self) -> bool {
        self.from.kind == ModuleKind::Encoder
            && self.to.kind == ModuleKind::Decoder
            && self.from.task == self.to.task
    }

    pub fn is_decoder_pass(&self) -> bool {
        self.from.kind == ModuleKind::Decoder && self.to.kind == ModuleKind::Decoder
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

/// Unordered sharing pair, stored with the smaller module first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(ModuleRef, ModuleRef)")]
pub struct SharePair(ModuleRef, ModuleRef);

impl From<(ModuleRef, ModuleRef)> for SharePair {
    fn from((a, b): (ModuleRef, ModuleRef)) -> Self {
        SharePair::new(a, b)
    }
}

impl SharePair {
    pub fn new(a: ModuleRef, b: ModuleRef) -> Self {
        if a <= b {
            SharePair(a, b)
        } else {
            SharePair(b, a)
        }
    }

    pub fn first(&self) -> &ModuleRef {
        &self.0
    }

    pub fn second(&self) -> &ModuleRef {
        &self.1
    }

    /// Kind of the first module; meaningful when the pair is like-kinded.
    pub fn kind(&self) -> ModuleKind {
        self.0.kind
    }

    pub fn contains(&self, m: &ModuleRef) -> bool {
        self.0 == *m || self.1 == *m
    }
}

impl fmt::Display for SharePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~ {}", self.0, self.1)
    }
}

/// A broken architecture-graph invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MtagViolation {
    DuplicateTask(TaskId),
    UnknownModule(ModuleRef),
    MissingSelfPass(TaskId),
    PassToItself(ModuleRef),
    ShareWithItself(ModuleRef),
    MixedKindShare(SharePair),
}

impl fmt::Display for MtagViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MtagViolation::DuplicateTask(t) => write!(f, "task {t} listed twice"),
            MtagViolation::UnknownModule(m) => write!(f, "{m} belongs to no listed task"),
            MtagViolation::MissingSelfPass(t) => write!(f, "missing pass E({t}) -> D({t})"),
            MtagViolation::PassToItself(m) => write!(f, "{m} passes to itself"),
            MtagViolation::ShareWithItself(m) => write!(f, "{m} shares with itself"),
            MtagViolation::MixedKindShare(p) => write!(f, "{p} mixes encoder and decoder"),
        }
    }
}

/// Multi-task architecture graph. Always satisfies the structural
/// invariants checked by [`mtag_violations`]; decoder passes may still be
/// cyclic when a design was run with [`CycleMode::Warn`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mtag {
    tasks: Vec<TaskId>,
    r_pass: BTreeSet<Pass>,
    r_share: BTreeSet<SharePair>,
}

impl Mtag {
    pub fn new(
        tasks: Vec<TaskId>,
        r_pass: BTreeSet<Pass>,
        r_share: BTreeSet<SharePair>,
    ) -> Result<Self, DesignError> {
        let arch = Mtag {
            tasks,
            r_pass,
            r_share,
        };
        let violations = mtag_violations(&arch);
        if violations.is_empty() {
            Ok(arch)
        } else {
            Err(DesignError::InvalidMtag(violations))
        }
    }

    pub fn tasks(&self) -> &[TaskId] {
        &self.tasks
    }

    pub fn r_pass(&self) -> &BTreeSet<Pass> {
        &self.r_pass
    }

    pub fn r_share(&self) -> &BTreeSet<SharePair> {
        &self.r_share
    }

    /// Encoders then decoders, each in task order.
    pub fn modules(&self) -> impl Iterator<Item = ModuleRef> + '_ {
        self.tasks
            .iter()
            .map(ModuleRef::encoder)
            .chain(self.tasks.iter().map(ModuleRef::decoder))
    }

    /// Cross-task decoder passes as `(from task, to task)`.
    pub fn decoder_passes(&self) -> impl Iterator<Item = (&TaskId, &TaskId)> {
        self.r_pass
            .iter()
            .filter(|p| p.is_decoder_pass() && p.from.task != p.to.task)
            .map(|p| (&p.from.task, &p.to.task))
    }

    /// A directed cycle among decoder passes, rotated to start at its
    /// smallest task, or `None` when they form a DAG.
    pub fn decoder_cycle(&self) -> Option<Vec<TaskId>> {
        let mut succ: BTreeMap<&TaskId, Vec<&TaskId>> = BTreeMap::new();
        for (a, b) in self.decoder_passes() {
            succ.entry(a).or_default().push(b);
        }
        find_cycle(&self.tasks, &succ)
    }
}

/// Structural invariants: unique tasks, modules belong to listed tasks, every
/// task has its self pass, nothing connects to itself, sharing stays within
/// encoders or within decoders.
pub fn mtag_violations(arch: &Mtag) -> Vec<MtagViolation> {
    let mut out = Vec::new();
    let mut known = BTreeSet::new();
    for t in &arch.tasks {
        if !known.insert(t) {
            out.push(MtagViolation::DuplicateTask(t.clone()));
        }
    }
    for t in &known {
        if !arch.r_pass.contains(&Pass::self_pass(t)) {
            out.push(MtagViolation::MissingSelfPass((*t).clone()));
        }
    }
    let mut unknown = BTreeSet::new();
    for p in &arch.r_pass {
        for m in [&p.from, &p.to] {
            if !known.contains(&m.task) {
                unknown.insert(m.clone());
            }
        }
        if p.from == p.to {
            out.push(MtagViolation::PassToItself(p.from.clone()));
        }
    }
    for p in &arch.r_share {
        for m in [p.first(), p.second()] {
            if !known.contains(&m.task) {
                unknown.insert(m.clone());
            }
        }
        if p.first() == p.second() {
            out.push(MtagViolation::ShareWithItself(p.first().clone()));
        } else if p.first().kind != p.second().kind {
            out.push(MtagViolation::MixedKindShare(p.clone()));
        }
    }
    out.extend(unknown.into_iter().map(MtagViolation::UnknownModule));
    out
}

fn find_cycle(nodes: &[TaskId], succ: &BTreeMap<&TaskId, Vec<&TaskId>>) -> Option<Vec<TaskId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark: BTreeMap<&TaskId, Mark> = nodes.iter().map(|t| (t, Mark::New)).collect();
    let mut sorted: Vec<&TaskId> = nodes.iter().collect();
    sorted.sort();

    for &root in &sorted {
        if mark[root] != Mark::New {
            continue;
        }
        // stack of (node, index of next successor to visit)
        let mut stack: Vec<(&TaskId, usize)> = vec![(root, 0)];
        mark.insert(root, Mark::Open);
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            let nbrs = succ.get(u).map(Vec::as_slice).unwrap_or(&[]);
            if let Some(&v) = nbrs.get(*next) {
                *next += 1;
                match mark.get(v).copied().unwrap_or(Mark::Done) {
                    Mark::New => {
                        mark.insert(v, Mark::Open);
                        stack.push((v, 0));
                    }
                    Mark::Open => {
                        let start = stack
                            .iter()
                            .position(|(t, _)| *t == v)
                            .expect("open node is on stack");
                        let mut cycle: Vec<TaskId> =
                            stack[start..].iter().map(|(t, _)| (*t).clone()).collect();
                        let min = cycle
                            .iter()
                            .enumerate()
                            .min_by_key(|(_, t)| *t)
                            .map(|(i, _)| i)
                            .unwrap_or(0);
                        cycle.rotate_left(min);
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark.insert(u, Mark::Done);
                stack.pop();
            }
        }
    }
    None
}

/// What to do when decoder passes form a directed cycle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleMode {
    #[default]
    Error,
    Warn,
}

impl FromStr for CycleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(CycleMode::Error),
            "warn" => Ok(CycleMode::Warn),
            other => Err(format!(
                "unknown cycle mode {other:?} (expected error or warn)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DesignOptions {
    pub policy: SharePolicy,
    pub cycle_mode: CycleMode,
    pub theta: Theta,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesignError {
    #[error("no edge between {0} and {1}")]
    NoEdge(TaskId, TaskId),
    #[error("decoder passes form a cycle: {}", format_cycle(.0))]
    DecoderCycle(Vec<TaskId>),
    #[error(transparent)]
    InvalidPlan(#[from] ConnectError),
    #[error("invalid architecture graph: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidMtag(Vec<MtagViolation>),
}

pub fn format_cycle(cycle: &[TaskId]) -> String {
    let mut parts: Vec<&str> = cycle.iter().map(TaskId::as_str).collect();
    if let Some(first) = cycle.first() {
        parts.push(first.as_str());
    }
    parts.join(" -> ")
}

/// A decoder pass and the knowledge-graph edge that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderPass {
    pub from: TaskId,
    pub to: TaskId,
    pub weights: EdgeWeights,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignReport {
    pub plan: ConnectionPlan,
    pub policy: SharePolicy,
    pub theta: Theta,
    pub decoder_pass_edges: Vec<DecoderPass>,
    pub share_decisions: Vec<ShareDecision>,
    pub sharing_groups: SharingGroups,
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoder_cycle: Option<Vec<TaskId>>,
    pub warnings: Vec<String>,
}

/// Builds the architecture graph for the tasks of `plan`.
pub fn design(
    g: &Mtkg,
    plan: &ConnectionPlan,
    options: &DesignOptions,
) -> Result<(Mtag, DesignReport), DesignError> {
    plan.check(g)?;
    let nodes = plan.nodes();
    let tasks: Vec<TaskId> = nodes.iter().cloned().collect();
    let mut warnings = Vec::new();

    if plan.t_spec.len() == 1 {
        warnings.push("nothing to connect: a single task was specified".to_string());
    }
    for t in plan.disconnected_terminals() {
        warnings.push(format!(
            "task {t} could not be connected to the other specified tasks"
        ));
    }

    let mut r_pass: BTreeSet<Pass> = tasks.iter().map(Pass::self_pass).collect();
    let mut decoder_pass_edges = Vec::new();
    let mut adjacent: BTreeSet<(&TaskId, &TaskId)> = BTreeSet::new();
    for ((src, dst), w) in g.edges() {
        if !nodes.contains(src) || !nodes.contains(dst) || src == dst {
            continue;
        }
        adjacent.insert(if src < dst { (src, dst) } else { (dst, src) });
        if !g.has_edge(dst, src) {
            r_pass.insert(Pass::new(ModuleRef::decoder(src), ModuleRef::decoder(dst)));
            decoder_pass_edges.push(DecoderPass {
                from: src.clone(),
                to: dst.clone(),
                weights: *w,
            });
        }
    }

    let mut r_share = BTreeSet::new();
    let mut share_decisions = Vec::with_capacity(adjacent.len());
    for (a, b) in adjacent {
        let decision = evaluate_sharing(g, a, b, options.policy)?;
        if decision.share_encoders() {
            r_share.insert(SharePair::new(ModuleRef::encoder(a), ModuleRef::encoder(b)));
        }
        if decision.share_decoders() {
            r_share.insert(SharePair::new(ModuleRef::decoder(a), ModuleRef::decoder(b)));
        }
        share_decisions.push(decision);
    }

    let arch = Mtag::new(tasks, r_pass, r_share)?;
    let decoder_cycle = arch.decoder_cycle();
    if let Some(cycle) = &decoder_cycle {
        match options.cycle_mode {
            CycleMode::Error => return Err(DesignError::DecoderCycle(cycle.clone())),
            CycleMode::Warn => warnings.push(format!(
                "decoder passes form a cycle: {}",
                format_cycle(cycle)
            )),
        }
    }

    let report = DesignReport {
        plan: plan.clone(),
        policy: options.policy,
        theta: options.theta,
        decoder_pass_edges,
        share_decisions,
        sharing_groups: sharing_groups(&arch),
        classification: classify(&arch, options.theta),
        decoder_cycle,
        warnings,
    };
    Ok((arch, report))
}

/// Decoder passes grouped into maximal paths whose inner tasks have exactly
/// one incoming and one outgoing pass. Cycles left over are listed with
/// their first task repeated at the end.
pub fn decoder_chains(arch: &Mtag) -> Vec<Vec<TaskId>> {
    let mut succ: BTreeMap<&TaskId, Vec<&TaskId>> = BTreeMap::new();
    let mut indeg: BTreeMap<&TaskId, usize> = BTreeMap::new();
    for (a, b) in arch.decoder_passes() {
        succ.entry(a).or_default().push(b);
        *indeg.entry(b).or_default() += 1;
    }
    let outdeg = |t: &TaskId| succ.get(t).map_or(0, Vec::len);
    let inner = |t: &TaskId| indeg.get(t).copied().unwrap_or(0) == 1 && outdeg(t) == 1;

    let mut used: BTreeSet<(&TaskId, &TaskId)> = BTreeSet::new();
    let mut chains = Vec::new();
    for (&start, nexts) in &succ {
        if inner(start) {
            continue;
        }
        for &next in nexts {
            let mut chain = vec![start.clone()];
            let mut cur = next;
            used.insert((start, next));
            loop {
                chain.push(cur.clone());
                if !inner(cur) {
                    break;
                }
                let n = succ[cur][0];
                used.insert((cur, n));
                cur = n;
            }
            chains.push(chain);
        }
    }
    // pure cycles where every task is inner
    for (&start, nexts) in &succ {
        let next = nexts[0];
        if !inner(start) || used.contains(&(start, next)) {
            continue;
        }
        let mut chain = vec![start.clone()];
        let mut cur = start;
        loop {
            let n = succ[cur][0];
            used.insert((cur, n));
            chain.push(n.clone());
            if n == start {
                break;
            }
            cur = n;
        }
        chains.push(chain);
    }
    chains
}
