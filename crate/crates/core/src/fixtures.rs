//! Reference graphs used by tests, examples and the CLI documentation.

use std::collections::BTreeSet;

use crate::designer::{ModuleRef, Mtag, Pass, SharePair};
use crate::model::{EdgeWeights, Mtkg, TaskId};

/// Five-task worked example: `T1 <-> T2`, `T2 -> T5 -> T4 -> T3`,
/// `T3 <-> T5`.
pub fn golden_mtkg() -> Mtkg {
    Mtkg::builder()
        .bi("T1", "T2", EdgeWeights::new(4, 3, 3))
        .uni("T2", "T5", EdgeWeights::new(2, 0, 0))
        .uni("T5", "T4", EdgeWeights::new(2, 2, 0))
        .uni("T4", "T3", EdgeWeights::new(2, 2, 0))
        .bi("T3", "T5", EdgeWeights::new(2, 2, 0))
        .build()
        .expect("golden fixture is valid")
}

/// Tasks requested in the worked example.
pub fn golden_terminals() -> BTreeSet<TaskId> {
    ["T1", "T2", "T3", "T4"].into_iter().map(numbered).collect()
}

fn numbered(s: &str) -> TaskId {
    TaskId::new(s).expect("fixture ids are valid")
}

fn task_list(n: usize) -> Vec<TaskId> {
    (1..=n).map(|i| numbered(&format!("T{i}"))).collect()
}

fn all_pairs(tasks: &[TaskId], module: fn(&TaskId) -> ModuleRef) -> Vec<SharePair> {
    let mut out = Vec::new();
    for (i, a) in tasks.iter().enumerate() {
        for b in &tasks[i + 1..] {
            out.push(SharePair::new(module(a), module(b)));
        }
    }
    out
}

/// `n` tasks, self passes only, every encoder pair and decoder pair shared.
pub fn joint_training_mtag(n: usize) -> Mtag {
    let tasks = task_list(n);
    let passes = tasks.iter().map(Pass::self_pass).collect();
    let share: BTreeSet<SharePair> = all_pairs(&tasks, ModuleRef::encoder)
        .into_iter()
        .chain(all_pairs(&tasks, ModuleRef::decoder))
        .collect();
    Mtag::new(tasks, passes, share).expect("canonical joint graph is valid")
}

/// `n` tasks with decoders chained `T1 -> T2 -> ... -> Tn` and every encoder
/// pair shared.
pub fn multi_step_mtag(n: usize) -> Mtag {
    let tasks = task_list(n);
    let mut passes: BTreeSet<Pass> = tasks.iter().map(Pass::self_pass).collect();
    for w in tasks.windows(2) {
        passes.insert(Pass::new(
            ModuleRef::decoder(&w[0]),
            ModuleRef::decoder(&w[1]),
        ));
    }
    let share = all_pairs(&tasks, ModuleRef::encoder).into_iter().collect();
    Mtag::new(tasks, passes, share).expect("canonical multi-step graph is valid")
}
