//! Automatic design of multi-task model architectures from a knowledge graph
//! of task relatedness.
//!
//! The pipeline has three stages:
//!
//! 1. [`connector`] picks the fewest auxiliary tasks that connect the
//!    requested ones in the knowledge graph.
//! 2. [`designer::design`] turns uni-directional transfer edges into
//!    decoder-to-decoder passes.
//! 3. The same call decides which encoders and decoders share parameters,
//!    based on how often earlier methods did.
//!
//! Graphs come from [`ingest`] (aggregating per-paper records) or from the
//! JSON documents in [`io`], which also renders DOT.

pub mod connector;
pub mod designer;
pub mod fixtures;
pub mod ingest;
pub mod io;
pub mod model;

pub use connector::{
    brute_force_connect, connect_exact, connect_greedy, ConnectError, ConnectionPlan,
};
pub use designer::{
    classify, design, evaluate_sharing, sharing_groups, Classification, CycleMode, DesignError,
    DesignOptions, DesignReport, ModuleKind, ModuleRef, Mtag, Pass, SharePair, SharePolicy, Theta,
};
pub use ingest::{aggregate, build_seed_dataset, load_records, PaperRecord, TransferAssertion};
pub use model::{
    is_bidirectional, stats, undirected_view, validate_mtkg, EdgeWeights, GraphStats, ModelError,
    Mtkg, TaskId, TaskInfo, Violation,
};
