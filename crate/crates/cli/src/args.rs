use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mtagd_core::designer::{CycleMode, SharePolicy, Theta};

#[derive(Debug, Parser)]
#[command(
    name = "mtagd",
    version,
    about = "Design multi-task training architectures from a task knowledge graph",
    after_help = "Exit codes: 0 ok, 1 usage, 2 parse, 3 unknown entity, 4 cycle, 5 internal.\n\
                  Set MTAGD_LOG (error, warn, info, debug) to control diagnostics."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; documents default to json, everything else to text.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the payload to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate paper records into a knowledge-graph document.
    Ingest {
        /// JSON array of paper records.
        records: PathBuf,
    },
    /// Check a knowledge-graph or architecture document.
    Validate { document: PathBuf },
    /// Print counts and weight histograms of a knowledge graph.
    Stats { mtkg: PathBuf },
    /// Choose which extra tasks connect the specified ones.
    Connect {
        mtkg: PathBuf,
        #[command(flatten)]
        tasks: TaskArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Connect the specified tasks and build their architecture graph.
    Design {
        mtkg: PathBuf,
        #[command(flatten)]
        tasks: TaskArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = SharePolicy::Any, value_name = "any|all|sum")]
        share_policy: SharePolicy,
        #[command(flatten)]
        theta: ThetaArg,
        #[arg(long, default_value_t = CycleModeArg::Error, value_enum)]
        cycle_mode: CycleModeArg,
    },
    /// Classify an architecture document.
    Classify {
        mtag: PathBuf,
        #[command(flatten)]
        theta: ThetaArg,
    },
    /// Re-emit a document canonically, or as DOT or text.
    Export { document: PathBuf },
}

#[derive(Debug, Args)]
pub struct TaskArgs {
    /// Comma-separated task ids.
    #[arg(long, value_delimiter = ',', value_name = "IDS")]
    pub tasks: Vec<String>,

    /// File of task ids separated by commas or whitespace; `#` starts a comment.
    #[arg(long, value_name = "PATH")]
    pub tasks_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = Solver::Exact, value_enum)]
    pub solver: Solver,

    /// Maximum number of added tasks (exact solver only).
    #[arg(long, value_name = "N")]
    pub budget: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ThetaArg {
    /// Share-fraction threshold in (0, 1], as a decimal or a fraction.
    #[arg(long, default_value_t = Theta::ONE)]
    pub theta: Theta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Exact,
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CycleModeArg {
    Error,
    Warn,
}

impl From<CycleModeArg> for CycleMode {
    fn from(m: CycleModeArg) -> Self {
        match m {
            CycleModeArg::Error => CycleMode::Error,
            CycleModeArg::Warn => CycleMode::Warn,
        }
    }
}
