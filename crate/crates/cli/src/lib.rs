//! Command-line front end for `mtagd-core`.
//!
//! [`run`] parses arguments, executes one command and returns the process
//! exit code, writing the payload and diagnostics to the given streams so
//! the whole CLI can be driven in-process.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;
use mtagd_core::connector::ConnectError;
use mtagd_core::designer::{DesignOptions, Theta};
use mtagd_core::ingest::IngestError;
use mtagd_core::io::{self, to_dot, DocumentKind, DotOptions, IoError};
use mtagd_core::{
    aggregate, classify, connect_exact, connect_greedy, design, load_records, stats, DesignError,
    Mtkg, TaskId,
};
use serde::Serialize;
use thiserror::Error;

mod args;
mod report;

pub use args::{Cli, Command, Format, Solver};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_CYCLE: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{}", unknown_message(.0))]
    UnknownTasks(Vec<(String, Vec<String>)>),
    #[error("{0}")]
    Cycle(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::UnknownTasks(_) => EXIT_UNKNOWN,
            CliError::Cycle(_) => EXIT_CYCLE,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

fn unknown_message(unknown: &[(String, Vec<String>)]) -> String {
    unknown
        .iter()
        .map(|(task, near)| {
            if near.is_empty() {
                format!("unknown task {task:?} (no similar tasks)")
            } else {
                format!("unknown task {task:?} (did you mean: {}?)", near.join(", "))
            }
        })
        .collect::<Vec<_>>()
        .join("\nerror: ")
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::DecoderCycle(_) => CliError::Cycle(e.to_string()),
            DesignError::InvalidPlan(ConnectError::UnknownTask(t)) => {
                CliError::UnknownTasks(vec![(t.to_string(), Vec::new())])
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<ConnectError> for CliError {
    fn from(e: ConnectError) -> Self {
        match e {
            ConnectError::NoTerminals => CliError::Usage(e.to_string()),
            ConnectError::UnknownTask(t) => {
                CliError::UnknownTasks(vec![(t.to_string(), Vec::new())])
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

/// Runs the CLI and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, stderr) {
        Ok(payload) => match emit(&cli, &payload, stdout) {
            Ok(()) => EXIT_OK,
            Err(e) => fail(&e, stderr),
        },
        Err(e) => fail(&e, stderr),
    }
}

fn fail(e: &CliError, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "error: {e}");
    e.exit_code()
}

fn emit(cli: &Cli, payload: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(payload.as_bytes())
            .map_err(|e| CliError::Internal(format!("cannot write output: {e}"))),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

fn json<T: Serialize>(value: &T) -> String {
    // serde_json maps are key-ordered, so this is canonical
    let value = serde_json::to_value(value).expect("payloads serialize");
    let mut out = serde_json::to_string_pretty(&value).expect("values serialize");
    out.push('\n');
    out
}

fn no_dot(command: &str) -> CliError {
    CliError::Usage(format!("--format dot is not available for {command}"))
}

fn execute(cli: &Cli, stderr: &mut dyn Write) -> Result<String, CliError> {
    let text = |f: Option<Format>| f.unwrap_or(Format::Text);
    match &cli.command {
        Command::Ingest { records } => {
            let records = load_records(&read(records)?)?;
            let g = aggregate(&records)?;
            log::info!("aggregated {} records", records.len());
            let _ = writeln!(stderr, "{}", stats(&g));
            Ok(match cli.format.unwrap_or(Format::Json) {
                Format::Dot => to_dot(&g, &DotOptions::default()),
                Format::Json | Format::Text => io::save_mtkg(&g),
            })
        }
        Command::Validate { document } => {
            let doc = read(document)?;
            let (kind, summary) = match io::detect_kind(&doc)? {
                DocumentKind::Mtkg => {
                    let g = io::load_mtkg(&doc)?;
                    ("mtkg", stats(&g).to_string())
                }
                DocumentKind::Mtag => {
                    let a = io::load_mtag(&doc)?.mtag;
                    let summary = format!(
                        "tasks={} passes={} shares={}",
                        a.tasks().len(),
                        a.r_pass().len(),
                        a.r_share().len()
                    );
                    ("mtag", summary)
                }
            };
            match text(cli.format) {
                Format::Text => Ok(format!("valid {kind}: {summary}\n")),
                Format::Json => Ok(json(&BTreeMap::from([
                    ("kind", kind.to_string()),
                    ("summary", summary),
                    ("valid", "true".to_string()),
                ]))),
                Format::Dot => Err(no_dot("validate")),
            }
        }
        Command::Stats { mtkg } => {
            let s = stats(&io::load_mtkg(&read(mtkg)?)?);
            match text(cli.format) {
                Format::Text => Ok(report::stats_text(&s)),
                Format::Json => Ok(json(&s)),
                Format::Dot => Err(no_dot("stats")),
            }
        }
        Command::Connect {
            mtkg,
            tasks,
            solver,
        } => {
            let g = io::load_mtkg(&read(mtkg)?)?;
            let t_spec = task_list(&g, tasks)?;
            let plan = connect(&g, &t_spec, solver)?;
            match text(cli.format) {
                Format::Text => Ok(plan.to_string()),
                Format::Json => Ok(json(&plan)),
                Format::Dot => Ok(to_dot(&induced(&g, &plan.nodes()), &DotOptions::default())),
            }
        }
        Command::Design {
            mtkg,
            tasks,
            solver,
            share_policy,
            theta,
            cycle_mode,
        } => {
            let g = io::load_mtkg(&read(mtkg)?)?;
            let t_spec = task_list(&g, tasks)?;
            let plan = connect(&g, &t_spec, solver)?;
            let options = DesignOptions {
                policy: *share_policy,
                cycle_mode: (*cycle_mode).into(),
                theta: theta.theta,
            };
            let (arch, report) = design(&g, &plan, &options)?;
            let format = text(cli.format);
            if format != Format::Text {
                for w in &report.warnings {
                    let _ = writeln!(stderr, "warning: {w}");
                }
            }
            Ok(match format {
                Format::Text => report::design_text(&arch, &report),
                Format::Json => io::save_mtag(&arch, Some(&report)),
                Format::Dot => to_dot(&arch, &DotOptions::default()),
            })
        }
        Command::Classify { mtag, theta } => {
            let doc = read(mtag)?;
            let arch = load_architecture(&doc)?.mtag;
            let c = classify(&arch, theta.theta);
            match text(cli.format) {
                Format::Text => Ok(format!("{c}\n")),
                Format::Json => Ok(json(&BTreeMap::from([
                    ("classification", c.to_string()),
                    ("theta", theta.theta.to_string()),
                ]))),
                Format::Dot => Err(no_dot("classify")),
            }
        }
        Command::Export { document } => {
            let doc = read(document)?;
            let format = cli.format.unwrap_or(Format::Json);
            match io::detect_kind(&doc)? {
                DocumentKind::Mtkg => {
                    let g = io::load_mtkg(&doc)?;
                    Ok(match format {
                        Format::Json => io::save_mtkg(&g),
                        Format::Dot => to_dot(&g, &DotOptions::default()),
                        Format::Text => report::stats_text(&stats(&g)),
                    })
                }
                DocumentKind::Mtag => {
                    let a = io::load_mtag(&doc)?;
                    Ok(match format {
                        Format::Json => io::save_mtag(&a.mtag, a.report.as_ref()),
                        Format::Dot => to_dot(&a.mtag, &DotOptions::default()),
                        Format::Text => match &a.report {
                            Some(r) => report::design_text(&a.mtag, r),
                            None => report::mtag_text(&a.mtag, Theta::ONE),
                        },
                    })
                }
            }
        }
    }
}

fn load_architecture(doc: &str) -> Result<io::ArchitectureDocument, CliError> {
    match io::detect_kind(doc)? {
        DocumentKind::Mtag => Ok(io::load_mtag(doc)?),
        DocumentKind::Mtkg => Err(CliError::Parse(
            "expected an architecture document, found a knowledge graph".into(),
        )),
    }
}

fn connect(
    g: &Mtkg,
    t_spec: &BTreeSet<TaskId>,
    solver: &args::SolverArgs,
) -> Result<mtagd_core::ConnectionPlan, CliError> {
    log::info!(
        "connecting {} tasks with the {:?} solver",
        t_spec.len(),
        solver.solver
    );
    match solver.solver {
        Solver::Exact => Ok(connect_exact(g, t_spec, solver.budget)?),
        Solver::Greedy if solver.budget.is_some() => Err(CliError::Usage(
            "--budget is only supported by --solver exact".into(),
        )),
        Solver::Greedy => Ok(connect_greedy(g, t_spec)?),
    }
}

/// Task ids from `--tasks` and `--tasks-file`, checked against the graph.
fn task_list(g: &Mtkg, args: &args::TaskArgs) -> Result<BTreeSet<TaskId>, CliError> {
    let mut raw: Vec<String> = args.tasks.iter().map(|t| t.trim().to_string()).collect();
    if let Some(path) = &args.tasks_file {
        let contents = read(path)?;
        for line in contents.lines() {
            let line = line.split('#').next().unwrap_or_default();
            raw.extend(
                line.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(str::to_string),
            );
        }
    }
    raw.retain(|t| !t.is_empty());
    if raw.is_empty() {
        return Err(CliError::Usage(
            "no tasks given (use --tasks or --tasks-file)".into(),
        ));
    }
    let mut ids = BTreeSet::new();
    let mut unknown = Vec::new();
    for t in raw {
        let id: TaskId = t.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
        if g.contains_task(&id) {
            ids.insert(id);
        } else if !unknown.iter().any(|(u, _)| *u == t) {
            let near = near_matches(g, &t);
            unknown.push((t, near));
        }
    }
    if unknown.is_empty() {
        Ok(ids)
    } else {
        Err(CliError::UnknownTasks(unknown))
    }
}

/// Up to three known task ids that look like `query`.
fn near_matches(g: &Mtkg, query: &str) -> Vec<String> {
    let lower = query.to_lowercase();
    let mut scored: Vec<(f64, &str)> = g
        .task_ids()
        .map(|id| {
            let cand = id.as_str().to_lowercase();
            let mut score = strsim::normalized_damerau_levenshtein(&lower, &cand);
            if lower.len() >= 3 && cand.starts_with(&lower) {
                score = score.max(0.75);
            }
            (score, id.as_str())
        })
        .filter(|(score, _)| *score >= 0.5)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    scored
        .into_iter()
        .take(3)
        .map(|(_, id)| id.to_string())
        .collect()
}

/// Subgraph of `g` induced by `nodes`.
fn induced(g: &Mtkg, nodes: &BTreeSet<TaskId>) -> Mtkg {
    let tasks = g
        .tasks()
        .iter()
        .filter(|(id, _)| nodes.contains(*id))
        .map(|(id, info)| (id.clone(), info.clone()))
        .collect();
    let edges = g
        .edges()
        .iter()
        .filter(|((s, d), _)| nodes.contains(s) && nodes.contains(d))
        .map(|(k, w)| (k.clone(), *w))
        .collect();
    Mtkg::from_parts(tasks, edges)
}
