//! JSON documents for knowledge graphs and architecture graphs.
//!
//! Serialization is canonical: object keys are sorted, lists are in id
//! order, output is pretty-printed with a trailing newline. Equal values give
//! byte-identical documents.

mod dot;

use std::collections::{BTreeMap, BTreeSet};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::designer::{DesignError, DesignReport, Mtag, Pass, SharePair};
use crate::model::{validate_mtkg, EdgeWeights, Mtkg, TaskId, TaskInfo, Violation};

pub use dot::{to_dot, DotOptions, ToDot};

/// Version written into every document.
pub const FORMAT_VERSION: &str = "1.0";
const SUPPORTED_MAJOR: u64 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported format_version {found:?} (supported major version {SUPPORTED_MAJOR})")]
    Version { found: String },
    #[error("invariant violation: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invariant(Vec<Violation>),
    #[error("invariant violation: {0}")]
    Architecture(#[from] DesignError),
    #[error("duplicate {0}")]
    Duplicate(String),
}

/// Checks a `format_version` string. Returns a warning for an unknown minor
/// version and an error for an unknown major version.
pub fn check_format_version(version: &str) -> Result<Option<String>, IoError> {
    let bad = || IoError::Version {
        found: version.to_string(),
    };
    let mut parts = version.split('.');
    let major: u64 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
    let minor: u64 = match parts.next() {
        Some(p) => p.parse().map_err(|_| bad())?,
        None => 0,
    };
    if major != SUPPORTED_MAJOR {
        return Err(bad());
    }
    Ok((minor != 0).then(|| {
        format!("document format_version {version} is newer than {FORMAT_VERSION}; reading as {FORMAT_VERSION}")
    }))
}

fn canonical<T: Serialize>(doc: &T) -> String {
    // serde_json::Map is ordered by key, so going through Value sorts keys
    let value = serde_json::to_value(doc).expect("documents serialize");
    let mut out = serde_json::to_string_pretty(&value).expect("values serialize");
    out.push('\n');
    out
}

fn parse<T: DeserializeOwned>(doc: &str) -> Result<T, IoError> {
    let value: serde_json::Value = serde_json::from_str(doc)?;
    match value.get("format_version") {
        Some(serde_json::Value::String(v)) => {
            if let Some(warning) = check_format_version(v)? {
                log::warn!("{warning}");
            }
        }
        Some(_) => {
            return Err(IoError::Schema {
                path: "format_version".into(),
                message: "expected a string".into(),
            })
        }
        None => {
            return Err(IoError::Schema {
                path: ".".into(),
                message: "missing field `format_version`".into(),
            })
        }
    }
    serde_path_to_error::deserialize(value).map_err(|e| IoError::Schema {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskEntry {
    id: TaskId,
    display_name: String,
    domain_tags: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    src: TaskId,
    dst: TaskId,
    w_trans: u32,
    w_share_e: u32,
    w_share_d: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MtkgDocument {
    format_version: String,
    tasks: Vec<TaskEntry>,
    edges: Vec<EdgeEntry>,
}

pub fn save_mtkg(g: &Mtkg) -> String {
    let doc = MtkgDocument {
        format_version: FORMAT_VERSION.to_string(),
        tasks: g
            .tasks()
            .values()
            .map(|t| TaskEntry {
                id: t.id.clone(),
                display_name: t.display_name.clone(),
                domain_tags: t.domain_tags.clone(),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|((src, dst), w)| EdgeEntry {
                src: src.clone(),
                dst: dst.clone(),
                w_trans: w.w_trans,
                w_share_e: w.w_share_e,
                w_share_d: w.w_share_d,
            })
            .collect(),
    };
    canonical(&doc)
}

/// Reads a knowledge-graph document checking only its schema, so that
/// invariant violations can be listed with [`validate_mtkg`].
pub fn parse_mtkg_unchecked(doc: &str) -> Result<Mtkg, IoError> {
    let doc: MtkgDocument = parse(doc)?;
    let mut tasks = BTreeMap::new();
    for t in doc.tasks {
        let info = TaskInfo {
            id: t.id.clone(),
            display_name: t.display_name,
            domain_tags: t.domain_tags,
        };
        if tasks.insert(t.id.clone(), info).is_some() {
            return Err(IoError::Duplicate(format!("task {}", t.id)));
        }
    }
    let mut edges = BTreeMap::new();
    for e in doc.edges {
        let w = EdgeWeights::new(e.w_trans, e.w_share_e, e.w_share_d);
        let key = (e.src, e.dst);
        if edges.contains_key(&key) {
            return Err(IoError::Duplicate(format!("edge ({},{})", key.0, key.1)));
        }
        edges.insert(key, w);
    }
    Ok(Mtkg::from_parts(tasks, edges))
}

pub fn load_mtkg(doc: &str) -> Result<Mtkg, IoError> {
    let g = parse_mtkg_unchecked(doc)?;
    let violations = validate_mtkg(&g);
    if violations.is_empty() {
        Ok(g)
    } else {
        Err(IoError::Invariant(violations))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MtagDocument {
    format_version: String,
    tasks: Vec<TaskId>,
    r_pass: Vec<Pass>,
    r_share: Vec<SharePair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<DesignReport>,
}

/// An architecture graph together with the report of the design run that
/// produced it, when there was one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArchitectureDocument {
    pub mtag: Mtag,
    pub report: Option<DesignReport>,
}

pub fn save_mtag(arch: &Mtag, report: Option<&DesignReport>) -> String {
    let doc = MtagDocument {
        format_version: FORMAT_VERSION.to_string(),
        tasks: arch.tasks().to_vec(),
        r_pass: arch.r_pass().iter().cloned().collect(),
        r_share: arch.r_share().iter().cloned().collect(),
        report: report.cloned(),
    };
    canonical(&doc)
}

pub fn load_mtag(doc: &str) -> Result<ArchitectureDocument, IoError> {
    let doc: MtagDocument = parse(doc)?;
    let mut r_pass = BTreeSet::new();
    for p in doc.r_pass {
        if let Some(dup) = r_pass.replace(p) {
            return Err(IoError::Duplicate(format!("pass {dup}")));
        }
    }
    let mut r_share = BTreeSet::new();
    for p in doc.r_share {
        if let Some(dup) = r_share.replace(p) {
            return Err(IoError::Duplicate(format!("share pair {dup}")));
        }
    }
    let mtag = Mtag::new(doc.tasks, r_pass, r_share)?;
    Ok(ArchitectureDocument {
        mtag,
        report: doc.report,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocumentKind {
    Mtkg,
    Mtag,
}

/// Guesses the document type from its top-level keys.
pub fn detect_kind(doc: &str) -> Result<DocumentKind, IoError> {
    let value: serde_json::Value = serde_json::from_str(doc)?;
    if value.get("r_pass").is_some() {
        Ok(DocumentKind::Mtag)
    } else if value.get("edges").is_some() {
        Ok(DocumentKind::Mtkg)
    } else {
        Err(IoError::Schema {
            path: ".".into(),
            message: "neither a knowledge-graph nor an architecture document".into(),
        })
    }
}
