//! Parameter-sharing decisions for one task pair.
//!
//! A module pair shares when more methods shared it than did not, i.e.
//! `w_share > w_trans / 2`, evaluated as `2 * w_share > w_trans` in integers.
//! Decoders additionally require edges in both directions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DesignError;
use crate::model::{EdgeKey, EdgeWeights, Mtkg, TaskId};

/// How the per-edge condition combines when a pair has two directed edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SharePolicy {
    /// The condition holds on at least one directed edge.
    #[default]
    Any,
    /// The condition holds on every directed edge present.
    All,
    /// The condition holds on weights summed over the directed edges present.
    Sum,
}

impl FromStr for SharePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" => Ok(SharePolicy::Any),
            "all" => Ok(SharePolicy::All),
            "sum" => Ok(SharePolicy::Sum),
            other => Err(format!(
                "unknown share policy {other:?} (expected any, all or sum)"
            )),
        }
    }
}

impl fmt::Display for SharePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SharePolicy::Any => "any",
            SharePolicy::All => "all",
            SharePolicy::Sum => "sum",
        })
    }
}

/// One evaluated `share > trans / 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityCheck {
    /// Directed edge the numbers came from; `None` for summed weights.
    pub edge: Option<EdgeKey>,
    pub share: u64,
    pub trans: u64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn new(edge: Option<EdgeKey>, share: u64, trans: u64) -> Self {
        InequalityCheck {
            edge,
            share,
            trans,
            holds: 2 * share > trans,
        }
    }
}

impl fmt::Display for InequalityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.holds { ">" } else { "<=" };
        write!(f, "{} {op} {}/2", self.share, self.trans)?;
        match &self.edge {
            Some((s, d)) => write!(f, " on {s}->{d}"),
            None => write!(f, " summed"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleShareDecision {
    pub checks: Vec<InequalityCheck>,
    pub shared: bool,
}

/// Evidence and outcome for one task pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareDecision {
    pub a: TaskId,
    pub b: TaskId,
    pub policy: SharePolicy,
    pub bidirectional: bool,
    pub encoder: ModuleShareDecision,
    pub decoder: ModuleShareDecision,
}

impl ShareDecision {
    pub fn share_encoders(&self) -> bool {
        self.encoder.shared
    }

    pub fn share_decoders(&self) -> bool {
        self.decoder.shared
    }
}

fn decide(
    policy: SharePolicy,
    edges: &[(EdgeKey, EdgeWeights)],
    share_of: impl Fn(&EdgeWeights) -> u32,
) -> ModuleShareDecision {
    let checks: Vec<InequalityCheck> = match policy {
        SharePolicy::Any | SharePolicy::All => edges
            .iter()
            .map(|(key, w)| {
                InequalityCheck::new(Some(key.clone()), share_of(w).into(), w.w_trans.into())
            })
            .collect(),
        SharePolicy::Sum => {
            let share = edges.iter().map(|(_, w)| u64::from(share_of(w))).sum();
            let trans = edges.iter().map(|(_, w)| u64::from(w.w_trans)).sum();
            vec![InequalityCheck::new(None, share, trans)]
        }
    };
    let shared = match policy {
        SharePolicy::Any => checks.iter().any(|c| c.holds),
        SharePolicy::All | SharePolicy::Sum => !checks.is_empty() && checks.iter().all(|c| c.holds),
    };
    ModuleShareDecision { checks, shared }
}

/// Decides encoder and decoder sharing for `a` and `b`, which must be joined
/// by at least one directed edge.
pub fn evaluate_sharing(
    g: &Mtkg,
    a: &TaskId,
    b: &TaskId,
    policy: SharePolicy,
) -> Result<ShareDecision, DesignError> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let edges: Vec<(EdgeKey, EdgeWeights)> = [(lo, hi), (hi, lo)]
        .into_iter()
        .filter(|(s, d)| s != d)
        .filter_map(|(s, d)| g.edge(s, d).map(|w| ((s.clone(), d.clone()), *w)))
        .collect();
    if edges.is_empty() {
        return Err(DesignError::NoEdge(lo.clone(), hi.clone()));
    }
    let bidirectional = edges.len() == 2;
    let encoder = decide(policy, &edges, |w| w.w_share_e);
    let mut decoder = decide(policy, &edges, |w| w.w_share_d);
    decoder.shared &= bidirectional;
    Ok(ShareDecision {
        a: lo.clone(),
        b: hi.clone(),
        policy,
        bidirectional,
        encoder,
        decoder,
    })
}
