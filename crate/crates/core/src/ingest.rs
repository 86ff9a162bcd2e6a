//! Aggregation of per-paper transfer records into an [`Mtkg`].
//!
//! Each paper counts at most once toward each weight of each directed edge.
//! A `bi` assertion covers both directions; a `uni` assertion covers only
//! `from -> to`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_mtkg, EdgeKey, EdgeWeights, ModelError, Mtkg, TaskId, TaskInfo};

const SEED_CORPUS: &str = include_str!("../data/seed_corpus.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uni,
    Bi,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferAssertion {
    #[serde(rename = "from")]
    pub from_task: TaskId,
    #[serde(rename = "to")]
    pub to_task: TaskId,
    pub direction: Direction,
    pub encoder_shared: bool,
    pub decoder_shared: bool,
}

impl TransferAssertion {
    /// Directed edges this assertion covers.
    fn covered(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        let forward = (self.from_task.clone(), self.to_task.clone());
        let backward = match self.direction {
            Direction::Bi => Some((self.to_task.clone(), self.from_task.clone())),
            Direction::Uni => None,
        };
        std::iter::once(forward).chain(backward)
    }
}

/// One literature entry. Constructed only through [`PaperRecord::new`], so
/// every value satisfies the record invariants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPaperRecord")]
pub struct PaperRecord {
    paper_key: String,
    assertions: Vec<TransferAssertion>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPaperRecord {
    paper_key: String,
    assertions: Vec<TransferAssertion>,
}

impl TryFrom<RawPaperRecord> for PaperRecord {
    type Error = IngestError;

    fn try_from(raw: RawPaperRecord) -> Result<Self, Self::Error> {
        PaperRecord::new(raw.paper_key, raw.assertions)
    }
}

impl PaperRecord {
    pub fn new(
        paper_key: impl Into<String>,
        assertions: Vec<TransferAssertion>,
    ) -> Result<Self, IngestError> {
        let record = PaperRecord {
            paper_key: paper_key.into(),
            assertions,
        };
        record.check()?;
        Ok(record)
    }

    pub fn paper_key(&self) -> &str {
        &self.paper_key
    }

    pub fn assertions(&self) -> &[TransferAssertion] {
        &self.assertions
    }

    fn check(&self) -> Result<(), IngestError> {
        let invalid = |index: usize, reason: &str| IngestError::InvalidAssertion {
            paper_key: self.paper_key.clone(),
            index,
            reason: reason.to_string(),
        };
        if self.paper_key.trim().is_empty() {
            return Err(IngestError::EmptyPaperKey);
        }
        if self.assertions.is_empty() {
            return Err(IngestError::EmptyAssertions {
                paper_key: self.paper_key.clone(),
            });
        }
        let mut seen = BTreeSet::new();
        for (index, a) in self.assertions.iter().enumerate() {
            if a.from_task == a.to_task {
                return Err(invalid(index, "self-transfer"));
            }
            if a.direction == Direction::Uni && a.decoder_shared {
                return Err(invalid(
                    index,
                    "decoder_shared requires a bi-directional assertion",
                ));
            }
            if !seen.insert((&a.from_task, &a.to_task, a.direction)) {
                return Err(invalid(
                    index,
                    "duplicate (from, to, direction) in one record",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("paper_key must be non-empty")]
    EmptyPaperKey,
    #[error("record {paper_key}: assertions must be non-empty")]
    EmptyAssertions { paper_key: String },
    #[error("record {paper_key}, assertion {index}: {reason}")]
    InvalidAssertion {
        paper_key: String,
        index: usize,
        reason: String,
    },
    #[error("record file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Default)]
struct EdgeTally {
    trans: BTreeSet<String>,
    share_e: BTreeSet<String>,
    share_d: BTreeSet<String>,
}

/// Counts papers per directed edge. Order of `records` does not matter.
pub fn aggregate(records: &[PaperRecord]) -> Result<Mtkg, IngestError> {
    let mut tasks = BTreeMap::new();
    let mut tallies: BTreeMap<EdgeKey, EdgeTally> = BTreeMap::new();

    for record in records {
        record.check()?;
        for a in &record.assertions {
            for t in [&a.from_task, &a.to_task] {
                tasks
                    .entry(t.clone())
                    .or_insert_with(|| TaskInfo::bare(t.clone()));
            }
            for key in a.covered() {
                let tally = tallies.entry(key).or_default();
                tally.trans.insert(record.paper_key.clone());
                if a.encoder_shared {
                    tally.share_e.insert(record.paper_key.clone());
                }
                if a.decoder_shared {
                    tally.share_d.insert(record.paper_key.clone());
                }
            }
        }
    }

    let edges = tallies
        .into_iter()
        .map(|(key, t)| {
            let w = EdgeWeights::new(
                count(t.trans.len()),
                count(t.share_e.len()),
                count(t.share_d.len()),
            );
            (key, w)
        })
        .collect();
    let g = Mtkg::from_parts(tasks, edges);
    debug_assert!(validate_mtkg(&g).is_empty());
    Ok(g)
}

fn count(n: usize) -> u32 {
    u32::try_from(n).expect("paper count fits in u32")
}

/// Parses a record file: a JSON list of records. Schema errors carry the
/// line and column; invariant errors carry the paper key and assertion index.
pub fn load_records(document: &str) -> Result<Vec<PaperRecord>, IngestError> {
    Ok(serde_json::from_str(document)?)
}

/// The record file bundled with the crate.
pub fn seed_corpus() -> &'static str {
    SEED_CORPUS
}

/// Graph aggregated from the bundled seed corpus.
pub fn build_seed_dataset() -> Mtkg {
    let records = load_records(SEED_CORPUS).expect("bundled seed corpus is valid");
    aggregate(&records).expect("bundled seed corpus aggregates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{stats, validate_mtkg};

    fn id(s: &str) -> TaskId {
        TaskId::new(s).unwrap()
    }

    fn assertion(
        from: &str,
        to: &str,
        direction: Direction,
        e: bool,
        d: bool,
    ) -> TransferAssertion {
        TransferAssertion {
            from_task: id(from),
            to_task: id(to),
            direction,
            encoder_shared: e,
            decoder_shared: d,
        }
    }

    #[test]
    fn two_bi_papers_count_twice_each_direction() {
        let records = vec![
            PaperRecord::new(
                "p1",
                vec![assertion("NER", "RE", Direction::Bi, true, false)],
            )
            .unwrap(),
            PaperRecord::new(
                "p2",
                vec![assertion("RE", "NER", Direction::Bi, true, false)],
            )
            .unwrap(),
        ];
        let g = aggregate(&records).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(
            g.edge(&id("NER"), &id("RE")),
            Some(&EdgeWeights::new(2, 2, 0))
        );
        assert_eq!(
            g.edge(&id("RE"), &id("NER")),
            Some(&EdgeWeights::new(2, 2, 0))
        );
    }

    #[test]
    fn uni_paper_creates_one_edge() {
        let records = vec![PaperRecord::new(
            "p",
            vec![assertion("POS", "Chunking", Direction::Uni, false, false)],
        )
        .unwrap()];
        let g = aggregate(&records).unwrap();
        assert_eq!(
            g.edge(&id("POS"), &id("Chunking")),
            Some(&EdgeWeights::new(1, 0, 0))
        );
        assert!(!g.has_edge(&id("Chunking"), &id("POS")));
    }

    #[test]
    fn empty_records_give_empty_graph() {
        assert_eq!(aggregate(&[]).unwrap(), Mtkg::default());
    }

    #[test]
    fn one_paper_counts_once_per_edge() {
        let records = vec![PaperRecord::new(
            "p",
            vec![
                assertion("A", "B", Direction::Bi, true, false),
                assertion("A", "B", Direction::Uni, false, false),
                assertion("B", "A", Direction::Bi, false, true),
            ],
        )
        .unwrap()];
        let g = aggregate(&records).unwrap();
        assert_eq!(g.edge(&id("A"), &id("B")), Some(&EdgeWeights::new(1, 1, 1)));
        assert_eq!(g.edge(&id("B"), &id("A")), Some(&EdgeWeights::new(1, 1, 1)));
    }

    #[test]
    fn invalid_assertions_are_rejected() {
        let err = PaperRecord::new("p", vec![assertion("A", "A", Direction::Uni, false, false)])
            .unwrap_err();
        assert_eq!(err.to_string(), "record p, assertion 0: self-transfer");

        let err = PaperRecord::new(
            "q",
            vec![
                assertion("A", "B", Direction::Bi, false, true),
                assertion("B", "C", Direction::Uni, false, true),
            ],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            IngestError::InvalidAssertion { index: 1, .. }
        ));

        let err = PaperRecord::new("r", vec![]).unwrap_err();
        assert!(err.to_string().contains("assertions must be non-empty"));

        let dup = assertion("A", "B", Direction::Uni, false, false);
        assert!(PaperRecord::new("s", vec![dup.clone(), dup]).is_err());
    }

    #[test]
    fn load_reports_location_of_uni_decoder_share() {
        let doc = r#"[
  {"paper_key": "ok", "assertions": [
    {"from": "A", "to": "B", "direction": "bi", "encoder_shared": true, "decoder_shared": true}]},
  {"paper_key": "bad", "assertions": [
    {"from": "A", "to": "B", "direction": "uni", "encoder_shared": false, "decoder_shared": true}]}
]"#;
        let msg = load_records(doc).unwrap_err().to_string();
        assert!(msg.contains("record bad, assertion 0"), "{msg}");
        assert!(msg.contains(" at line "), "{msg}");
    }

    #[test]
    fn load_rejects_unknown_fields_and_empty_assertions() {
        let doc = r#"[{"paper_key": "p", "assertions": [], "year": 2020}]"#;
        assert!(load_records(doc)
            .unwrap_err()
            .to_string()
            .contains("unknown field"));
        let doc = r#"[{"paper_key": "p", "assertions": []}]"#;
        assert!(load_records(doc)
            .unwrap_err()
            .to_string()
            .contains("assertions must be non-empty"));
        let doc = r#"[{"paper_key": "p", "assertions": [
            {"from": "A", "to": "B", "direction": "sideways", "encoder_shared": false, "decoder_shared": false}]}]"#;
        assert!(load_records(doc).is_err());
    }

    #[test]
    fn seed_corpus_loads() {
        let records = load_records(seed_corpus()).unwrap();
        assert!(records.len() >= 15);
        let keys: BTreeSet<_> = records.iter().map(PaperRecord::paper_key).collect();
        assert_eq!(keys.len(), records.len(), "paper keys are unique");
    }

    #[test]
    fn seed_dataset_contains_expected_relations() {
        let g = build_seed_dataset();
        assert!(validate_mtkg(&g).is_empty());
        let bi = |a: &str, b: &str| g.has_edge(&id(a), &id(b)) && g.has_edge(&id(b), &id(a));
        let uni = |a: &str, b: &str| g.has_edge(&id(a), &id(b)) && !g.has_edge(&id(b), &id(a));
        for (a, b) in [
            ("NER", "RE"),
            ("SlotFilling", "IntentDetection"),
            ("SentimentClf", "EmotionClf"),
            ("AbstractiveSumm", "QuestionGen"),
            ("QuestionGen", "QuestionAnswering"),
        ] {
            assert!(bi(a, b), "{a} <-> {b}");
        }
        for chain in [
            &[
                "POS",
                "Chunking",
                "DepParsing",
                "SemRelatedness",
                "TextualEntailment",
            ][..],
            &[
                "PassageRetrieval",
                "ReadingComprehension",
                "AnswerReranking",
            ],
            &["KnowledgeSelection", "ResponseGeneration"],
        ] {
            for w in chain.windows(2) {
                assert!(uni(w[0], w[1]), "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn seed_dataset_stats_snapshot() {
        let s = stats(&build_seed_dataset());
        assert_eq!(
            (
                s.tasks,
                s.directed_edges,
                s.bi_pairs,
                s.uni_edges,
                s.undirected_pairs
            ),
            (31, 35, 10, 15, 25)
        );
    }
}
