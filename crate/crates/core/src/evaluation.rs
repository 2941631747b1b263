//! Metrics over grounded predictions: precision/recall/F1 at k, split by
//! zero-shot status; a ground-truth upper bound; accept/override diagnostics
//! comparing the generator against its recommender; and validity fractions
//! for raw generated names.
//!
//! All per-vulnerability scores are averaged arithmetically. The reported
//! mean F1 is the mean of per-record F1 values — deliberately NOT the
//! harmonic mean of the reported mean precision and mean recall.

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{LibraryCorpus, LibraryName};
use crate::dataset::{VulnerabilityRecord, ZeroShotPartition};
use crate::jsonl::{self, LineIssue};
use crate::retriever::Recommendation;

/// Ordered predictions per vulnerability. Lists are kept duplicate-free
/// (first occurrence wins), which `prf_at_k` relies on when counting hits.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionSet {
    map: BTreeMap<String, Vec<LibraryName>>,
}

impl PredictionSet {
    pub fn new() -> PredictionSet {
        PredictionSet::default()
    }

    /// Insert a prediction list, dropping repeated names (first kept).
    pub fn insert(&mut self, cve_id: impl Into<String>, names: Vec<LibraryName>) {
        let mut seen = BTreeSet::new();
        let deduped = names
            .into_iter()
            .filter(|name| seen.insert(name.clone()))
            .collect();
        self.map.insert(cve_id.into(), deduped);
    }

    pub fn get(&self, cve_id: &str) -> Option<&[LibraryName]> {
        self.map.get(cve_id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Entries in ascending CVE-id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[LibraryName])> {
        self.map.iter().map(|(id, names)| (id.as_str(), names.as_slice()))
    }
}

/// One line of a predictions file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionLine {
    pub cve_id: String,
    pub predictions: Vec<LibraryName>,
}

/// Load predictions from JSONL `{cve_id, predictions}`. Duplicate ids are
/// reported and skipped (first wins).
pub fn load_predictions(
    path: impl AsRef<Path>,
) -> io::Result<(PredictionSet, Vec<LineIssue>)> {
    let loaded: jsonl::Loaded<PredictionLine> = jsonl::read_path(path)?;
    let mut issues = loaded.issues;
    let mut set = PredictionSet::new();
    for line in loaded.records {
        if set.get(&line.cve_id).is_some() {
            issues.push(LineIssue {
                line: 0,
                message: format!("duplicate cve_id `{}` skipped", line.cve_id),
            });
            continue;
        }
        set.insert(line.cve_id, line.predictions);
    }
    Ok((set, issues))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrfScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("recall is undefined for an empty truth set")]
pub struct UndefinedRecall;

/// Precision/recall/F1 of the top-`k` predictions against the truth set.
///
/// Precision divides by `k` itself — not by how many predictions exist — so
/// a model that emits fewer than `k` names pays for the missing slots.
/// `prediction` must be duplicate-free (see [`PredictionSet`]).
pub fn prf_at_k(
    prediction: &[LibraryName],
    truth: &BTreeSet<LibraryName>,
    k: usize,
) -> Result<PrfScores, UndefinedRecall> {
    assert!(k >= 1, "k must be at least 1");
    if truth.is_empty() {
        return Err(UndefinedRecall);
    }
    let hits = prediction
        .iter()
        .take(k)
        .filter(|name| truth.contains(*name))
        .count() as f64;
    let precision = hits / k as f64;
    let recall = hits / truth.len() as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(PrfScores {
        precision,
        recall,
        f1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionKind {
    /// Every labeled test record.
    Raw,
    /// Records whose labels were all unseen in training.
    Zero,
    /// The remaining labeled records.
    Full,
}

impl PartitionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PartitionKind::Raw => "raw",
            PartitionKind::Zero => "zero",
            PartitionKind::Full => "full",
        }
    }
}

impl std::fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mean scores for one (partition, k) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub partition: PartitionKind,
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub evaluated: usize,
}

/// Accept/override diagnostics: how often the model's top-1 equals the
/// recommender's top-1, and who is right when they disagree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativePrecision {
    pub accept_rate: f64,
    pub model_on_accept: f64,
    pub model_on_reject: f64,
    pub rec_on_reject: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub excluded: usize,
}

/// Fractions of raw generated coordinates that already exist in the corpus
/// — in full, by group id, and by artifact id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NameValidity {
    pub total: usize,
    pub full_name: f64,
    pub group: f64,
    pub artifact: f64,
}

/// The full metric report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<MetricRow>,
    pub excluded_unlabeled: usize,
    pub relative: Option<RelativePrecision>,
    pub validity: Option<NameValidity>,
}

/// Round to 3 decimals — the precision used in rendered reports.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

impl EvalReport {
    /// A copy with every fraction rounded to 3 decimals, for emission.
    /// Internal arithmetic stays in full double precision.
    pub fn rounded(&self) -> EvalReport {
        EvalReport {
            rows: self
                .rows
                .iter()
                .map(|row| MetricRow {
                    precision: round3(row.precision),
                    recall: round3(row.recall),
                    f1: round3(row.f1),
                    ..*row
                })
                .collect(),
            excluded_unlabeled: self.excluded_unlabeled,
            relative: self.relative.map(|rel| RelativePrecision {
                accept_rate: round3(rel.accept_rate),
                model_on_accept: round3(rel.model_on_accept),
                model_on_reject: round3(rel.model_on_reject),
                rec_on_reject: round3(rel.rec_on_reject),
                ..rel
            }),
            validity: self.validity.map(|val| NameValidity {
                full_name: round3(val.full_name),
                group: round3(val.group),
                artifact: round3(val.artifact),
                ..val
            }),
        }
    }

    /// The report as JSON (rounded).
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.rounded()).expect("report serializes")
    }

    fn cell(&self, partition: PartitionKind, k: usize) -> Option<&MetricRow> {
        self.rows
            .iter()
            .find(|row| row.partition == partition && row.k == k)
    }

    /// An aligned plain-text table: one line per k, a P/R/F1 block per
    /// partition, followed by the optional diagnostic blocks.
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let count = |kind| self.cell(kind, self.rows.first().map(|r| r.k).unwrap_or(1));
        writeln!(
            out,
            "evaluated: raw={} zero={} full={} (unlabeled excluded: {})",
            count(PartitionKind::Raw).map_or(0, |r| r.evaluated),
            count(PartitionKind::Zero).map_or(0, |r| r.evaluated),
            count(PartitionKind::Full).map_or(0, |r| r.evaluated),
            self.excluded_unlabeled,
        )
        .unwrap();
        writeln!(out).unwrap();
        writeln!(
            out,
            "  k |   raw P   raw R  raw F1 |  zero P  zero R zero F1 |  full P  full R full F1"
        )
        .unwrap();
        let mut ks: Vec<usize> = self.rows.iter().map(|row| row.k).collect();
        ks.sort_unstable();
        ks.dedup();
        for k in ks {
            write!(out, "{k:>3} |").unwrap();
            for partition in [PartitionKind::Raw, PartitionKind::Zero, PartitionKind::Full] {
                match self.cell(partition, k) {
                    Some(row) => write!(
                        out,
                        " {:>7.3} {:>7.3} {:>7.3}",
                        row.precision, row.recall, row.f1
                    )
                    .unwrap(),
                    None => write!(out, " {:>7} {:>7} {:>7}", "-", "-", "-").unwrap(),
                }
                if partition != PartitionKind::Full {
                    write!(out, " |").unwrap();
                }
            }
            writeln!(out).unwrap();
        }
        if let Some(rel) = &self.relative {
            writeln!(out).unwrap();
            writeln!(
                out,
                "acceptance: rate={:.3} (accepted={}, rejected={}, excluded={})",
                rel.accept_rate, rel.accepted, rel.rejected, rel.excluded
            )
            .unwrap();
            writeln!(
                out,
                "precision@1: model on accepted={:.3}, model on rejected={:.3}, recommender on rejected={:.3}",
                rel.model_on_accept, rel.model_on_reject, rel.rec_on_reject
            )
            .unwrap();
        }
        if let Some(val) = &self.validity {
            writeln!(out).unwrap();
            writeln!(
                out,
                "generated-name validity over {} raw names: full={:.3} group={:.3} artifact={:.3}",
                val.total, val.full_name, val.group, val.artifact
            )
            .unwrap();
        }
        out
    }
}

fn mean_scores(
    members: &[&VulnerabilityRecord],
    predictions: &PredictionSet,
    k: usize,
) -> (PrfScores, usize) {
    let mut sum = PrfScores {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };
    for record in members {
        let prediction = predictions.get(&record.cve_id).unwrap_or(&[]);
        let scores = prf_at_k(prediction, &record.labels, k)
            .expect("partition members always carry labels");
        sum.precision += scores.precision;
        sum.recall += scores.recall;
        sum.f1 += scores.f1;
    }
    let n = members.len();
    if n > 0 {
        let count = n as f64;
        sum.precision /= count;
        sum.recall /= count;
        sum.f1 /= count;
    }
    (sum, n)
}

/// Mean P/R/F1 at each requested k over the whole labeled test set and its
/// zero-shot / full-shot halves. A record missing from `predictions` counts
/// as an empty prediction; unlabeled records were already set aside during
/// partitioning and surface only in `excluded_unlabeled`.
pub fn evaluate(
    predictions: &PredictionSet,
    partition: &ZeroShotPartition,
    ks: &[usize],
) -> EvalReport {
    let raw: Vec<&VulnerabilityRecord> =
        partition.v_zero.iter().chain(&partition.v_full).collect();
    let zero: Vec<&VulnerabilityRecord> = partition.v_zero.iter().collect();
    let full: Vec<&VulnerabilityRecord> = partition.v_full.iter().collect();

    let mut rows = Vec::new();
    for (kind, members) in [
        (PartitionKind::Raw, &raw),
        (PartitionKind::Zero, &zero),
        (PartitionKind::Full, &full),
    ] {
        for &k in ks {
            let (scores, evaluated) = mean_scores(members, predictions, k);
            rows.push(MetricRow {
                partition: kind,
                k,
                precision: scores.precision,
                recall: scores.recall,
                f1: scores.f1,
                evaluated,
            });
        }
    }
    EvalReport {
        rows,
        excluded_unlabeled: partition.unlabeled_test,
        relative: None,
        validity: None,
    }
}

/// The best prediction an oracle could make: the first `min(k, |truth|)`
/// true labels in canonical order, with no padding — padding with wrong
/// names could only lower precision without helping recall.
pub fn ground_truth_oracle(records: &[VulnerabilityRecord], k: usize) -> PredictionSet {
    assert!(k >= 1, "k must be at least 1");
    let mut set = PredictionSet::new();
    for record in records {
        let names: Vec<LibraryName> = record.labels.iter().take(k).cloned().collect();
        set.insert(record.cve_id.clone(), names);
    }
    set
}

/// Accept/override diagnostics over labeled records.
///
/// A record is *accepted* when the model's top-1 prediction equals the
/// recommender's top-1; records lacking a model top-1, a recommender top-1,
/// or labels are excluded and counted. Empty accept/reject sides report 0.
pub fn relative_precision(
    predictions: &PredictionSet,
    recommendations: &BTreeMap<String, Vec<Recommendation>>,
    records: &[VulnerabilityRecord],
) -> RelativePrecision {
    fn frac(numerator: usize, denominator: usize) -> f64 {
        if denominator == 0 {
            0.0
        } else {
            numerator as f64 / denominator as f64
        }
    }

    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut excluded = 0usize;
    let mut accept_correct = 0usize;
    let mut reject_model_correct = 0usize;
    let mut reject_rec_correct = 0usize;

    for record in records {
        let model_top = predictions
            .get(&record.cve_id)
            .and_then(|prediction| prediction.first());
        let rec_top = recommendations
            .get(&record.cve_id)
            .and_then(|recs| recs.first())
            .map(|rec| &rec.name);
        let (Some(model), Some(rec)) = (model_top, rec_top) else {
            excluded += 1;
            continue;
        };
        if record.labels.is_empty() {
            excluded += 1;
            continue;
        }
        if model == rec {
            accepted += 1;
            if record.labels.contains(model) {
                accept_correct += 1;
            }
        } else {
            rejected += 1;
            if record.labels.contains(model) {
                reject_model_correct += 1;
            }
            if record.labels.contains(rec) {
                reject_rec_correct += 1;
            }
        }
    }

    RelativePrecision {
        accept_rate: frac(accepted, accepted + rejected),
        model_on_accept: frac(accept_correct, accepted),
        model_on_reject: frac(reject_model_correct, rejected),
        rec_on_reject: frac(reject_rec_correct, rejected),
        accepted,
        rejected,
        excluded,
    }
}

/// Existence fractions for raw (pre-grounding) generated coordinates.
/// A raw string that does not even parse counts in the denominator only.
pub fn name_validity_portions(raw_names: &[String], corpus: &LibraryCorpus) -> NameValidity {
    let total = raw_names.len();
    let mut full_name = 0usize;
    let mut group = 0usize;
    let mut artifact = 0usize;
    for raw in raw_names {
        let Ok(name) = LibraryName::parse(raw) else {
            continue;
        };
        if corpus.contains_name(&name) {
            full_name += 1;
        }
        if corpus.contains_group(name.group_id()) {
            group += 1;
        }
        if corpus.contains_artifact(name.artifact_id()) {
            artifact += 1;
        }
    }
    let frac = |n: usize| if total == 0 { 0.0 } else { n as f64 / total as f64 };
    NameValidity {
        total,
        full_name: frac(full_name),
        group: frac(group),
        artifact: frac(artifact),
    }
}
