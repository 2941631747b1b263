//! Artifact schemas and shared stage logic.
//!
//! Every subcommand and the end-to-end pipeline go through these helpers so
//! a file written by one command is always readable by the next, whether the
//! stages ran in one process or across several invocations.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use cve2lib::dataset::{load_dataset, DatasetSplit, SplitPart, VulnerabilityRecord};
use cve2lib::jsonl::{self, LineIssue};
use cve2lib::{
    extract_raw_names, load_corpus, post_process_detailed, GroundingWeights, InferenceRun,
    LibraryCorpus, LibraryName, PredictionSet,
};

use crate::config::SearchSpace;
use crate::error::CliError;

// ---------------------------------------------------------------------------
// Artifact line formats
// ---------------------------------------------------------------------------

/// One line of a split file: which part a record landed in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitLine {
    pub cve_id: String,
    pub part: SplitPart,
}

/// One line of a prompt dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptLine {
    pub cve_id: String,
    pub prompt: String,
}

/// One line of a generation-error dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorLine {
    pub cve_id: String,
    pub error: String,
}

/// Edit costs behind one grounded prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostEntry {
    /// The coordinate as extracted from the generated text.
    pub raw: String,
    pub artifact: u64,
    pub group: u64,
}

/// One line of a predictions file.
///
/// `predictions` is all an evaluation needs; `raw` (every extracted
/// coordinate, duplicates included, before grounding) feeds the name-validity
/// diagnostics, and `costs` records how far each grounded name travelled.
/// The latter two default to empty so externally produced files that carry
/// only `{cve_id, predictions}` still load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub cve_id: String,
    #[serde(default)]
    pub raw: Vec<String>,
    pub predictions: Vec<LibraryName>,
    #[serde(default)]
    pub costs: Vec<CostEntry>,
}

// ---------------------------------------------------------------------------
// Checked loading
// ---------------------------------------------------------------------------

/// Report line issues to stderr: the first few in full, then a count.
pub fn warn_issues(what: &str, path: &Path, issues: &[LineIssue]) {
    const SHOWN: usize = 5;
    for issue in issues.iter().take(SHOWN) {
        eprintln!("warning: {what} `{}`: {issue}", path.display());
    }
    if issues.len() > SHOWN {
        eprintln!(
            "warning: {what} `{}`: {} more lines skipped",
            path.display(),
            issues.len() - SHOWN
        );
    }
}

/// Load the library catalog, warning about skipped lines and refusing an
/// empty result.
pub fn load_corpus_checked(path: &Path) -> Result<LibraryCorpus, CliError> {
    let loaded = load_corpus(path)
        .map_err(|e| CliError::data(format!("reading corpus `{}`: {e}", path.display())))?;
    warn_issues("corpus", path, &loaded.issues);
    if loaded.records.is_empty() {
        return Err(CliError::data(format!(
            "corpus `{}` has no usable records",
            path.display()
        )));
    }
    Ok(LibraryCorpus::build(loaded.records))
}

/// Load the vulnerability dataset, warning about skipped lines and refusing
/// an empty result.
pub fn load_dataset_checked(path: &Path) -> Result<Vec<VulnerabilityRecord>, CliError> {
    let loaded = load_dataset(path)
        .map_err(|e| CliError::data(format!("reading dataset `{}`: {e}", path.display())))?;
    warn_issues("dataset", path, &loaded.issues);
    if loaded.records.is_empty() {
        return Err(CliError::data(format!(
            "dataset `{}` has no usable records",
            path.display()
        )));
    }
    Ok(loaded.records)
}

/// Load any JSONL artifact, warning about skipped lines.
pub fn load_jsonl_checked<T: DeserializeOwned>(
    path: &Path,
    what: &str,
) -> Result<Vec<T>, CliError> {
    let loaded: jsonl::Loaded<T> = jsonl::read_path(path)
        .map_err(|e| CliError::data(format!("reading {what} `{}`: {e}", path.display())))?;
    warn_issues(what, path, &loaded.issues);
    Ok(loaded.records)
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::data(format!("creating directory `{}`: {e}", parent.display()))
            })?;
        }
    }
    Ok(())
}

/// Write one serializable item per line.
pub fn write_jsonl<'a, T, I>(path: &Path, items: I, what: &str) -> Result<usize, CliError>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    ensure_parent(path)?;
    jsonl::write_path(path, items)
        .map_err(|e| CliError::data(format!("writing {what} `{}`: {e}", path.display())))
}

/// Write a pretty-printed JSON document with a trailing newline.
pub fn write_json_pretty<T: Serialize>(
    path: &Path,
    value: &T,
    what: &str,
) -> Result<(), CliError> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::data(format!("encoding {what}: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::data(format!("writing {what} `{}`: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str, what: &str) -> Result<(), CliError> {
    ensure_parent(path)?;
    std::fs::write(path, text)
        .map_err(|e| CliError::data(format!("writing {what} `{}`: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Split round-trip
// ---------------------------------------------------------------------------

/// Persist a split as `{cve_id, part}` lines in ascending id order.
pub fn write_split(path: &Path, split: &DatasetSplit) -> Result<usize, CliError> {
    let mut lines: Vec<SplitLine> = split
        .assignments()
        .map(|(cve_id, part)| SplitLine {
            cve_id: cve_id.to_string(),
            part,
        })
        .collect();
    lines.sort_by(|a, b| a.cve_id.cmp(&b.cve_id));
    write_jsonl(path, &lines, "split")
}

/// Rebuild a split from a persisted assignment file and the full dataset.
pub fn read_split(
    path: &Path,
    records: Vec<VulnerabilityRecord>,
) -> Result<DatasetSplit, CliError> {
    let lines: Vec<SplitLine> = load_jsonl_checked(path, "split")?;
    let mut assignments = std::collections::BTreeMap::new();
    for line in lines {
        assignments.insert(line.cve_id, line.part);
    }
    DatasetSplit::from_assignments(records, &assignments)
        .map_err(|e| CliError::data(format!("split `{}`: {e}", path.display())))
}

/// The records of one split part, cloned in ascending id order so downstream
/// stages see a canonical ordering regardless of shuffle seed.
pub fn part_records(split: &DatasetSplit, part: SplitPart) -> Vec<VulnerabilityRecord> {
    let mut records = match part {
        SplitPart::Train => split.train.clone(),
        SplitPart::Validation => split.validation.clone(),
        SplitPart::Test => split.test.clone(),
    };
    records.sort_by(|a, b| a.cve_id.cmp(&b.cve_id));
    records
}

// ---------------------------------------------------------------------------
// Inference artifacts
// ---------------------------------------------------------------------------

pub fn write_prompts(path: &Path, run: &InferenceRun) -> Result<usize, CliError> {
    let lines: Vec<PromptLine> = run
        .prompts
        .iter()
        .map(|(cve_id, prompt)| PromptLine {
            cve_id: cve_id.clone(),
            prompt: prompt.clone(),
        })
        .collect();
    write_jsonl(path, &lines, "prompts")
}

pub fn write_responses(path: &Path, run: &InferenceRun) -> Result<usize, CliError> {
    write_jsonl(path, &run.response_lines(), "responses")
}

pub fn write_generation_errors(path: &Path, run: &InferenceRun) -> Result<usize, CliError> {
    let lines: Vec<ErrorLine> = run
        .errors
        .iter()
        .map(|(cve_id, error)| ErrorLine {
            cve_id: cve_id.clone(),
            error: error.clone(),
        })
        .collect();
    write_jsonl(path, &lines, "generation errors")
}

// ---------------------------------------------------------------------------
// Grounding
// ---------------------------------------------------------------------------

/// Ground one generated text: extract every coordinate, map each to its
/// nearest catalog name, and keep the full extraction list for diagnostics.
pub fn ground_text(
    cve_id: &str,
    raw_text: &str,
    corpus: &LibraryCorpus,
    weights: &GroundingWeights,
) -> PredictionRecord {
    let raw = extract_raw_names(raw_text);
    let detailed = post_process_detailed(raw_text, corpus, weights);
    let mut predictions = Vec::with_capacity(detailed.len());
    let mut costs = Vec::with_capacity(detailed.len());
    for p in detailed {
        costs.push(CostEntry {
            raw: p.raw,
            artifact: p.artifact_cost,
            group: p.group_cost,
        });
        predictions.push(p.grounded);
    }
    PredictionRecord {
        cve_id: cve_id.to_string(),
        raw,
        predictions,
        costs,
    }
}

/// Collapse prediction records into the evaluation-side lookup.
pub fn prediction_set(records: &[PredictionRecord]) -> PredictionSet {
    let mut set = PredictionSet::new();
    for record in records {
        set.insert(record.cve_id.clone(), record.predictions.clone());
    }
    set
}

/// All raw extracted coordinates across a prediction dump, in file order.
pub fn all_raw_names(records: &[PredictionRecord]) -> Vec<String> {
    records
        .iter()
        .flat_map(|record| record.raw.iter().cloned())
        .collect()
}

/// Apply a search-space restriction to the grounding catalog.
///
/// Returns `None` when the full corpus should be searched, otherwise the
/// restricted corpus. Names in the file that the corpus does not contain are
/// reported; a restriction that empties the corpus is an error.
pub fn restrict_corpus(
    corpus: &LibraryCorpus,
    space: &SearchSpace,
) -> Result<Option<LibraryCorpus>, CliError> {
    let SearchSpace::File(path) = space else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::data(format!("reading search space `{}`: {e}", path.display()))
    })?;
    let mut keep: BTreeSet<LibraryName> = BTreeSet::new();
    for (index, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let name = LibraryName::parse(line).map_err(|e| {
            CliError::data(format!(
                "search space `{}` line {}: {e}",
                path.display(),
                index + 1
            ))
        })?;
        keep.insert(name);
    }
    if keep.is_empty() {
        return Err(CliError::data(format!(
            "search space `{}` names no libraries",
            path.display()
        )));
    }
    let (restricted, unknown) = corpus.restrict(&keep);
    if !unknown.is_empty() {
        eprintln!(
            "warning: search space `{}`: {} name(s) not in the corpus (first: {})",
            path.display(),
            unknown.len(),
            unknown[0].canonical()
        );
    }
    if restricted.is_empty() {
        return Err(CliError::data(format!(
            "search space `{}` leaves no searchable libraries",
            path.display()
        )));
    }
    Ok(Some(restricted))
}

// ---------------------------------------------------------------------------
// Partition summary
// ---------------------------------------------------------------------------

/// A human- and machine-readable account of the zero-shot partition.
#[derive(Debug, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub unlabeled_test: usize,
    pub zero_shot_records: usize,
    pub full_shot_records: usize,
    pub zero_shot_record_portion: f64,
    pub zero_shot_labels: usize,
    pub test_labels: usize,
    pub zero_shot_label_portion: f64,
    pub zero_label_names: Vec<String>,
    pub zero_shot_ids: Vec<String>,
    pub full_shot_ids: Vec<String>,
}

pub fn partition_summary(
    split: &DatasetSplit,
    partition: &cve2lib::ZeroShotPartition,
) -> PartitionSummary {
    fn portion(part: usize, whole: usize) -> f64 {
        if whole == 0 {
            0.0
        } else {
            part as f64 / whole as f64
        }
    }
    let labeled = partition.v_zero.len() + partition.v_full.len();
    let test_labels = partition.test_label_count();
    let mut zero_shot_ids: Vec<String> =
        partition.v_zero.iter().map(|r| r.cve_id.clone()).collect();
    zero_shot_ids.sort();
    let mut full_shot_ids: Vec<String> =
        partition.v_full.iter().map(|r| r.cve_id.clone()).collect();
    full_shot_ids.sort();
    PartitionSummary {
        train: split.train.len(),
        validation: split.validation.len(),
        test: split.test.len(),
        unlabeled_test: partition.unlabeled_test,
        zero_shot_records: partition.v_zero.len(),
        full_shot_records: partition.v_full.len(),
        zero_shot_record_portion: portion(partition.v_zero.len(), labeled),
        zero_shot_labels: partition.l_zero.len(),
        test_labels,
        zero_shot_label_portion: portion(partition.l_zero.len(), test_labels),
        zero_label_names: partition.l_zero.iter().map(LibraryName::canonical).collect(),
        zero_shot_ids,
        full_shot_ids,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cve2lib::dataset::SplitSpec;
    use cve2lib::LibraryRecord;

    fn name(text: &str) -> LibraryName {
        LibraryName::parse(text).unwrap()
    }

    fn record(cve_id: &str, description: &str, labels: &[&str]) -> VulnerabilityRecord {
        VulnerabilityRecord {
            cve_id: cve_id.to_string(),
            description: description.to_string(),
            labels: labels.iter().map(|l| name(l)).collect(),
        }
    }

    fn small_corpus() -> LibraryCorpus {
        LibraryCorpus::build(vec![
            LibraryRecord {
                name: name("maven:com.example:alpha"),
                description: "alpha library".to_string(),
            },
            LibraryRecord {
                name: name("maven:com.example:beta"),
                description: "beta library".to_string(),
            },
            LibraryRecord {
                name: name("maven:org.other:gamma"),
                description: "gamma library".to_string(),
            },
        ])
    }

    #[test]
    fn split_round_trips_through_file() {
        let records: Vec<VulnerabilityRecord> = (0..10)
            .map(|i| record(&format!("CVE-2024-{i:04}"), "text", &[]))
            .collect();
        let split =
            cve2lib::dataset::split_dataset(records.clone(), SplitSpec::default(), 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("split.jsonl");
        write_split(&path, &split).unwrap();
        let rebuilt = read_split(&path, records).unwrap();
        fn ids(part: &[VulnerabilityRecord]) -> Vec<&str> {
            part.iter().map(|r| r.cve_id.as_str()).collect()
        }
        let mut expected_train = ids(&split.train);
        let mut actual_train = ids(&rebuilt.train);
        expected_train.sort();
        actual_train.sort();
        assert_eq!(actual_train, expected_train);
        assert_eq!(rebuilt.validation.len(), split.validation.len());
        assert_eq!(rebuilt.test.len(), split.test.len());
    }

    #[test]
    fn ground_text_keeps_raw_and_costs_aligned() {
        let corpus = small_corpus();
        let record = ground_text(
            "CVE-1",
            "Affected: maven:com.example:alpha and maven:com.example:alpha again, \
             plus maven:org.other:gama.",
            &corpus,
            &GroundingWeights::default(),
        );
        // Extraction keeps the duplicate; grounding drops it.
        assert_eq!(record.raw.len(), 3);
        assert_eq!(record.predictions.len(), 2);
        assert_eq!(record.costs.len(), 2);
        assert_eq!(record.predictions[0], name("maven:com.example:alpha"));
        assert_eq!(record.predictions[1], name("maven:org.other:gamma"));
        assert_eq!(record.costs[1].raw, "maven:org.other:gama");
        assert!(record.costs[1].artifact > 0);
    }

    #[test]
    fn minimal_prediction_lines_load_without_raw_or_costs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pred.jsonl");
        std::fs::write(
            &path,
            "{\"cve_id\":\"CVE-1\",\"predictions\":[\"maven:com.example:alpha\"]}\n",
        )
        .unwrap();
        let records: Vec<PredictionRecord> = load_jsonl_checked(&path, "predictions").unwrap();
        assert_eq!(records.len(), 1);
        assert!(records[0].raw.is_empty());
        assert!(records[0].costs.is_empty());
        let set = prediction_set(&records);
        assert_eq!(set.get("CVE-1").unwrap().len(), 1);
    }

    #[test]
    fn search_space_file_restricts_the_corpus() {
        let corpus = small_corpus();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.txt");
        std::fs::write(
            &path,
            "# shortlist\nmaven:com.example:alpha\n\nmaven:com.example:missing\n",
        )
        .unwrap();
        let restricted = restrict_corpus(&corpus, &SearchSpace::File(path))
            .unwrap()
            .unwrap();
        assert_eq!(restricted.len(), 1);
        assert!(restricted.contains_name(&name("maven:com.example:alpha")));
    }

    #[test]
    fn search_space_all_keeps_the_full_corpus() {
        let corpus = small_corpus();
        assert!(restrict_corpus(&corpus, &SearchSpace::All).unwrap().is_none());
    }

    #[test]
    fn empty_restriction_is_an_error() {
        let corpus = small_corpus();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.txt");
        std::fs::write(&path, "maven:not.here:at-all\n").unwrap();
        let error = restrict_corpus(&corpus, &SearchSpace::File(path)).unwrap_err();
        assert_eq!(error.exit_code(), 2);
    }

    #[test]
    fn partition_summary_counts_and_portions() {
        let split = DatasetSplit {
            train: vec![record("CVE-1", "a", &["maven:g:seen"])],
            validation: vec![],
            test: vec![
                record("CVE-2", "b", &["maven:g:seen"]),
                record("CVE-3", "c", &["maven:g:new"]),
                record("CVE-4", "d", &[]),
            ],
        };
        let partition = cve2lib::dataset::zero_shot_partition(&split);
        let summary = partition_summary(&split, &partition);
        assert_eq!(summary.test, 3);
        assert_eq!(summary.unlabeled_test, 1);
        assert_eq!(summary.zero_shot_records, 1);
        assert_eq!(summary.full_shot_records, 1);
        assert!((summary.zero_shot_record_portion - 0.5).abs() < 1e-12);
        assert_eq!(summary.zero_shot_labels, 1);
        assert_eq!(summary.test_labels, 2);
        assert_eq!(summary.zero_label_names, vec!["maven:g:new".to_string()]);
        assert_eq!(summary.zero_shot_ids, vec!["CVE-3".to_string()]);
    }
}
