//! Vulnerability records, dataset splitting, and the zero-shot partition.
//!
//! A dataset is a JSONL file of `{cve_id, description, labels}` lines where
//! `labels` lists the affected library coordinates. Records with no labels
//! are legitimate — they act as negatives — but they are excluded from
//! metric averages downstream, so the partition keeps them counted
//! separately rather than silently dropped.
//!
//! Splitting shuffles the records with a seeded PRNG *after* sorting them
//! by CVE id, so the same seed produces the same split no matter how the
//! input file was ordered.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::LibraryName;
use crate::jsonl::{self, LineIssue, Loaded};

/// One vulnerability: an id, its description, and the affected libraries.
///
/// Labels are kept as a set ordered by canonical name, which is also the
/// order they are rendered in prompts and consumed by the ground-truth
/// oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnerabilityRecord {
    pub cve_id: String,
    pub description: String,
    #[serde(default)]
    pub labels: BTreeSet<LibraryName>,
}

/// Load a vulnerability dataset from a JSONL file.
///
/// Malformed lines (bad JSON, unparsable labels) are reported with line
/// numbers and skipped. A line whose `cve_id` repeats an earlier one is
/// also skipped and reported; the first occurrence wins.
pub fn load_dataset(path: impl AsRef<Path>) -> io::Result<Loaded<VulnerabilityRecord>> {
    read_dataset_issues(jsonl::read_path(path)?)
}

/// Load vulnerability records from any reader. See [`load_dataset`].
pub fn read_dataset(reader: impl io::BufRead) -> io::Result<Loaded<VulnerabilityRecord>> {
    read_dataset_issues(jsonl::read(reader)?)
}

fn read_dataset_issues(
    loaded: Loaded<VulnerabilityRecord>,
) -> io::Result<Loaded<VulnerabilityRecord>> {
    let mut seen: HashSet<String> = HashSet::with_capacity(loaded.records.len());
    let mut records = Vec::with_capacity(loaded.records.len());
    let mut issues = loaded.issues;
    // Line numbers for duplicates are unrecoverable after parsing (parse
    // issues already consumed some lines), so report them by id instead.
    for record in loaded.records {
        if seen.insert(record.cve_id.clone()) {
            records.push(record);
        } else {
            issues.push(LineIssue {
                line: 0,
                message: format!("duplicate cve_id `{}` skipped", record.cve_id),
            });
        }
    }
    Ok(Loaded { records, issues })
}

/// Which of the three splits a record landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPart {
    Train,
    Validation,
    Test,
}

impl SplitPart {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitPart::Train => "train",
            SplitPart::Validation => "validation",
            SplitPart::Test => "test",
        }
    }
}

impl fmt::Display for SplitPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitPart {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(SplitPart::Train),
            "validation" => Ok(SplitPart::Validation),
            "test" => Ok(SplitPart::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

/// How to size the three splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSpec {
    /// Proportional sizes, floor-rounded, with the remainder going to train.
    Ratios([u32; 3]),
    /// Exact sizes; must sum to the number of records.
    Sizes([usize; 3]),
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Ratios([3, 1, 1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("cannot split an empty dataset")]
    EmptyDataset,
    #[error("invalid split spec: {0}")]
    InvalidSpec(String),
}

/// The train/validation/test partition of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<VulnerabilityRecord>,
    pub validation: Vec<VulnerabilityRecord>,
    pub test: Vec<VulnerabilityRecord>,
}

impl DatasetSplit {
    /// (cve_id, part) pairs for every record, ordered train → validation →
    /// test; callers that persist assignments usually sort them afterwards.
    pub fn assignments(&self) -> impl Iterator<Item = (&str, SplitPart)> {
        fn tag(
            records: &[VulnerabilityRecord],
            part: SplitPart,
        ) -> impl Iterator<Item = (&str, SplitPart)> {
            records.iter().map(move |r| (r.cve_id.as_str(), part))
        }
        tag(&self.train, SplitPart::Train)
            .chain(tag(&self.validation, SplitPart::Validation))
            .chain(tag(&self.test, SplitPart::Test))
    }

    /// Rebuild a split from records plus a persisted assignment map.
    ///
    /// Every record must be assigned and every assignment must name a known
    /// record; anything else is a data error.
    pub fn from_assignments(
        records: Vec<VulnerabilityRecord>,
        assignments: &BTreeMap<String, SplitPart>,
    ) -> Result<DatasetSplit, SplitError> {
        let known: HashSet<&str> = records.iter().map(|r| r.cve_id.as_str()).collect();
        for cve_id in assignments.keys() {
            if !known.contains(cve_id.as_str()) {
                return Err(SplitError::InvalidSpec(format!(
                    "assignment names unknown cve_id `{cve_id}`"
                )));
            }
        }
        let mut split = DatasetSplit {
            train: Vec::new(),
            validation: Vec::new(),
            test: Vec::new(),
        };
        for record in records {
            match assignments.get(&record.cve_id) {
                Some(SplitPart::Train) => split.train.push(record),
                Some(SplitPart::Validation) => split.validation.push(record),
                Some(SplitPart::Test) => split.test.push(record),
                None => {
                    return Err(SplitError::InvalidSpec(format!(
                        "record `{}` has no split assignment",
                        record.cve_id
                    )))
                }
            }
        }
        Ok(split)
    }
}

/// Split a dataset into train/validation/test.
///
/// Records are sorted by `cve_id` and then shuffled with a ChaCha PRNG
/// seeded from `seed`, so the result depends only on the record set and the
/// seed — not on file order. With [`SplitSpec::Ratios`] the validation and
/// test sizes are floored and the remainder goes to train.
pub fn split_dataset(
    mut records: Vec<VulnerabilityRecord>,
    spec: SplitSpec,
    seed: u64,
) -> Result<DatasetSplit, SplitError> {
    if records.is_empty() {
        return Err(SplitError::EmptyDataset);
    }
    let total = records.len();
    let (n_train, n_validation, n_test) = match spec {
        SplitSpec::Ratios(ratios) => {
            let sum: u64 = ratios.iter().map(|&r| u64::from(r)).sum();
            if sum == 0 {
                return Err(SplitError::InvalidSpec("ratios sum to zero".into()));
            }
            let share = |r: u32| (total as u64 * u64::from(r) / sum) as usize;
            let n_validation = share(ratios[1]);
            let n_test = share(ratios[2]);
            let n_train = total - n_validation - n_test;
            (n_train, n_validation, n_test)
        }
        SplitSpec::Sizes(sizes) => {
            let sum: usize = sizes.iter().sum();
            if sum != total {
                return Err(SplitError::InvalidSpec(format!(
                    "sizes sum to {sum} but the dataset has {total} records"
                )));
            }
            (sizes[0], sizes[1], sizes[2])
        }
    };

    records.sort_unstable_by(|a, b| a.cve_id.cmp(&b.cve_id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records.shuffle(&mut rng);

    let mut rest = records.split_off(n_train);
    let test = rest.split_off(n_validation);
    debug_assert_eq!(test.len(), n_test);
    Ok(DatasetSplit {
        train: records,
        validation: rest,
        test,
    })
}

/// The test set divided by whether a record's labels were seen in training.
///
/// `l_zero` is the set of labels that occur in the test set but never in
/// training. A labeled test record whose labels all fall in `l_zero` lands
/// in `v_zero`; a labeled record with at least one trained label lands in
/// `v_full`. Unlabeled test records belong to neither and are only counted.
#[derive(Debug, Clone)]
pub struct ZeroShotPartition {
    pub l_zero: BTreeSet<LibraryName>,
    pub v_zero: Vec<VulnerabilityRecord>,
    pub v_full: Vec<VulnerabilityRecord>,
    pub unlabeled_test: usize,
}

impl ZeroShotPartition {
    /// Distinct labels across the test set.
    pub fn test_label_count(&self) -> usize {
        let mut labels: BTreeSet<&LibraryName> = BTreeSet::new();
        for record in self.v_zero.iter().chain(&self.v_full) {
            labels.extend(record.labels.iter());
        }
        labels.len()
    }
}

/// Partition the test split by zero-shot status. See [`ZeroShotPartition`].
pub fn zero_shot_partition(split: &DatasetSplit) -> ZeroShotPartition {
    let trained: BTreeSet<&LibraryName> =
        split.train.iter().flat_map(|r| r.labels.iter()).collect();
    let l_zero: BTreeSet<LibraryName> = split
        .test
        .iter()
        .flat_map(|r| r.labels.iter())
        .filter(|l| !trained.contains(l))
        .cloned()
        .collect();

    let mut v_zero = Vec::new();
    let mut v_full = Vec::new();
    let mut unlabeled_test = 0;
    for record in &split.test {
        if record.labels.is_empty() {
            unlabeled_test += 1;
        } else if record.labels.iter().all(|l| l_zero.contains(l)) {
            v_zero.push(record.clone());
        } else {
            v_full.push(record.clone());
        }
    }
    ZeroShotPartition {
        l_zero,
        v_zero,
        v_full,
        unlabeled_test,
    }
}
