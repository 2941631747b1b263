//! The library catalog: coordinate names and the indexed corpus.
//!
//! A library is identified by a coordinate of the form
//! `prefix:group_id:artifact_id` (for Maven artifacts the prefix is
//! `maven`). Coordinate comparison is case-insensitive, which we get by
//! lowercasing once at parse time; everything downstream then compares with
//! plain equality.
//!
//! [`LibraryCorpus`] owns the deduplicated records plus the lookup
//! structures the rest of the crate needs: the set of canonical names, the
//! sorted artifact list, and the artifact → group-ids map used when
//! snapping generated names onto the catalog.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::jsonl::{self, LineIssue};

/// Why a coordinate string was rejected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed library name `{input}`: {reason}")]
pub struct MalformedName {
    pub input: String,
    pub reason: String,
}

impl MalformedName {
    fn new(input: &str, reason: impl Into<String>) -> Self {
        MalformedName {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

/// A validated, lowercased library coordinate.
///
/// The canonical rendering is `prefix:group_id:artifact_id`. Equality,
/// hashing, and ordering all agree with comparing canonical renderings;
/// ordering is used for deterministic tie-breaking throughout the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LibraryName {
    prefix: String,
    group_id: String,
    artifact_id: String,
}

impl LibraryName {
    /// Build a name from its three segments, validating and lowercasing each.
    pub fn new(prefix: &str, group_id: &str, artifact_id: &str) -> Result<Self, MalformedName> {
        let rendered = format!("{prefix}:{group_id}:{artifact_id}");
        for (label, segment) in [
            ("prefix", prefix),
            ("group id", group_id),
            ("artifact id", artifact_id),
        ] {
            if segment.is_empty() {
                return Err(MalformedName::new(&rendered, format!("empty {label}")));
            }
            if segment.contains(':') {
                return Err(MalformedName::new(
                    &rendered,
                    format!("{label} contains a colon"),
                ));
            }
            if segment.chars().any(char::is_whitespace) {
                return Err(MalformedName::new(
                    &rendered,
                    format!("{label} contains whitespace"),
                ));
            }
        }
        Ok(LibraryName {
            prefix: prefix.to_lowercase(),
            group_id: group_id.to_lowercase(),
            artifact_id: artifact_id.to_lowercase(),
        })
    }

    /// Parse a coordinate string of the form `prefix:group_id:artifact_id`.
    ///
    /// Surrounding whitespace is tolerated; the three segments must be
    /// non-empty and free of internal whitespace. The result is lowercased.
    pub fn parse(text: &str) -> Result<Self, MalformedName> {
        let trimmed = text.trim();
        let mut parts = trimmed.split(':');
        let (prefix, group, artifact) = match (parts.next(), parts.next(), parts.next()) {
            (Some(p), Some(g), Some(a)) => (p, g, a),
            _ => {
                return Err(MalformedName::new(
                    trimmed,
                    "expected prefix:group_id:artifact_id",
                ))
            }
        };
        if parts.next().is_some() {
            return Err(MalformedName::new(
                trimmed,
                "expected exactly three colon-separated segments",
            ));
        }
        LibraryName::new(prefix, group, artifact)
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn group_id(&self) -> &str {
        &self.group_id
    }

    pub fn artifact_id(&self) -> &str {
        &self.artifact_id
    }

    /// The canonical rendering `prefix:group_id:artifact_id`.
    pub fn canonical(&self) -> String {
        format!("{}:{}:{}", self.prefix, self.group_id, self.artifact_id)
    }

    /// The bytes of the canonical rendering, without allocating it.
    fn canonical_bytes(&self) -> impl Iterator<Item = u8> + '_ {
        self.prefix
            .bytes()
            .chain(Some(b':'))
            .chain(self.group_id.bytes())
            .chain(Some(b':'))
            .chain(self.artifact_id.bytes())
    }
}

impl fmt::Display for LibraryName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.prefix, self.group_id, self.artifact_id)
    }
}

impl FromStr for LibraryName {
    type Err = MalformedName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LibraryName::parse(s)
    }
}

impl Ord for LibraryName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_bytes().cmp(other.canonical_bytes())
    }
}

impl PartialOrd for LibraryName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for LibraryName {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical())
    }
}

impl<'de> Deserialize<'de> for LibraryName {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        LibraryName::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// One catalog entry: a coordinate plus its natural-language description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryRecord {
    pub name: LibraryName,
    pub description: String,
}

/// The deduplicated library catalog with its lookup structures.
#[derive(Debug, Clone)]
pub struct LibraryCorpus {
    records: Vec<LibraryRecord>,
    name_set: HashSet<String>,
    artifacts: Vec<String>,
    artifact_set: HashSet<String>,
    group_set: HashSet<String>,
    groups: HashMap<String, Vec<String>>,
    merged_duplicates: usize,
}

impl LibraryCorpus {
    /// Build a corpus from records, merging duplicate names.
    ///
    /// When the same canonical name appears more than once, the first
    /// record's description wins and the repeat is counted in
    /// [`merged_duplicates`](Self::merged_duplicates). The artifact list and
    /// the per-artifact group lists are kept sorted so lookups that break
    /// ties lexicographically can scan them in order.
    pub fn build(records: Vec<LibraryRecord>) -> Self {
        let mut kept: Vec<LibraryRecord> = Vec::with_capacity(records.len());
        let mut name_set = HashSet::with_capacity(records.len());
        let mut merged_duplicates = 0;
        for record in records {
            if name_set.insert(record.name.canonical()) {
                kept.push(record);
            } else {
                merged_duplicates += 1;
            }
        }

        let mut groups: HashMap<String, Vec<String>> = HashMap::new();
        for record in &kept {
            let entry = groups
                .entry(record.name.artifact_id().to_string())
                .or_default();
            let group = record.name.group_id();
            if !entry.iter().any(|g| g == group) {
                entry.push(group.to_string());
            }
        }
        for list in groups.values_mut() {
            list.sort_unstable();
        }

        let mut artifacts: Vec<String> = groups.keys().cloned().collect();
        artifacts.sort_unstable();
        let artifact_set = artifacts.iter().cloned().collect();
        let group_set = kept
            .iter()
            .map(|record| record.name.group_id().to_string())
            .collect();

        LibraryCorpus {
            records: kept,
            name_set,
            artifacts,
            artifact_set,
            group_set,
            groups,
            merged_duplicates,
        }
    }

    pub fn records(&self) -> &[LibraryRecord] {
        &self.records
    }

    /// Number of distinct libraries in the corpus.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// How many duplicate records were merged away at build time.
    pub fn merged_duplicates(&self) -> usize {
        self.merged_duplicates
    }

    /// Whether a name is present, by canonical rendering.
    pub fn contains_name(&self, name: &LibraryName) -> bool {
        self.name_set.contains(&name.canonical())
    }

    /// All distinct artifact ids, sorted ascending.
    pub fn artifacts(&self) -> &[String] {
        &self.artifacts
    }

    pub fn contains_artifact(&self, artifact_id: &str) -> bool {
        self.artifact_set.contains(artifact_id)
    }

    /// Whether any library in the corpus uses this group id.
    pub fn contains_group(&self, group_id: &str) -> bool {
        self.group_set.contains(group_id)
    }

    /// The group ids that occur together with `artifact_id`, sorted ascending.
    pub fn groups_for(&self, artifact_id: &str) -> Option<&[String]> {
        self.groups.get(artifact_id).map(Vec::as_slice)
    }

    /// Every (artifact, groups) pair; iteration order is unspecified.
    pub fn group_lists(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.groups.iter().map(|(a, g)| (a.as_str(), g.as_slice()))
    }

    /// Keep only the libraries named in `keep`.
    ///
    /// Returns the restricted corpus (with all lookup structures rebuilt)
    /// and the names from `keep` that were not present in the corpus.
    pub fn restrict(&self, keep: &BTreeSet<LibraryName>) -> (LibraryCorpus, Vec<LibraryName>) {
        let keep_canonical: HashSet<String> = keep.iter().map(LibraryName::canonical).collect();
        let kept: Vec<LibraryRecord> = self
            .records
            .iter()
            .filter(|r| keep_canonical.contains(&r.name.canonical()))
            .cloned()
            .collect();
        let unknown: Vec<LibraryName> = keep
            .iter()
            .filter(|n| !self.name_set.contains(&n.canonical()))
            .cloned()
            .collect();
        (LibraryCorpus::build(kept), unknown)
    }
}

/// Load a library catalog from a JSONL file of `{name, description}` lines.
///
/// Lines that are not valid JSON or whose name does not parse are reported
/// with their line numbers and skipped; only I/O failures abort.
pub fn load_corpus(path: impl AsRef<Path>) -> io::Result<jsonl::Loaded<LibraryRecord>> {
    jsonl::read_path(path)
}

/// Load corpus records from any reader. See [`load_corpus`].
pub fn read_corpus(reader: impl io::BufRead) -> io::Result<jsonl::Loaded<LibraryRecord>> {
    jsonl::read(reader)
}

/// Convenience: issues from a corpus load, rendered one per line.
pub fn describe_issues(issues: &[LineIssue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}
