//! Prompt construction: fixed template strings that merge vulnerability
//! descriptions with recommended library names, used both to export
//! fine-tuning data and to build inference prompts.
//!
//! The default wording (including its slightly odd grammar, e.g. "Top 1
//! search result are") is frozen verbatim: models fine-tuned on these exact
//! strings only reproduce their behavior if inference prompts match
//! byte-for-byte. A template file can override any piece.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{LibraryName, LibraryRecord};
use crate::dataset::VulnerabilityRecord;
use crate::jsonl;
use crate::retriever::Recommendation;

const UNSUPERVISED_HEADER: &str = "Below is a Java lib description";
const SUPERVISED_HEADER: &str =
    "Below is a Java vulnerability description. Please identify the software name affected by it";
const INPUT_PREFIX: &str = "Input: ";
const SEARCH_HEADER: &str = "Top {k} search result are";
const UNSUPERVISED_TARGET: &str = "This package's name is {name}.";
const SUPERVISED_TARGET: &str = "The affected packages is {names}.";

/// One fine-tuning example; `target` is empty for inference-time prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptExample {
    pub prompt: String,
    pub target: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("record has an empty description")]
    EmptyDescription,
    #[error("record has no labels")]
    NoLabels,
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("template file is not valid TOML: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("template `{field}` must contain the `{placeholder}` placeholder")]
    MissingPlaceholder {
        field: &'static str,
        placeholder: &'static str,
    },
}

/// Counts from a fine-tuning export: lines written and inputs skipped for
/// missing descriptions or labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExportReport {
    pub written: usize,
    pub skipped: usize,
}

/// The template strings for every generated text.
///
/// `search_header` must contain `{k}` (replaced by the number of
/// recommendations), `unsupervised_target` must contain `{name}`, and
/// `supervised_target` must contain `{names}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptTemplates {
    pub unsupervised_header: String,
    pub supervised_header: String,
    pub input_prefix: String,
    pub search_header: String,
    pub unsupervised_target: String,
    pub supervised_target: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            unsupervised_header: UNSUPERVISED_HEADER.to_string(),
            supervised_header: SUPERVISED_HEADER.to_string(),
            input_prefix: INPUT_PREFIX.to_string(),
            search_header: SEARCH_HEADER.to_string(),
            unsupervised_target: UNSUPERVISED_TARGET.to_string(),
            supervised_target: SUPERVISED_TARGET.to_string(),
        }
    }
}

impl PromptTemplates {
    /// Load overrides from a TOML file; absent keys keep their defaults.
    pub fn from_file(path: impl AsRef<Path>) -> Result<PromptTemplates, TemplateError> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let templates: PromptTemplates = toml::from_str(&text)?;
        templates.validate()?;
        Ok(templates)
    }

    /// Check that every replaceable template keeps its placeholder.
    pub fn validate(&self) -> Result<(), TemplateError> {
        let required = [
            ("search_header", &self.search_header, "{k}"),
            ("unsupervised_target", &self.unsupervised_target, "{name}"),
            ("supervised_target", &self.supervised_target, "{names}"),
        ];
        for (field, value, placeholder) in required {
            if !value.contains(placeholder) {
                return Err(TemplateError::MissingPlaceholder { field, placeholder });
            }
        }
        Ok(())
    }

    /// A description→name example teaching what each library is called.
    pub fn unsupervised_example(
        &self,
        record: &LibraryRecord,
    ) -> Result<PromptExample, PromptError> {
        if record.description.trim().is_empty() {
            return Err(PromptError::EmptyDescription);
        }
        Ok(PromptExample {
            prompt: format!(
                "{}\n{}{}",
                self.unsupervised_header, self.input_prefix, record.description
            ),
            target: self
                .unsupervised_target
                .replace("{name}", &record.name.canonical()),
        })
    }

    /// The inference prompt: header, description, and — when any are given —
    /// a search-result block listing the recommended names in rank order.
    pub fn build_prompt(&self, vuln: &VulnerabilityRecord, recs: &[Recommendation]) -> String {
        let mut prompt = format!(
            "{}\n{}{}",
            self.supervised_header, self.input_prefix, vuln.description
        );
        if !recs.is_empty() {
            prompt.push('\n');
            prompt.push_str(&self.search_header.replace("{k}", &recs.len().to_string()));
            for rec in recs {
                prompt.push('\n');
                prompt.push_str(&rec.name.canonical());
            }
        }
        prompt
    }

    /// A prompt→answer example for a labeled vulnerability. Labels join
    /// with ", " in canonical order so the name extractor recovers them
    /// losslessly from the target.
    pub fn supervised_example(
        &self,
        vuln: &VulnerabilityRecord,
        recs: &[Recommendation],
    ) -> Result<PromptExample, PromptError> {
        if vuln.labels.is_empty() {
            return Err(PromptError::NoLabels);
        }
        let names = vuln
            .labels
            .iter()
            .map(LibraryName::canonical)
            .collect::<Vec<_>>()
            .join(", ");
        Ok(PromptExample {
            prompt: self.build_prompt(vuln, recs),
            target: self.supervised_target.replace("{names}", &names),
        })
    }

    /// The top-ranked name of a prompt's search-result block, if present.
    ///
    /// Recognizes the block by matching a line against `search_header` with
    /// an all-digit count in place of `{k}`; the next non-empty line is the
    /// rank-1 name.
    pub fn first_recommended_name(&self, prompt: &str) -> Option<String> {
        let (head, tail) = self.search_header.split_once("{k}")?;
        let mut lines = prompt.lines();
        while let Some(line) = lines.next() {
            let count = match line.strip_prefix(head).and_then(|r| r.strip_suffix(tail)) {
                Some(count) => count,
                None => continue,
            };
            if !count.is_empty() && count.chars().all(|c| c.is_ascii_digit()) {
                return lines
                    .find(|l| !l.trim().is_empty())
                    .map(|l| l.trim().to_string());
            }
        }
        None
    }

    /// Write description→name examples as JSONL `{prompt, target}`; records
    /// with empty descriptions are skipped and counted.
    pub fn export_unsupervised(
        &self,
        records: &[LibraryRecord],
        path: impl AsRef<Path>,
    ) -> io::Result<ExportReport> {
        let mut report = ExportReport::default();
        let mut examples = Vec::new();
        for record in records {
            match self.unsupervised_example(record) {
                Ok(example) => examples.push(example),
                Err(_) => report.skipped += 1,
            }
        }
        report.written = jsonl::write_path(path, &examples)?;
        Ok(report)
    }

    /// Write prompt→answer examples as JSONL `{prompt, target}`; unlabeled
    /// records have no answer to teach and are skipped and counted.
    pub fn export_supervised(
        &self,
        records: &[VulnerabilityRecord],
        recommendations: &BTreeMap<String, Vec<Recommendation>>,
        path: impl AsRef<Path>,
    ) -> io::Result<ExportReport> {
        let mut report = ExportReport::default();
        let mut examples = Vec::new();
        for record in records {
            let recs = recommendations
                .get(&record.cve_id)
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            match self.supervised_example(record, recs) {
                Ok(example) => examples.push(example),
                Err(_) => report.skipped += 1,
            }
        }
        report.written = jsonl::write_path(path, &examples)?;
        Ok(report)
    }
}
