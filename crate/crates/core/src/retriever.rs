//! TF-IDF retrieval: rank catalog libraries against a vulnerability text.
//!
//! Each library becomes one document: its description plus the tokens of
//! its group and artifact ids (the constant `maven` prefix carries no
//! signal and is left out). Folding the name in keeps libraries with empty
//! descriptions retrievable by name fragments.
//!
//! Weighting: document term frequency is sublinear (`1 + ln count`),
//! inverse document frequency is smoothed (`ln((N+1)/(df+1)) + 1`, always
//! positive), and both document and query vectors are L2-normalized so the
//! score is a plain dot product — a cosine in `[0, 1]`. Query term
//! frequency stays linear (the raw count): normalization then cancels any
//! uniform repetition of the query text, so scores — not just rankings —
//! are invariant under it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{LibraryCorpus, LibraryName};
use crate::jsonl::{self, LineIssue};

const INDEX_FORMAT: &str = "tfidf-index";
const INDEX_VERSION: u32 = 1;

/// Lowercased terms of a text: split on non-alphanumeric characters and on
/// camelCase boundaries, dropping terms shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    fn push(tokens: &mut Vec<String>, chars: &[char]) {
        if chars.len() >= 2 {
            tokens.push(chars.iter().flat_map(|c| c.to_lowercase()).collect());
        }
    }

    let mut tokens = Vec::new();
    for word in text.split(|c: char| !c.is_alphanumeric()) {
        if word.is_empty() {
            continue;
        }
        let chars: Vec<char> = word.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let camel = chars[i].is_uppercase() && chars[i - 1].is_lowercase();
            // An uppercase run followed by lowercase starts a new word at
            // the run's last letter: "HTTPServer" → "HTTP" + "Server".
            let acronym_end = chars[i].is_lowercase()
                && chars[i - 1].is_uppercase()
                && i >= 2
                && chars[i - 2].is_uppercase();
            if camel {
                push(&mut tokens, &chars[start..i]);
                start = i;
            } else if acronym_end && start < i - 1 {
                push(&mut tokens, &chars[start..i - 1]);
                start = i - 1;
            }
        }
        push(&mut tokens, &chars[start..]);
    }
    tokens
}

/// One ranked candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub name: LibraryName,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("the index contains no documents")]
pub struct EmptyIndex;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("index file is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("not an index file (format `{found}`)")]
    Format { found: String },
    #[error("unsupported index version {found} (expected {INDEX_VERSION})")]
    Version { found: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IndexedDocument {
    name: LibraryName,
    /// `(term id, weight)` pairs sorted by term id; unit L2 norm unless the
    /// document had no usable terms at all.
    vector: Vec<(u32, f64)>,
}

/// The persisted form: a versioned envelope around terms and documents.
#[derive(Serialize, Deserialize)]
struct IndexFile {
    format: String,
    version: u32,
    terms: Vec<String>,
    idf: Vec<f64>,
    docs: Vec<IndexedDocument>,
}

/// A TF-IDF index over a library corpus.
#[derive(Debug, Clone)]
pub struct TfidfIndex {
    terms: Vec<String>,
    term_ids: HashMap<String, u32>,
    idf: Vec<f64>,
    docs: Vec<IndexedDocument>,
    /// term id → `(doc index, weight)` pairs, doc indices ascending.
    postings: Vec<Vec<(u32, f64)>>,
}

impl TfidfIndex {
    /// Index every record of `corpus`, in record order.
    pub fn build(corpus: &LibraryCorpus) -> TfidfIndex {
        let doc_tokens: Vec<Vec<String>> = corpus
            .records()
            .iter()
            .map(|record| {
                let mut tokens = tokenize(&record.description);
                tokens.extend(tokenize(record.name.group_id()));
                tokens.extend(tokenize(record.name.artifact_id()));
                tokens
            })
            .collect();

        // Term ids are assigned in sorted term order, so the index contents
        // are a pure function of the corpus.
        let vocabulary: BTreeSet<&str> = doc_tokens
            .iter()
            .flat_map(|tokens| tokens.iter().map(String::as_str))
            .collect();
        let terms: Vec<String> = vocabulary.into_iter().map(str::to_string).collect();
        let term_ids: HashMap<String, u32> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();

        let mut df = vec![0u32; terms.len()];
        let counts: Vec<BTreeMap<u32, u32>> = doc_tokens
            .iter()
            .map(|tokens| {
                let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
                for token in tokens {
                    *counts.entry(term_ids[token.as_str()]).or_default() += 1;
                }
                for &tid in counts.keys() {
                    df[tid as usize] += 1;
                }
                counts
            })
            .collect();

        let n_docs = doc_tokens.len() as f64;
        let idf: Vec<f64> = df
            .iter()
            .map(|&d| ((n_docs + 1.0) / (f64::from(d) + 1.0)).ln() + 1.0)
            .collect();

        let docs: Vec<IndexedDocument> = corpus
            .records()
            .iter()
            .zip(counts)
            .map(|(record, counts)| {
                let mut vector: Vec<(u32, f64)> = counts
                    .into_iter()
                    .map(|(tid, count)| {
                        let tf = 1.0 + f64::from(count).ln();
                        (tid, tf * idf[tid as usize])
                    })
                    .collect();
                normalize(&mut vector);
                IndexedDocument {
                    name: record.name.clone(),
                    vector,
                }
            })
            .collect();

        TfidfIndex::assemble(terms, term_ids, idf, docs)
    }

    fn assemble(
        terms: Vec<String>,
        term_ids: HashMap<String, u32>,
        idf: Vec<f64>,
        docs: Vec<IndexedDocument>,
    ) -> TfidfIndex {
        let mut postings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); terms.len()];
        for (doc_idx, doc) in docs.iter().enumerate() {
            for &(tid, weight) in &doc.vector {
                postings[tid as usize].push((doc_idx as u32, weight));
            }
        }
        TfidfIndex {
            terms,
            term_ids,
            idf,
            docs,
            postings,
        }
    }

    /// Number of indexed documents.
    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Number of distinct terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// The smoothed inverse document frequency of a term, if indexed.
    pub fn idf_of(&self, term: &str) -> Option<f64> {
        self.term_ids.get(term).map(|&tid| self.idf[tid as usize])
    }

    fn query_vector(&self, description: &str) -> Vec<(u32, f64)> {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for token in tokenize(description) {
            if let Some(&tid) = self.term_ids.get(token.as_str()) {
                *counts.entry(tid).or_default() += 1;
            }
        }
        let mut vector: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(tid, count)| (tid, f64::from(count) * self.idf[tid as usize]))
            .collect();
        normalize(&mut vector);
        vector
    }

    /// The `k` best-scoring libraries for a vulnerability description.
    ///
    /// Libraries sharing no term with the query are omitted, so the result
    /// may be shorter than `k` (or empty). Ties are broken by ascending
    /// canonical name, which makes the ranking deterministic and gives the
    /// top-k prefix property: `recommend(k)` is a prefix of `recommend(k')`
    /// for `k < k'`.
    pub fn recommend(
        &self,
        description: &str,
        k: usize,
    ) -> Result<Vec<Recommendation>, EmptyIndex> {
        assert!(k >= 1, "k must be at least 1");
        if self.docs.is_empty() {
            return Err(EmptyIndex);
        }
        let query = self.query_vector(description);
        if query.is_empty() {
            return Ok(Vec::new());
        }
        // Term-major accumulation in ascending term order keeps float
        // summation order fixed, so scores never depend on map iteration.
        let mut scores = vec![0.0f64; self.docs.len()];
        for &(tid, query_weight) in &query {
            for &(doc_idx, doc_weight) in &self.postings[tid as usize] {
                scores[doc_idx as usize] += query_weight * doc_weight;
            }
        }
        let mut ranked: Vec<(usize, f64)> = scores
            .into_iter()
            .enumerate()
            .filter(|&(_, score)| score > 0.0)
            .collect();
        ranked.sort_unstable_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.docs[a.0].name.cmp(&self.docs[b.0].name))
        });
        ranked.truncate(k);
        Ok(ranked
            .into_iter()
            .map(|(doc_idx, score)| Recommendation {
                name: self.docs[doc_idx].name.clone(),
                score: score.min(1.0),
            })
            .collect())
    }

    /// Write the index as a versioned JSON file.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IndexError> {
        let file = IndexFile {
            format: INDEX_FORMAT.to_string(),
            version: INDEX_VERSION,
            terms: self.terms.clone(),
            idf: self.idf.clone(),
            docs: self.docs.clone(),
        };
        let writer = BufWriter::new(File::create(path.as_ref())?);
        serde_json::to_writer(writer, &file)?;
        Ok(())
    }

    /// Load an index written by [`save`](Self::save), checking the envelope.
    pub fn load(path: impl AsRef<Path>) -> Result<TfidfIndex, IndexError> {
        let reader = BufReader::new(File::open(path.as_ref())?);
        let file: IndexFile = serde_json::from_reader(reader)?;
        if file.format != INDEX_FORMAT {
            return Err(IndexError::Format { found: file.format });
        }
        if file.version != INDEX_VERSION {
            return Err(IndexError::Version {
                found: file.version,
            });
        }
        let term_ids = file
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(TfidfIndex::assemble(
            file.terms, term_ids, file.idf, file.docs,
        ))
    }
}

fn normalize(vector: &mut [(u32, f64)]) {
    let norm = vector
        .iter()
        .map(|&(_, w)| w * w)
        .sum::<f64>()
        .sqrt();
    if norm > 0.0 {
        for entry in vector.iter_mut() {
            entry.1 /= norm;
        }
    }
}

/// One line of a recommendation file: ranked names for one vulnerability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecommendationLine {
    pub cve_id: String,
    pub names: Vec<LibraryName>,
}

/// Load externally produced recommendations keyed by CVE id.
///
/// The file is JSONL `{cve_id, names}` with names ranked best-first. Since
/// such files carry no scores, ranks are mapped to `1/(rank+1)` to keep the
/// descending-score shape recommendations have elsewhere. Duplicate ids are
/// reported and skipped (first wins).
pub fn load_recommendations(
    path: impl AsRef<Path>,
) -> io::Result<(BTreeMap<String, Vec<Recommendation>>, Vec<LineIssue>)> {
    let loaded: jsonl::Loaded<RecommendationLine> = jsonl::read_path(path)?;
    let mut map: BTreeMap<String, Vec<Recommendation>> = BTreeMap::new();
    let mut issues = loaded.issues;
    for line in loaded.records {
        if map.contains_key(&line.cve_id) {
            issues.push(LineIssue {
                line: 0,
                message: format!("duplicate cve_id `{}` skipped", line.cve_id),
            });
            continue;
        }
        let recommendations = line
            .names
            .into_iter()
            .enumerate()
            .map(|(rank, name)| Recommendation {
                name,
                score: 1.0 / (rank as f64 + 1.0),
            })
            .collect();
        map.insert(line.cve_id, recommendations);
    }
    Ok((map, issues))
}
