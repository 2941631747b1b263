//! Snap generated coordinate strings onto real catalog entries.
//!
//! Text-generation backends produce library coordinates that are close to,
//! but frequently not exactly, names that exist. This module extracts the
//! coordinate-shaped substrings from generated text and maps each one to
//! the catalog entry with the cheapest weighted edit distance — first
//! choosing the artifact id across the whole catalog, then the group id
//! among the groups that actually ship that artifact.
//!
//! The edit costs are asymmetric on purpose: inserting a character into the
//! generated segment is cheap (weight 1 by default) while deleting or
//! replacing one is expensive (weight 4 by default). Generated names tend
//! to be abbreviations or de-hyphenations of the real name, so extending
//! what the model wrote should cost little, while throwing generated
//! characters away should cost a lot.

use std::collections::HashSet;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;

use crate::corpus::{LibraryCorpus, LibraryName, MalformedName};

/// Weights for the three edit operations on the *generated* segment.
///
/// `insert` adds a character to the generated segment, `delete` removes
/// one, `replace` swaps one. All weights must be at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundingWeights {
    insert: u32,
    delete: u32,
    replace: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid grounding weights: {0}")]
pub struct InvalidWeights(pub String);

impl GroundingWeights {
    pub fn new(insert: u32, delete: u32, replace: u32) -> Result<Self, InvalidWeights> {
        if insert == 0 || delete == 0 || replace == 0 {
            return Err(InvalidWeights(format!(
                "weights must be at least 1, got {insert},{delete},{replace}"
            )));
        }
        Ok(GroundingWeights {
            insert,
            delete,
            replace,
        })
    }

    pub fn insert(&self) -> u32 {
        self.insert
    }

    pub fn delete(&self) -> u32 {
        self.delete
    }

    pub fn replace(&self) -> u32 {
        self.replace
    }
}

impl Default for GroundingWeights {
    /// Cheap insertions (1), expensive deletions and replacements (4).
    fn default() -> Self {
        GroundingWeights {
            insert: 1,
            delete: 4,
            replace: 4,
        }
    }
}

impl std::fmt::Display for GroundingWeights {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.insert, self.delete, self.replace)
    }
}

impl FromStr for GroundingWeights {
    type Err = InvalidWeights;

    /// Parse `insert,delete,replace`, e.g. `1,4,4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(InvalidWeights(format!(
                "expected `insert,delete,replace`, got `{s}`"
            )));
        }
        let parse = |p: &str| {
            p.parse::<u32>()
                .map_err(|e| InvalidWeights(format!("`{p}` is not a weight: {e}")))
        };
        GroundingWeights::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)
    }
}

impl serde::Serialize for GroundingWeights {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.insert, self.delete, self.replace].serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for GroundingWeights {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [insert, delete, replace] = <[u32; 3]>::deserialize(deserializer)?;
        GroundingWeights::new(insert, delete, replace).map_err(serde::de::Error::custom)
    }
}

static COORDINATE_PATTERN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"maven:[A-Za-z0-9_.\-]+:[A-Za-z0-9_.\-]+").expect("pattern compiles")
});

/// Extract coordinate-shaped substrings from generated text, in order.
///
/// Matches `maven:<segment>:<segment>` where a segment is one or more of
/// letters, digits, `_`, `.`, `-`. Dots are legitimate inside segments, so
/// a sentence-final period would otherwise stick to the match; trailing
/// dots are clipped when the match is followed by whitespace or the end of
/// the text. Duplicates are kept — de-duplication happens after grounding.
pub fn extract_raw_names(text: &str) -> Vec<String> {
    let mut names = Vec::new();
    for m in COORDINATE_PATTERN.find_iter(text) {
        let mut raw = m.as_str();
        let at_word_end = text[m.end()..]
            .chars()
            .next()
            .is_none_or(char::is_whitespace);
        if at_word_end {
            raw = raw.trim_end_matches('.');
        }
        match raw.rsplit(':').next() {
            // Clipping can eat a dots-only artifact segment entirely; such a
            // match was never a usable coordinate, so drop it.
            Some(artifact) if !artifact.is_empty() => names.push(raw.to_string()),
            _ => {}
        }
    }
    names
}

/// Weighted edit distance from `from` to `to`.
///
/// Insertion adds a character to `from`, deletion removes one, replacement
/// swaps one; each operation costs its weight and the distance is the
/// cheapest edit script. Distances are over Unicode scalar values.
pub fn weighted_levenshtein(from: &str, to: &str, weights: &GroundingWeights) -> u64 {
    let a: Vec<char> = from.chars().collect();
    let b: Vec<char> = to.chars().collect();
    let mut row = Vec::new();
    banded_cost(&a, &b, weights, u64::MAX, &mut row).expect("no cutoff")
}

/// One-row DP for the weighted edit distance, with an early exit.
///
/// Returns `None` as soon as the distance provably reaches `cutoff`: every
/// value in a later row is at least the minimum of the current row, so a
/// row whose minimum hits the cutoff can never recover.
fn banded_cost<T: PartialEq + Copy>(
    from: &[T],
    to: &[T],
    weights: &GroundingWeights,
    cutoff: u64,
    row: &mut Vec<u64>,
) -> Option<u64> {
    let (w_insert, w_delete, w_replace) = (
        u64::from(weights.insert),
        u64::from(weights.delete),
        u64::from(weights.replace),
    );
    row.clear();
    row.extend((0..=to.len() as u64).map(|j| j * w_insert));
    for (i, &cf) in from.iter().enumerate() {
        let mut prev_diag = row[0];
        row[0] = (i as u64 + 1) * w_delete;
        let mut row_min = row[0];
        for (j, &ct) in to.iter().enumerate() {
            let substitute = prev_diag + if cf == ct { 0 } else { w_replace };
            let insert = row[j] + w_insert;
            let delete = row[j + 1] + w_delete;
            prev_diag = row[j + 1];
            let value = substitute.min(insert).min(delete);
            row[j + 1] = value;
            row_min = row_min.min(value);
        }
        if row_min >= cutoff {
            return None;
        }
    }
    let distance = row[to.len()];
    (distance < cutoff).then_some(distance)
}

/// The cheapest candidate for `target` among `candidates`.
///
/// `candidates` must be sorted ascending; scanning in that order with
/// strict improvement makes ties resolve to the lexicographically smallest
/// candidate. Two exact bounds keep the scan fast: candidates whose length
/// difference alone already costs as much as the best hit are skipped, and
/// the DP for the rest stops as soon as it can no longer beat the best.
fn cheapest_candidate<'a>(
    target: &str,
    candidates: &'a [String],
    weights: &GroundingWeights,
) -> (&'a str, u64) {
    debug_assert!(!candidates.is_empty());
    if let Ok(hit) = candidates.binary_search_by(|c| c.as_str().cmp(target)) {
        // Only an identical string has distance zero, so an exact hit is
        // always the unique argmin.
        return (&candidates[hit], 0);
    }

    let target_ascii = target.is_ascii();
    let target_chars: Vec<char> = target.chars().collect();
    let target_len = target_chars.len();
    let (w_insert, w_delete) = (u64::from(weights.insert), u64::from(weights.delete));

    let mut best: Option<(&'a str, u64)> = None;
    let mut row = Vec::new();
    let mut fallback_chars = Vec::new();
    for candidate in candidates {
        let ascii = target_ascii && candidate.is_ascii();
        let candidate_len = if candidate.is_ascii() {
            candidate.len()
        } else {
            candidate.chars().count()
        };
        let cutoff = match best {
            Some((_, best_cost)) => {
                let floor = if candidate_len >= target_len {
                    (candidate_len - target_len) as u64 * w_insert
                } else {
                    (target_len - candidate_len) as u64 * w_delete
                };
                if floor >= best_cost {
                    continue;
                }
                best_cost
            }
            None => u64::MAX,
        };
        let cost = if ascii {
            banded_cost(target.as_bytes(), candidate.as_bytes(), weights, cutoff, &mut row)
        } else {
            fallback_chars.clear();
            fallback_chars.extend(candidate.chars());
            banded_cost(&target_chars, &fallback_chars, weights, cutoff, &mut row)
        };
        if let Some(cost) = cost {
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((candidate, cost));
            }
        }
    }
    best.expect("the first unpruned candidate always yields a cost")
}

/// A generated coordinate snapped onto the catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedPrediction {
    /// The coordinate string as extracted from the generated text.
    pub raw: String,
    /// The catalog name it was mapped to; the prefix is always `maven`.
    pub grounded: LibraryName,
    /// Edit cost from the generated artifact id to the chosen one.
    pub artifact_cost: u64,
    /// Edit cost from the generated group id to the chosen one.
    pub group_cost: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundingError {
    #[error("cannot ground against an empty corpus")]
    EmptyCorpus,
    #[error(transparent)]
    Malformed(#[from] MalformedName),
}

/// Map one raw coordinate onto the catalog.
///
/// The artifact id is matched against every artifact in the corpus; the
/// group id is then matched only among the groups that ship the chosen
/// artifact. Ties go to the lexicographically smallest candidate, and the
/// result's prefix is normalized to `maven`.
pub fn ground_name(
    raw: &str,
    corpus: &LibraryCorpus,
    weights: &GroundingWeights,
) -> Result<GroundedPrediction, GroundingError> {
    if corpus.is_empty() {
        return Err(GroundingError::EmptyCorpus);
    }
    let parsed = LibraryName::parse(raw)?;
    let (artifact, artifact_cost) =
        cheapest_candidate(parsed.artifact_id(), corpus.artifacts(), weights);
    let groups = corpus
        .groups_for(artifact)
        .expect("chosen artifact comes from the corpus");
    let (group, group_cost) = cheapest_candidate(parsed.group_id(), groups, weights);
    let grounded =
        LibraryName::new("maven", group, artifact).expect("corpus segments are valid");
    Ok(GroundedPrediction {
        raw: raw.to_string(),
        grounded,
        artifact_cost,
        group_cost,
    })
}

/// Extract every coordinate from generated text and ground each one.
///
/// The result preserves the first occurrence of each distinct grounded
/// name. Raw strings that do not parse are skipped, and an empty corpus
/// grounds nothing, so the output is always a subset of the corpus names.
pub fn post_process_detailed(
    text: &str,
    corpus: &LibraryCorpus,
    weights: &GroundingWeights,
) -> Vec<GroundedPrediction> {
    if corpus.is_empty() {
        return Vec::new();
    }
    let mut seen: HashSet<String> = HashSet::new();
    let mut predictions = Vec::new();
    for raw in extract_raw_names(text) {
        if let Ok(prediction) = ground_name(&raw, corpus, weights) {
            if seen.insert(prediction.grounded.canonical()) {
                predictions.push(prediction);
            }
        }
    }
    predictions
}

/// The grounded names only. See [`post_process_detailed`].
pub fn post_process(
    text: &str,
    corpus: &LibraryCorpus,
    weights: &GroundingWeights,
) -> Vec<LibraryName> {
    post_process_detailed(text, corpus, weights)
        .into_iter()
        .map(|p| p.grounded)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LibraryRecord;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Independent oracle: explore every edit script recursively, no DP
    /// table, no memoization. Exponential, so only usable on short strings.
    fn exhaustive_cost(from: &[u8], to: &[u8], w: &GroundingWeights) -> u64 {
        if from.is_empty() {
            return to.len() as u64 * u64::from(w.insert());
        }
        if to.is_empty() {
            return from.len() as u64 * u64::from(w.delete());
        }
        let keep_or_replace = exhaustive_cost(&from[1..], &to[1..], w)
            + if from[0] == to[0] {
                0
            } else {
                u64::from(w.replace())
            };
        let delete = exhaustive_cost(&from[1..], to, w) + u64::from(w.delete());
        let insert = exhaustive_cost(from, &to[1..], w) + u64::from(w.insert());
        keep_or_replace.min(delete).min(insert)
    }

    fn corpus_of(names: &[&str]) -> LibraryCorpus {
        LibraryCorpus::build(
            names
                .iter()
                .map(|n| LibraryRecord {
                    name: LibraryName::parse(n).unwrap(),
                    description: String::new(),
                })
                .collect(),
        )
    }

    fn w(insert: u32, delete: u32, replace: u32) -> GroundingWeights {
        GroundingWeights::new(insert, delete, replace).unwrap()
    }

    #[test]
    fn default_weights_favor_insertions() {
        let d = GroundingWeights::default();
        assert_eq!((d.insert(), d.delete(), d.replace()), (1, 4, 4));
    }

    #[test]
    fn rejects_zero_weights() {
        assert!(GroundingWeights::new(0, 4, 4).is_err());
        assert!(GroundingWeights::new(1, 0, 4).is_err());
        assert!(GroundingWeights::new(1, 4, 0).is_err());
    }

    #[test]
    fn parses_weight_triples() {
        let parsed: GroundingWeights = "2, 3,4".parse().unwrap();
        assert_eq!(parsed, w(2, 3, 4));
        assert!("1,4".parse::<GroundingWeights>().is_err());
        assert!("1,4,x".parse::<GroundingWeights>().is_err());
        assert!("1,0,4".parse::<GroundingWeights>().is_err());
    }

    #[test]
    fn identical_strings_cost_nothing() {
        assert_eq!(
            weighted_levenshtein("gson", "gson", &GroundingWeights::default()),
            0
        );
    }

    #[test]
    fn insertion_is_cheap_deletion_is_dear() {
        let d = GroundingWeights::default();
        // Extending the generated segment by one character: weight 1.
        assert_eq!(weighted_levenshtein("abc", "abcd", &d), 1);
        // Removing a generated character: weight 4.
        assert_eq!(weighted_levenshtein("abcd", "abc", &d), 4);
    }

    #[test]
    fn dropping_a_hyphen_costs_one_deletion() {
        assert_eq!(
            weighted_levenshtein("mail-commander", "mailcommander", &GroundingWeights::default()),
            4
        );
    }

    #[test]
    fn replacement_costs_its_weight() {
        assert_eq!(
            weighted_levenshtein("abc", "abd", &GroundingWeights::default()),
            4
        );
    }

    #[test]
    fn empty_endpoints_cost_length_times_weight() {
        let d = GroundingWeights::default();
        assert_eq!(weighted_levenshtein("", "abc", &d), 3);
        assert_eq!(weighted_levenshtein("abc", "", &d), 12);
        assert_eq!(weighted_levenshtein("", "", &d), 0);
    }

    #[test]
    fn expensive_replacement_decomposes_into_insert_plus_delete() {
        // With replace dearer than insert + delete, the cheapest script
        // swaps a character via two operations; the DP must find that.
        let weights = w(1, 1, 5);
        assert_eq!(weighted_levenshtein("abc", "abd", &weights), 2);
        assert_eq!(exhaustive_cost(b"abc", b"abd", &weights), 2);
    }

    #[test]
    fn distances_are_over_chars_not_bytes() {
        // é is two bytes; a byte-level DP would see two replacements.
        assert_eq!(
            weighted_levenshtein("café", "cafe", &GroundingWeights::default()),
            4
        );
    }

    #[test]
    fn matches_exhaustive_search_on_random_pairs() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for _ in 0..200 {
            let len_a = rng.gen_range(0..=6);
            let len_b = rng.gen_range(0..=6);
            let a: String = (0..len_a).map(|_| rng.gen_range(b'a'..=b'd') as char).collect();
            let b: String = (0..len_b).map(|_| rng.gen_range(b'a'..=b'd') as char).collect();
            let weights = w(
                rng.gen_range(1..=5),
                rng.gen_range(1..=5),
                rng.gen_range(1..=5),
            );
            assert_eq!(
                weighted_levenshtein(&a, &b, &weights),
                exhaustive_cost(a.as_bytes(), b.as_bytes(), &weights),
                "mismatch for {a:?} -> {b:?} with {weights}"
            );
        }
    }

    #[test]
    fn extracts_coordinates_in_order() {
        let text = "use maven:a.b:c-d and maven:e:f today";
        assert_eq!(extract_raw_names(text), ["maven:a.b:c-d", "maven:e:f"]);
    }

    #[test]
    fn extracts_nothing_from_plain_text() {
        assert!(extract_raw_names("no coordinates here").is_empty());
        assert!(extract_raw_names("").is_empty());
    }

    #[test]
    fn clips_sentence_final_period() {
        assert_eq!(
            extract_raw_names("The affected packages is maven:org.jenkins-ci.plugins:mailcommander."),
            ["maven:org.jenkins-ci.plugins:mailcommander"]
        );
        assert_eq!(extract_raw_names("see maven:g:a.\nnext"), ["maven:g:a"]);
        assert_eq!(extract_raw_names("trailing maven:g:a..."), ["maven:g:a"]);
    }

    #[test]
    fn keeps_interior_dots() {
        assert_eq!(
            extract_raw_names("maven:com.google.code.gson:gson-2.8 ships"),
            ["maven:com.google.code.gson:gson-2.8"]
        );
    }

    #[test]
    fn keeps_duplicates_for_later_deduplication() {
        assert_eq!(
            extract_raw_names("maven:g:a then maven:g:a"),
            ["maven:g:a", "maven:g:a"]
        );
    }

    #[test]
    fn drops_matches_whose_artifact_was_all_dots() {
        assert!(extract_raw_names("maven:g:. end").is_empty());
    }

    #[test]
    fn preserves_generated_case_in_raw_names() {
        assert_eq!(
            extract_raw_names("said maven:Org.Apache:Commons-IO loudly"),
            ["maven:Org.Apache:Commons-IO"]
        );
    }

    #[test]
    fn grounds_dehyphenated_artifact() {
        let corpus = corpus_of(&[
            "maven:org.jenkins-ci.plugins:mailcommander",
            "maven:org.jenkins-ci.plugins:mailer",
            "maven:org.apache.commons:commons-email",
        ]);
        let p = ground_name(
            "maven:org.jenkins-ci.plugins:mail-commander",
            &corpus,
            &GroundingWeights::default(),
        )
        .unwrap();
        assert_eq!(
            p.grounded.canonical(),
            "maven:org.jenkins-ci.plugins:mailcommander"
        );
        assert_eq!(p.artifact_cost, 4);
        assert_eq!(p.group_cost, 0);
    }

    #[test]
    fn exact_name_grounds_to_itself_for_free() {
        let corpus = corpus_of(&["maven:g:a", "maven:g:b"]);
        let p = ground_name("maven:g:a", &corpus, &GroundingWeights::default()).unwrap();
        assert_eq!(p.grounded.canonical(), "maven:g:a");
        assert_eq!((p.artifact_cost, p.group_cost), (0, 0));
    }

    #[test]
    fn group_is_chosen_among_the_artifacts_groups_only() {
        // `tool` ships under two groups; `org.close` is not one of them even
        // though it is closer to the generated group than either candidate.
        let corpus = corpus_of(&[
            "maven:com.vendor:tool",
            "maven:io.fork:tool",
            "maven:org.close:other",
        ]);
        let p = ground_name("maven:org.clos:tool", &corpus, &GroundingWeights::default()).unwrap();
        assert_eq!(p.artifact_cost, 0);
        assert!(["com.vendor", "io.fork"].contains(&p.grounded.group_id()));
    }

    #[test]
    fn ties_resolve_to_the_lexicographically_smaller_candidate() {
        // Both candidates are one insertion away from the generated segment.
        let corpus = corpus_of(&["maven:g:abcx", "maven:g:abcy"]);
        let p = ground_name("maven:g:abc", &corpus, &GroundingWeights::default()).unwrap();
        assert_eq!(p.grounded.artifact_id(), "abcx");
        assert_eq!(p.artifact_cost, 1);
    }

    #[test]
    fn prefix_is_normalized_to_maven() {
        let corpus = corpus_of(&["maven:g:a"]);
        let p = ground_name("MAVEN:G:A", &corpus, &GroundingWeights::default()).unwrap();
        assert_eq!(p.grounded.prefix(), "maven");
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let corpus = LibraryCorpus::build(Vec::new());
        assert_eq!(
            ground_name("maven:g:a", &corpus, &GroundingWeights::default()).unwrap_err(),
            GroundingError::EmptyCorpus
        );
    }

    #[test]
    fn malformed_raw_is_an_error() {
        let corpus = corpus_of(&["maven:g:a"]);
        assert!(matches!(
            ground_name("maven:ider", &corpus, &GroundingWeights::default()),
            Err(GroundingError::Malformed(_))
        ));
    }

    #[test]
    fn post_process_deduplicates_grounded_names() {
        let corpus = corpus_of(&["maven:g:alpha"]);
        // Two different raw spellings ground to the same catalog entry.
        let names = post_process(
            "maven:g:alpha and maven:g:alpa",
            &corpus,
            &GroundingWeights::default(),
        );
        assert_eq!(names.len(), 1);
        assert_eq!(names[0].canonical(), "maven:g:alpha");
    }

    #[test]
    fn post_process_on_empty_inputs() {
        let corpus = corpus_of(&["maven:g:a"]);
        assert!(post_process("", &corpus, &GroundingWeights::default()).is_empty());
        let empty = LibraryCorpus::build(Vec::new());
        assert!(post_process("maven:g:a", &empty, &GroundingWeights::default()).is_empty());
    }

    #[test]
    fn post_process_output_is_always_in_the_corpus() {
        let corpus = corpus_of(&["maven:com.a:one", "maven:com.b:two", "maven:com.c:three"]);
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..100 {
            let len = rng.gen_range(0..40);
            let text: String = (0..len)
                .map(|_| {
                    let c = rng.gen_range(0..44u8);
                    match c {
                        0..=25 => (b'a' + c) as char,
                        26..=35 => (b'0' + c - 26) as char,
                        36..=39 => ':',
                        40 => '.',
                        41 => '-',
                        42 => ' ',
                        _ => 'm',
                    }
                })
                .collect();
            let text = format!("maven:{text}");
            for name in post_process(&text, &corpus, &GroundingWeights::default()) {
                assert!(corpus.contains_name(&name), "hallucinated {name} from {text:?}");
            }
        }
    }

    fn short_ascii() -> impl Strategy<Value = String> {
        "[a-d]{0,6}"
    }

    proptest! {
        #[test]
        fn dp_agrees_with_exhaustive_search(
            a in short_ascii(),
            b in short_ascii(),
            wi in 1u32..=5,
            wd in 1u32..=5,
            wr in 1u32..=5,
        ) {
            let weights = w(wi, wd, wr);
            prop_assert_eq!(
                weighted_levenshtein(&a, &b, &weights),
                exhaustive_cost(a.as_bytes(), b.as_bytes(), &weights)
            );
        }

        #[test]
        fn reversing_direction_swaps_insert_and_delete(
            a in short_ascii(),
            b in short_ascii(),
            wi in 1u32..=5,
            wd in 1u32..=5,
            wr in 1u32..=5,
        ) {
            // An edit script from a to b, read backwards, is a script from b
            // to a with insertions and deletions exchanged.
            prop_assert_eq!(
                weighted_levenshtein(&a, &b, &w(wi, wd, wr)),
                weighted_levenshtein(&b, &a, &w(wd, wi, wr))
            );
        }

        #[test]
        fn distance_is_at_least_the_length_gap(
            a in short_ascii(),
            b in short_ascii(),
        ) {
            let weights = GroundingWeights::default();
            let d = weighted_levenshtein(&a, &b, &weights);
            let (la, lb) = (a.chars().count() as u64, b.chars().count() as u64);
            let floor = if lb >= la {
                (lb - la) * u64::from(weights.insert())
            } else {
                (la - lb) * u64::from(weights.delete())
            };
            prop_assert!(d >= floor);
        }
    }
}
