//! Pipeline configuration: one TOML file describing every stage, with
//! relative paths resolved against the config file's directory and a small
//! set of flag overrides on top.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use cve2lib::dataset::SplitSpec;
use cve2lib::GroundingWeights;

use crate::error::CliError;

/// Where grounding searches for candidate names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchSpace {
    /// The whole corpus.
    All,
    /// Only the coordinates listed in a file (one canonical name per line),
    /// e.g. a popularity-ranked shortlist.
    File(PathBuf),
}

impl SearchSpace {
    pub fn parse(text: &str) -> Result<SearchSpace, CliError> {
        if text == "all" {
            return Ok(SearchSpace::All);
        }
        match text.strip_prefix("file:") {
            Some(rest) if !rest.is_empty() => Ok(SearchSpace::File(PathBuf::from(rest))),
            _ => Err(CliError::usage(format!(
                "invalid search space `{text}`: expected `all` or `file:<path>`"
            ))),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// The full pipeline configuration. Unknown keys are rejected so typos
/// cannot silently fall back to defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub dataset: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Optional prompt-template overrides (TOML).
    #[serde(default)]
    pub templates_file: Option<PathBuf>,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub recommender: RecommenderConfig,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub grounding: GroundingConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub seed: u64,
    /// Integer proportions train/validation/test.
    pub ratios: Option<[u32; 3]>,
    /// Exact sizes; must sum to the dataset size. Mutually exclusive with
    /// `ratios`.
    pub sizes: Option<[usize; 3]>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            seed: 42,
            ratios: None,
            sizes: None,
        }
    }
}

impl SplitConfig {
    pub fn spec(&self) -> Result<SplitSpec, CliError> {
        match (self.ratios, self.sizes) {
            (Some(_), Some(_)) => Err(CliError::usage(
                "split config sets both `ratios` and `sizes`; choose one",
            )),
            (None, Some(sizes)) => Ok(SplitSpec::Sizes(sizes)),
            (Some(ratios), None) => Ok(SplitSpec::Ratios(ratios)),
            (None, None) => Ok(SplitSpec::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecommenderConfig {
    /// "index" (build TF-IDF from the corpus), "replay" (read a ranked-name
    /// file), or "none" (prompts carry no candidates).
    pub source: String,
    pub top_k: usize,
    /// Ranked-name file for `source = "replay"`.
    pub replay_file: Option<PathBuf>,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            source: "index".to_string(),
            top_k: 1,
            replay_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendConfig {
    /// "echo", "replay", or "http".
    pub kind: String,
    /// Recorded responses for `kind = "replay"`.
    pub replay_file: Option<PathBuf>,
    /// Service URL for `kind = "http"`.
    pub endpoint: Option<String>,
    /// Environment variable naming the bearer token for `kind = "http"`.
    /// The token itself never appears in config files or flags.
    pub credential_env: Option<String>,
    pub max_new_tokens: u32,
    pub temperature: f64,
    pub retries: u32,
    pub timeout_secs: u64,
    pub concurrency: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: "echo".to_string(),
            replay_file: None,
            endpoint: None,
            credential_env: None,
            max_new_tokens: 64,
            temperature: 0.0,
            retries: 3,
            timeout_secs: 30,
            concurrency: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundingConfig {
    /// Edit costs [insert, delete, replace].
    pub weights: GroundingWeights,
    /// "all" or "file:<path>".
    pub search_space: String,
}

impl Default for GroundingConfig {
    fn default() -> Self {
        GroundingConfig {
            weights: GroundingWeights::default(),
            search_space: "all".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    pub ks: Vec<usize>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig { ks: vec![1, 2, 3] }
    }
}

/// Flag overrides applied on top of the config file.
#[derive(Debug, Default)]
pub struct PipelineOverrides {
    pub seed: Option<u64>,
    pub ks: Option<Vec<usize>>,
    pub weights: Option<String>,
    pub top_k: Option<usize>,
    pub search_space: Option<String>,
    pub concurrency: Option<usize>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::data(format!("reading config `{}`: {e}", path.display()))
        })?;
        let mut config: PipelineConfig = toml::from_str(&text).map_err(|e| {
            CliError::data(format!("parsing config `{}`: {e}", path.display()))
        })?;
        config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    /// Interpret every relative path as relative to the config file.
    fn resolve_paths(&mut self, base: &Path) {
        fn resolve(path: &mut PathBuf, base: &Path) {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        resolve(&mut self.corpus, base);
        resolve(&mut self.dataset, base);
        resolve(&mut self.output_dir, base);
        if let Some(path) = &mut self.templates_file {
            resolve(path, base);
        }
        if let Some(path) = &mut self.recommender.replay_file {
            resolve(path, base);
        }
        if let Some(path) = &mut self.backend.replay_file {
            resolve(path, base);
        }
        if let Some(rest) = self.grounding.search_space.strip_prefix("file:") {
            let mut path = PathBuf::from(rest);
            resolve(&mut path, base);
            self.grounding.search_space = format!("file:{}", path.display());
        }
    }

    pub fn apply_overrides(&mut self, overrides: PipelineOverrides) -> Result<(), CliError> {
        if let Some(seed) = overrides.seed {
            self.split.seed = seed;
        }
        if let Some(ks) = overrides.ks {
            self.evaluation.ks = ks;
        }
        if let Some(weights) = overrides.weights {
            self.grounding.weights = GroundingWeights::from_str(&weights)
                .map_err(|e| CliError::usage(format!("--weights {weights}: {e}")))?;
        }
        if let Some(top_k) = overrides.top_k {
            self.recommender.top_k = top_k;
        }
        if let Some(search_space) = overrides.search_space {
            SearchSpace::parse(&search_space)?;
            self.grounding.search_space = search_space;
        }
        if let Some(concurrency) = overrides.concurrency {
            self.backend.concurrency = concurrency;
        }
        Ok(())
    }

    pub fn search_space(&self) -> Result<SearchSpace, CliError> {
        SearchSpace::parse(&self.grounding.search_space)
    }

    /// Check every value and every referenced input path before any stage
    /// runs, so a bad config never leaves partial artifacts behind.
    pub fn validate(&self) -> Result<(), CliError> {
        require_file(&self.corpus, "corpus file")?;
        require_file(&self.dataset, "dataset file")?;
        if let Some(path) = &self.templates_file {
            require_file(path, "templates file")?;
        }

        self.split.spec()?;

        match self.recommender.source.as_str() {
            "none" => {}
            "index" => {
                if self.recommender.top_k == 0 {
                    return Err(CliError::usage("recommender top_k must be at least 1"));
                }
            }
            "replay" => match &self.recommender.replay_file {
                Some(path) => require_file(path, "recommendation replay file")?,
                None => {
                    return Err(CliError::usage(
                        "recommender source `replay` needs `replay_file`",
                    ))
                }
            },
            other => {
                return Err(CliError::usage(format!(
                    "unknown recommender source `{other}`: expected index, replay, or none"
                )))
            }
        }

        match self.backend.kind.as_str() {
            "echo" => {}
            "replay" => match &self.backend.replay_file {
                Some(path) => require_file(path, "response replay file")?,
                None => {
                    return Err(CliError::usage("backend `replay` needs `replay_file`"))
                }
            },
            "http" => {
                if self.backend.endpoint.is_none() {
                    return Err(CliError::usage("backend `http` needs `endpoint`"));
                }
            }
            other => {
                return Err(CliError::usage(format!(
                    "unknown backend `{other}`: expected echo, replay, or http"
                )))
            }
        }
        if self.backend.max_new_tokens == 0 {
            return Err(CliError::usage("max_new_tokens must be at least 1"));
        }
        if !self.backend.temperature.is_finite() || self.backend.temperature < 0.0 {
            return Err(CliError::usage("temperature must be a non-negative number"));
        }
        if self.backend.concurrency == 0 {
            return Err(CliError::usage("concurrency must be at least 1"));
        }

        if let SearchSpace::File(path) = self.search_space()? {
            require_file(&path, "search-space file")?;
        }

        if self.evaluation.ks.is_empty() {
            return Err(CliError::usage("evaluation needs at least one k"));
        }
        if self.evaluation.ks.contains(&0) {
            return Err(CliError::usage("every evaluation k must be at least 1"));
        }
        Ok(())
    }
}

pub fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "{what} `{}` does not exist",
            path.display()
        )))
    }
}
