//! Text-generation backends behind one trait, so the pipeline runs
//! identically against a remote model service, a recorded-response replay
//! file, or a trivial echo baseline.
//!
//! Downstream stages never branch on the backend: everything after
//! generation sees only raw text plus a backend id. The replay and echo
//! backends are pure (and report zero latency), which makes whole-pipeline
//! runs reproducible byte for byte.

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::VulnerabilityRecord;
use crate::jsonl::{self, LineIssue};
use crate::prompting::PromptTemplates;
use crate::retriever::{EmptyIndex, Recommendation, TfidfIndex};

/// One generation call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub max_new_tokens: u32,
    pub temperature: f64,
}

/// What a backend produced. Empty `raw_text` is legal and simply yields
/// zero predictions downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResponse {
    pub raw_text: String,
    pub latency: Duration,
    pub backend_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    /// The request never reached the service (refused, unreachable, …).
    #[error("transport error: {0}")]
    Transport(String),
    /// The service answered but would not or could not serve the request.
    #[error("backend rejected the request: {0}")]
    Rejected(String),
    /// No answer within the configured deadline. Not retried: the request
    /// may still be executing remotely, and calls must be at-most-once.
    #[error("backend timed out: {0}")]
    Timeout(String),
}

impl BackendError {
    /// Whether retrying could ever help (the request provably never
    /// arrived). Rejections and timeouts must not be retried.
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport(_))
    }
}

/// The backend contract. Implementations must be safe for concurrent calls
/// up to the runner's configured cap.
pub trait Backend: Send + Sync {
    fn id(&self) -> &str;
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError>;
}

/// Hex SHA-256 of a prompt — the key replay files use to pair prompts with
/// recorded responses without storing the full prompt text.
pub fn prompt_digest(prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Decoding settings passed to every generation call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub max_new_tokens: u32,
    pub temperature: f64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        // Greedy decoding with a small budget: answers are one short
        // sentence naming coordinates, and sampling would break run-to-run
        // reproducibility.
        GenerationParams {
            max_new_tokens: 64,
            temperature: 0.0,
        }
    }
}

/// One line of a replay file: a recorded response keyed by prompt digest
/// (or by the prompt itself, digested at load time).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReplayLine {
    #[serde(default)]
    prompt_sha256: Option<String>,
    #[serde(default)]
    prompt: Option<String>,
    raw_text: String,
}

/// Replays recorded responses: pure, zero-latency, and rejecting any prompt
/// it has no recording for.
#[derive(Debug, Default, Clone)]
pub struct ReplayBackend {
    responses: HashMap<String, String>,
}

impl ReplayBackend {
    /// Load a JSONL file of `{prompt_sha256 | prompt, raw_text}` lines.
    /// Lines with neither key, and repeats of an already-seen prompt, are
    /// reported and skipped (first recording wins).
    pub fn from_file(path: impl AsRef<Path>) -> io::Result<(ReplayBackend, Vec<LineIssue>)> {
        let loaded: jsonl::Loaded<ReplayLine> = jsonl::read_path(path)?;
        let mut issues = loaded.issues;
        let mut responses = HashMap::new();
        for line in loaded.records {
            let digest = match (&line.prompt_sha256, &line.prompt) {
                (Some(digest), _) => digest.clone(),
                (None, Some(prompt)) => prompt_digest(prompt),
                (None, None) => {
                    issues.push(LineIssue {
                        line: 0,
                        message: "replay line has neither `prompt_sha256` nor `prompt`"
                            .to_string(),
                    });
                    continue;
                }
            };
            if responses.contains_key(&digest) {
                issues.push(LineIssue {
                    line: 0,
                    message: format!("duplicate replay entry for digest {digest} skipped"),
                });
                continue;
            }
            responses.insert(digest, line.raw_text);
        }
        Ok((ReplayBackend { responses }, issues))
    }

    /// Build directly from `(prompt, raw_text)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> ReplayBackend {
        let responses = pairs
            .into_iter()
            .map(|(prompt, raw_text)| (prompt_digest(prompt), raw_text.to_string()))
            .collect();
        ReplayBackend { responses }
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl Backend for ReplayBackend {
    fn id(&self) -> &str {
        "replay"
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let digest = prompt_digest(&request.prompt);
        match self.responses.get(&digest) {
            Some(raw_text) => Ok(GenerationResponse {
                raw_text: raw_text.clone(),
                latency: Duration::ZERO,
                backend_id: self.id().to_string(),
            }),
            None => Err(BackendError::Rejected(format!(
                "no recorded response for prompt digest {digest}"
            ))),
        }
    }
}

/// Parrots the top recommended name out of the prompt's search-result
/// block: the model that always accepts the recommendation. Useful as the
/// floor baseline when measuring how often a real model overrides its
/// recommendations.
#[derive(Debug, Clone, Default)]
pub struct EchoBackend {
    templates: PromptTemplates,
}

impl EchoBackend {
    /// The templates must match the ones that built the prompts, or the
    /// search-result block will not be recognized.
    pub fn new(templates: PromptTemplates) -> EchoBackend {
        EchoBackend { templates }
    }
}

impl Backend for EchoBackend {
    fn id(&self) -> &str {
        "echo"
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let raw_text = match self.templates.first_recommended_name(&request.prompt) {
            Some(name) => self
                .templates
                .supervised_target
                .replace("{names}", &name),
            None => String::new(),
        };
        Ok(GenerationResponse {
            raw_text,
            latency: Duration::ZERO,
            backend_id: self.id().to_string(),
        })
    }
}

#[derive(Serialize)]
struct HttpRequestBody<'a> {
    prompt: &'a str,
    max_new_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct HttpResponseBody {
    text: String,
}

/// Calls a remote generation service: one HTTP POST per request with JSON
/// body `{prompt, max_new_tokens, temperature}`, expecting `{text}` back.
pub struct HttpBackend {
    endpoint: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
    retries: u32,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Never print the credential.
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.endpoint)
            .field("token", &self.token.as_ref().map(|_| "<redacted>"))
            .field("retries", &self.retries)
            .finish()
    }
}

impl HttpBackend {
    /// `credential_env` names an environment variable holding the bearer
    /// token. The credential is only ever read from the environment — never
    /// from a flag or config value — so it cannot leak into shell history
    /// or artifact files.
    pub fn new(
        endpoint: impl Into<String>,
        credential_env: Option<&str>,
        timeout: Duration,
        retries: u32,
    ) -> Result<HttpBackend, BackendError> {
        let token = match credential_env {
            Some(name) => Some(std::env::var(name).map_err(|_| {
                BackendError::Rejected(format!("environment variable `{name}` is not set"))
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend {
            endpoint: endpoint.into(),
            token,
            client,
            retries,
        })
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        "http"
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let started = Instant::now();
        let body = HttpRequestBody {
            prompt: &request.prompt,
            max_new_tokens: request.max_new_tokens,
            temperature: request.temperature,
        };
        let mut attempt = 0u32;
        loop {
            let mut builder = self.client.post(&self.endpoint).json(&body);
            if let Some(token) = &self.token {
                builder = builder.bearer_auth(token);
            }
            match builder.send() {
                Ok(response) => {
                    let status = response.status();
                    if !status.is_success() {
                        let detail = response.text().unwrap_or_default();
                        return Err(BackendError::Rejected(format!(
                            "server returned {status}: {}",
                            detail.chars().take(200).collect::<String>()
                        )));
                    }
                    let parsed: HttpResponseBody = response.json().map_err(|e| {
                        BackendError::Rejected(format!("malformed response body: {e}"))
                    })?;
                    return Ok(GenerationResponse {
                        raw_text: parsed.text,
                        latency: started.elapsed(),
                        backend_id: self.id().to_string(),
                    });
                }
                Err(error) if error.is_timeout() => {
                    return Err(BackendError::Timeout(error.to_string()));
                }
                // Only connection failures are retried: the request never
                // left this process, so a second attempt stays at-most-once.
                Err(error) if error.is_connect() && attempt < self.retries => {
                    attempt += 1;
                    thread::sleep(Duration::from_millis(50 * u64::from(attempt)));
                }
                Err(error) => {
                    return Err(BackendError::Transport(error.to_string()));
                }
            }
        }
    }
}

/// Where per-vulnerability recommendations come from.
pub enum RecommendationSource {
    /// No input augmentation: prompts carry only the description.
    None,
    /// Rank candidates with a TF-IDF index at prompt-build time.
    Index { index: TfidfIndex, top_k: usize },
    /// Replay pre-ranked names (e.g. produced by a stronger external
    /// recommender), keyed by CVE id; missing ids get no recommendations.
    Replay(BTreeMap<String, Vec<Recommendation>>),
}

impl RecommendationSource {
    pub fn recommendations_for(
        &self,
        vuln: &VulnerabilityRecord,
    ) -> Result<Vec<Recommendation>, EmptyIndex> {
        match self {
            RecommendationSource::None => Ok(Vec::new()),
            RecommendationSource::Index { index, top_k } => {
                index.recommend(&vuln.description, *top_k)
            }
            RecommendationSource::Replay(map) => {
                Ok(map.get(&vuln.cve_id).cloned().unwrap_or_default())
            }
        }
    }
}

/// Build the inference prompt for every record, in record order.
pub fn build_prompts(
    records: &[VulnerabilityRecord],
    source: &RecommendationSource,
    templates: &PromptTemplates,
) -> Result<Vec<(String, String)>, EmptyIndex> {
    records
        .iter()
        .map(|record| {
            let recs = source.recommendations_for(record)?;
            Ok((record.cve_id.clone(), templates.build_prompt(record, &recs)))
        })
        .collect()
}

/// One line of the response dump file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseLine {
    pub cve_id: String,
    pub raw_text: String,
    pub backend_id: String,
    pub latency_ms: u64,
}

/// Everything one inference pass produced, keyed by CVE id (so iteration
/// order is the sorted id order, independent of completion order).
#[derive(Debug, Default)]
pub struct InferenceRun {
    pub responses: BTreeMap<String, GenerationResponse>,
    pub errors: BTreeMap<String, String>,
    pub prompts: BTreeMap<String, String>,
}

impl InferenceRun {
    /// The response dump, sorted by CVE id.
    pub fn response_lines(&self) -> Vec<ResponseLine> {
        self.responses
            .iter()
            .map(|(cve_id, response)| ResponseLine {
                cve_id: cve_id.clone(),
                raw_text: response.raw_text.clone(),
                backend_id: response.backend_id.clone(),
                latency_ms: response.latency.as_millis() as u64,
            })
            .collect()
    }
}

/// Generate a response for every record: prompts are built serially (their
/// content must not depend on scheduling), then generation fans out over a
/// shared work queue bounded by `concurrency`. Per-record failures are
/// recorded, not fatal; an empty index is a configuration error and fails
/// the whole run before any generation starts.
pub fn run_inference(
    records: &[VulnerabilityRecord],
    source: &RecommendationSource,
    templates: &PromptTemplates,
    backend: &dyn Backend,
    params: &GenerationParams,
    concurrency: usize,
) -> Result<InferenceRun, EmptyIndex> {
    let prompts = build_prompts(records, source, templates)?;
    let total = prompts.len();
    let mut slots: Vec<Option<Result<GenerationResponse, BackendError>>> = Vec::new();
    slots.resize_with(total, || None);
    let slots = Mutex::new(slots);
    let next = AtomicUsize::new(0);
    let workers = concurrency.max(1).min(total.max(1));

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= total {
                    break;
                }
                let request = GenerationRequest {
                    prompt: prompts[i].1.clone(),
                    max_new_tokens: params.max_new_tokens,
                    temperature: params.temperature,
                };
                let result = backend.generate(&request);
                slots.lock().expect("no poisoned lock")[i] = Some(result);
            });
        }
    });

    let slots = slots.into_inner().expect("no poisoned lock");
    let mut run = InferenceRun::default();
    for ((cve_id, prompt), slot) in prompts.into_iter().zip(slots) {
        match slot.expect("every queued request was processed") {
            Ok(response) => {
                run.responses.insert(cve_id.clone(), response);
            }
            Err(error) => {
                run.errors.insert(cve_id.clone(), error.to_string());
            }
        }
        run.prompts.insert(cve_id, prompt);
    }
    Ok(run)
}
