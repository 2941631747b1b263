//! Map vulnerability descriptions to Maven library coordinates.
//!
//! The pipeline: load a library catalog ([`corpus`]) and a labeled
//! vulnerability dataset ([`dataset`]); split it and partition the test
//! half by zero-shot status; rank candidate libraries per vulnerability
//! with TF-IDF ([`retriever`]); merge descriptions and candidates into
//! prompts ([`prompting`]); produce names with a pluggable text-generation
//! backend ([`backend`]); snap every generated name to the nearest existing
//! library by weighted edit distance ([`grounding`]); and score the result
//! ([`evaluation`]).
//!
//! Every stage reads and writes plain JSONL ([`jsonl`]), so each can be
//! run, inspected, or replaced independently — including replaying
//! pre-recorded model responses for fully reproducible runs.

pub mod backend;
pub mod corpus;
pub mod dataset;
pub mod evaluation;
pub mod grounding;
pub mod jsonl;
pub mod prompting;
pub mod retriever;

pub use backend::{
    build_prompts, run_inference, Backend, BackendError, EchoBackend, GenerationParams,
    GenerationRequest, GenerationResponse, HttpBackend, InferenceRun, RecommendationSource,
    ReplayBackend, ResponseLine,
};
pub use corpus::{load_corpus, LibraryCorpus, LibraryName, LibraryRecord, MalformedName};
pub use dataset::{
    load_dataset, split_dataset, zero_shot_partition, DatasetSplit, SplitPart, SplitSpec,
    VulnerabilityRecord, ZeroShotPartition,
};
pub use evaluation::{
    evaluate, ground_truth_oracle, load_predictions, name_validity_portions, prf_at_k,
    relative_precision, EvalReport, PredictionSet, PrfScores,
};
pub use grounding::{
    extract_raw_names, ground_name, post_process, post_process_detailed, weighted_levenshtein,
    GroundedPrediction, GroundingWeights,
};
pub use prompting::{PromptExample, PromptTemplates};
pub use retriever::{load_recommendations, Recommendation, TfidfIndex};
