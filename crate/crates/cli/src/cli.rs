//! Command-line surface.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "cve2lib",
    version,
    about = "Link vulnerability descriptions to Maven library coordinates",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate and summarize input files
    Ingest {
        /// Library catalog (JSONL {name, description})
        #[arg(long)]
        corpus: PathBuf,
        /// Vulnerability dataset (JSONL {cve_id, description, labels})
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Shuffle a dataset and split it into train/validation/test
    Split {
        #[arg(long)]
        dataset: PathBuf,
        /// Output assignments file (JSONL {cve_id, part})
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Integer proportions train,validation,test (e.g. 3,1,1)
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<u32>>,
        /// Exact sizes train,validation,test; must sum to the dataset size
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Build and save the TF-IDF index over a corpus
    Index {
        #[arg(long)]
        corpus: PathBuf,
        /// Output index file (versioned JSON)
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank candidate libraries for each vulnerability
    Recommend {
        /// Index file written by `index`
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Assignments file; restricts to one part
        #[arg(long)]
        split: Option<PathBuf>,
        /// Which part when --split is given: train, validation, or test
        #[arg(long, default_value = "test")]
        part: String,
        #[arg(long, default_value_t = 1)]
        top_k: usize,
        /// Output ranked-name file (JSONL {cve_id, names})
        #[arg(long)]
        out: PathBuf,
    },
    /// Export fine-tuning examples as JSONL {prompt, target}
    ExportFinetune {
        /// "unsupervised" (library descriptions) or "supervised" (vulnerabilities)
        #[arg(long)]
        kind: String,
        /// Required for unsupervised export
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Required for supervised export
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Assignments file; supervised export then uses the train part only
        #[arg(long)]
        split: Option<PathBuf>,
        /// Ranked-name file to merge into supervised prompts
        #[arg(long)]
        recs: Option<PathBuf>,
        /// Template overrides (TOML)
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate raw model responses for vulnerabilities
    Generate {
        #[arg(long)]
        dataset: PathBuf,
        /// Assignments file; restricts to one part
        #[arg(long)]
        split: Option<PathBuf>,
        /// Which part when --split is given: train, validation, or test
        #[arg(long, default_value = "test")]
        part: String,
        /// echo, replay, or http
        #[arg(long)]
        backend: String,
        /// Recorded responses, required for --backend replay
        #[arg(long)]
        replay_file: Option<PathBuf>,
        /// Generation service URL, required for --backend http
        #[arg(long)]
        endpoint: Option<String>,
        /// Name of the environment variable holding the bearer token
        /// (credentials are never accepted as flag values)
        #[arg(long)]
        credential_env: Option<String>,
        /// Ranked-name file to merge into prompts
        #[arg(long)]
        recs: Option<PathBuf>,
        /// Index file to rank candidates at prompt time instead
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        top_k: usize,
        /// Template overrides (TOML)
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        max_new_tokens: u32,
        #[arg(long, default_value_t = 0.0)]
        temperature: f64,
        /// Connection retries for the http backend
        #[arg(long, default_value_t = 3)]
        retries: u32,
        #[arg(long, default_value_t = 30)]
        timeout_secs: u64,
        /// Concurrent in-flight generation requests
        #[arg(long, default_value_t = 1)]
        concurrency: usize,
        /// Directory receiving prompts.jsonl, responses.jsonl, generation_errors.jsonl
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Snap generated names to the nearest catalog entries
    Ground {
        /// Response dump (JSONL {cve_id, raw_text, ...})
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Edit costs insert,delete,replace
        #[arg(long, default_value = "1,4,4")]
        weights: String,
        /// "all", or "file:<path>" naming one coordinate per line
        #[arg(long, default_value = "all")]
        search_space: String,
        /// Output predictions file (JSONL {cve_id, raw, predictions, costs})
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against the labeled test set
    Evaluate {
        /// Predictions file (JSONL {cve_id, predictions, ...})
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Assignments file defining the train/test membership
        #[arg(long)]
        split: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
        ks: Vec<usize>,
        /// Also compute accept/override diagnostics (needs --rec)
        #[arg(long)]
        relative: bool,
        /// Ranked-name file the prompts were built from
        #[arg(long)]
        rec: Option<PathBuf>,
        /// Also compute name-validity fractions (needs --corpus)
        #[arg(long)]
        validity: bool,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out_json: Option<PathBuf>,
        #[arg(long)]
        out_text: Option<PathBuf>,
    },
    /// Run every stage end-to-end from a config file
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<usize>>,
        /// Override edit costs insert,delete,replace
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        top_k: Option<usize>,
        /// Override the grounding search space: "all" or "file:<path>"
        #[arg(long)]
        search_space: Option<String>,
        #[arg(long)]
        concurrency: Option<usize>,
    },
}
