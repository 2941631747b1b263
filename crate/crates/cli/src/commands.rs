//! Subcommand implementations.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use cve2lib::dataset::{
    split_dataset, zero_shot_partition, SplitError, SplitPart, SplitSpec, VulnerabilityRecord,
};
use cve2lib::retriever::{load_recommendations, Recommendation, RecommendationLine};
use cve2lib::{
    evaluate, name_validity_portions, relative_precision, run_inference, Backend, EchoBackend,
    GenerationParams, GroundingWeights, HttpBackend, LibraryName, PromptTemplates,
    RecommendationSource, ReplayBackend, ResponseLine, TfidfIndex,
};

use crate::cli::{Cli, Command};
use crate::config::{PipelineConfig, PipelineOverrides, SearchSpace};
use crate::error::CliError;
use crate::stages;

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { corpus, dataset } => cmd_ingest(&corpus, dataset.as_deref()),
        Command::Split {
            dataset,
            out,
            seed,
            ratios,
            sizes,
        } => cmd_split(&dataset, &out, seed, ratios, sizes),
        Command::Index { corpus, out } => cmd_index(&corpus, &out),
        Command::Recommend {
            index,
            dataset,
            split,
            part,
            top_k,
            out,
        } => cmd_recommend(&index, &dataset, split.as_deref(), &part, top_k, &out),
        Command::ExportFinetune {
            kind,
            corpus,
            dataset,
            split,
            recs,
            templates,
            out,
        } => cmd_export_finetune(
            &kind,
            corpus.as_deref(),
            dataset.as_deref(),
            split.as_deref(),
            recs.as_deref(),
            templates.as_deref(),
            &out,
        ),
        Command::Generate {
            dataset,
            split,
            part,
            backend,
            replay_file,
            endpoint,
            credential_env,
            recs,
            index,
            top_k,
            templates,
            max_new_tokens,
            temperature,
            retries,
            timeout_secs,
            concurrency,
            out_dir,
        } => cmd_generate(GenerateArgs {
            dataset,
            split,
            part,
            backend,
            replay_file,
            endpoint,
            credential_env,
            recs,
            index,
            top_k,
            templates,
            max_new_tokens,
            temperature,
            retries,
            timeout_secs,
            concurrency,
            out_dir,
        }),
        Command::Ground {
            responses,
            corpus,
            weights,
            search_space,
            out,
        } => cmd_ground(&responses, &corpus, &weights, &search_space, &out),
        Command::Evaluate {
            pred,
            dataset,
            split,
            ks,
            relative,
            rec,
            validity,
            corpus,
            out_json,
            out_text,
        } => cmd_evaluate(EvaluateArgs {
            pred,
            dataset,
            split,
            ks,
            relative,
            rec,
            validity,
            corpus,
            out_json,
            out_text,
        }),
        Command::Pipeline {
            config,
            seed,
            ks,
            weights,
            top_k,
            search_space,
            concurrency,
        } => {
            let mut loaded = PipelineConfig::load(&config)?;
            loaded.apply_overrides(PipelineOverrides {
                seed,
                ks,
                weights,
                top_k,
                search_space,
                concurrency,
            })?;
            crate::pipeline::cmd_pipeline(&loaded)
        }
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn parse_part(text: &str) -> Result<SplitPart, CliError> {
    SplitPart::from_str(text)
        .map_err(|e| CliError::usage(format!("{e}: expected train, validation, or test")))
}

fn load_templates(path: Option<&Path>) -> Result<PromptTemplates, CliError> {
    match path {
        None => Ok(PromptTemplates::default()),
        Some(path) => PromptTemplates::from_file(path)
            .map_err(|e| CliError::data(format!("templates `{}`: {e}", path.display()))),
    }
}

/// Load the dataset, optionally narrowed to one part of a persisted split.
/// Records come back in ascending id order either way.
fn load_records(
    dataset: &Path,
    split: Option<&Path>,
    part: SplitPart,
) -> Result<Vec<VulnerabilityRecord>, CliError> {
    let records = stages::load_dataset_checked(dataset)?;
    match split {
        Some(split_path) => {
            let split = stages::read_split(split_path, records)?;
            Ok(stages::part_records(&split, part))
        }
        None => {
            let mut records = records;
            records.sort_by(|a, b| a.cve_id.cmp(&b.cve_id));
            Ok(records)
        }
    }
}

fn load_recs_map(
    path: &Path,
) -> Result<BTreeMap<String, Vec<Recommendation>>, CliError> {
    let (map, issues) = load_recommendations(path)
        .map_err(|e| CliError::data(format!("reading recommendations `{}`: {e}", path.display())))?;
    stages::warn_issues("recommendations", path, &issues);
    Ok(map)
}

/// Build the generation backend named by `kind`.
pub fn build_backend(
    kind: &str,
    replay_file: Option<&Path>,
    endpoint: Option<&str>,
    credential_env: Option<&str>,
    timeout: Duration,
    retries: u32,
    templates: &PromptTemplates,
) -> Result<Box<dyn Backend>, CliError> {
    match kind {
        "echo" => Ok(Box::new(EchoBackend::new(templates.clone()))),
        "replay" => {
            let path = replay_file.ok_or_else(|| {
                CliError::usage("backend `replay` needs --replay-file")
            })?;
            let (backend, issues) = ReplayBackend::from_file(path).map_err(|e| {
                CliError::data(format!("reading replay file `{}`: {e}", path.display()))
            })?;
            stages::warn_issues("replay file", path, &issues);
            if backend.is_empty() {
                return Err(CliError::data(format!(
                    "replay file `{}` holds no responses",
                    path.display()
                )));
            }
            Ok(Box::new(backend))
        }
        "http" => {
            let endpoint = endpoint
                .ok_or_else(|| CliError::usage("backend `http` needs --endpoint"))?;
            let backend = HttpBackend::new(endpoint, credential_env, timeout, retries)
                .map_err(|e| CliError::backend(format!("http backend setup: {e}")))?;
            Ok(Box::new(backend))
        }
        other => Err(CliError::usage(format!(
            "unknown backend `{other}`: expected echo, replay, or http"
        ))),
    }
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

fn cmd_ingest(corpus_path: &Path, dataset_path: Option<&Path>) -> Result<(), CliError> {
    let corpus = stages::load_corpus_checked(corpus_path)?;
    println!(
        "corpus: {} libraries across {} artifact ids ({} duplicate names merged)",
        corpus.len(),
        corpus.artifacts().len(),
        corpus.merged_duplicates()
    );
    if let Some(dataset_path) = dataset_path {
        let records = stages::load_dataset_checked(dataset_path)?;
        let labeled = records.iter().filter(|r| !r.labels.is_empty()).count();
        let labels: BTreeSet<&LibraryName> =
            records.iter().flat_map(|r| r.labels.iter()).collect();
        let known = labels.iter().filter(|l| corpus.contains_name(l)).count();
        println!(
            "dataset: {} records ({} labeled, {} unlabeled)",
            records.len(),
            labeled,
            records.len() - labeled
        );
        println!(
            "labels: {} distinct, {} present in the corpus",
            labels.len(),
            known
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

fn triple<T: Copy>(values: &[T], flag: &str) -> Result<[T; 3], CliError> {
    match values {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(CliError::usage(format!(
            "{flag} needs exactly three comma-separated values"
        ))),
    }
}

fn cmd_split(
    dataset: &Path,
    out: &Path,
    seed: u64,
    ratios: Option<Vec<u32>>,
    sizes: Option<Vec<usize>>,
) -> Result<(), CliError> {
    let spec = match (&ratios, &sizes) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage("pass either --ratios or --sizes, not both"))
        }
        (Some(ratios), None) => SplitSpec::Ratios(triple(ratios, "--ratios")?),
        (None, Some(sizes)) => SplitSpec::Sizes(triple(sizes, "--sizes")?),
        (None, None) => SplitSpec::default(),
    };
    let records = stages::load_dataset_checked(dataset)?;
    let split = split_dataset(records, spec, seed).map_err(|e| match e {
        SplitError::EmptyDataset => CliError::data(e.to_string()),
        SplitError::InvalidSpec(_) => CliError::usage(e.to_string()),
    })?;
    stages::write_split(out, &split)?;
    println!(
        "split: train={} validation={} test={} (seed {seed}) -> {}",
        split.train.len(),
        split.validation.len(),
        split.test.len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// index
// ---------------------------------------------------------------------------

fn cmd_index(corpus_path: &Path, out: &Path) -> Result<(), CliError> {
    let corpus = stages::load_corpus_checked(corpus_path)?;
    let index = TfidfIndex::build(&corpus);
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::data(format!("creating directory `{}`: {e}", parent.display()))
            })?;
        }
    }
    index
        .save(out)
        .map_err(|e| CliError::data(format!("writing index `{}`: {e}", out.display())))?;
    println!(
        "index: {} documents, {} terms -> {}",
        index.doc_count(),
        index.term_count(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// recommend
// ---------------------------------------------------------------------------

fn cmd_recommend(
    index_path: &Path,
    dataset: &Path,
    split: Option<&Path>,
    part: &str,
    top_k: usize,
    out: &Path,
) -> Result<(), CliError> {
    if top_k == 0 {
        return Err(CliError::usage("--top-k must be at least 1"));
    }
    let part = parse_part(part)?;
    let index = TfidfIndex::load(index_path)
        .map_err(|e| CliError::data(format!("reading index `{}`: {e}", index_path.display())))?;
    let records = load_records(dataset, split, part)?;
    let mut lines = Vec::with_capacity(records.len());
    for record in &records {
        let recs = index
            .recommend(&record.description, top_k)
            .map_err(|e| CliError::data(e.to_string()))?;
        lines.push(RecommendationLine {
            cve_id: record.cve_id.clone(),
            names: recs.into_iter().map(|r| r.name).collect(),
        });
    }
    let written = stages::write_jsonl(out, &lines, "recommendations")?;
    println!("recommend: {written} record(s) -> {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// export-finetune
// ---------------------------------------------------------------------------

fn cmd_export_finetune(
    kind: &str,
    corpus: Option<&Path>,
    dataset: Option<&Path>,
    split: Option<&Path>,
    recs: Option<&Path>,
    templates: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let templates = load_templates(templates)?;
    let report = match kind {
        "unsupervised" => {
            let corpus_path = corpus.ok_or_else(|| {
                CliError::usage("--kind unsupervised needs --corpus")
            })?;
            let corpus = stages::load_corpus_checked(corpus_path)?;
            templates
                .export_unsupervised(corpus.records(), out)
                .map_err(|e| CliError::data(format!("writing `{}`: {e}", out.display())))?
        }
        "supervised" => {
            let dataset_path = dataset.ok_or_else(|| {
                CliError::usage("--kind supervised needs --dataset")
            })?;
            let records = load_records(dataset_path, split, SplitPart::Train)?;
            let rec_map = match recs {
                Some(path) => load_recs_map(path)?,
                None => BTreeMap::new(),
            };
            templates
                .export_supervised(&records, &rec_map, out)
                .map_err(|e| CliError::data(format!("writing `{}`: {e}", out.display())))?
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown export kind `{other}`: expected unsupervised or supervised"
            )))
        }
    };
    println!(
        "export-finetune: {} example(s) written, {} skipped -> {}",
        report.written,
        report.skipped,
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
    dataset: PathBuf,
    split: Option<PathBuf>,
    part: String,
    backend: String,
    replay_file: Option<PathBuf>,
    endpoint: Option<String>,
    credential_env: Option<String>,
    recs: Option<PathBuf>,
    index: Option<PathBuf>,
    top_k: usize,
    templates: Option<PathBuf>,
    max_new_tokens: u32,
    temperature: f64,
    retries: u32,
    timeout_secs: u64,
    concurrency: usize,
    out_dir: PathBuf,
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let part = parse_part(&args.part)?;
    if args.concurrency == 0 {
        return Err(CliError::usage("--concurrency must be at least 1"));
    }
    let records = load_records(&args.dataset, args.split.as_deref(), part)?;
    let source = match (&args.recs, &args.index) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage("pass either --recs or --index, not both"))
        }
        (Some(path), None) => RecommendationSource::Replay(load_recs_map(path)?),
        (None, Some(path)) => {
            if args.top_k == 0 {
                return Err(CliError::usage("--top-k must be at least 1"));
            }
            let index = TfidfIndex::load(path).map_err(|e| {
                CliError::data(format!("reading index `{}`: {e}", path.display()))
            })?;
            RecommendationSource::Index {
                index,
                top_k: args.top_k,
            }
        }
        (None, None) => RecommendationSource::None,
    };
    let templates = load_templates(args.templates.as_deref())?;
    let backend = build_backend(
        &args.backend,
        args.replay_file.as_deref(),
        args.endpoint.as_deref(),
        args.credential_env.as_deref(),
        Duration::from_secs(args.timeout_secs),
        args.retries,
        &templates,
    )?;
    let params = GenerationParams {
        max_new_tokens: args.max_new_tokens,
        temperature: args.temperature,
    };
    let run = run_inference(
        &records,
        &source,
        &templates,
        backend.as_ref(),
        &params,
        args.concurrency,
    )
    .map_err(|e| CliError::data(e.to_string()))?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| {
        CliError::data(format!(
            "creating directory `{}`: {e}",
            args.out_dir.display()
        ))
    })?;
    stages::write_prompts(&args.out_dir.join("prompts.jsonl"), &run)?;
    stages::write_responses(&args.out_dir.join("responses.jsonl"), &run)?;
    stages::write_generation_errors(&args.out_dir.join("generation_errors.jsonl"), &run)?;
    println!(
        "generate: {} response(s), {} error(s) -> {}",
        run.responses.len(),
        run.errors.len(),
        args.out_dir.display()
    );
    if !run.errors.is_empty() {
        eprintln!(
            "warning: {} record(s) failed; see generation_errors.jsonl",
            run.errors.len()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ground
// ---------------------------------------------------------------------------

fn cmd_ground(
    responses: &Path,
    corpus_path: &Path,
    weights: &str,
    search_space: &str,
    out: &Path,
) -> Result<(), CliError> {
    let weights = GroundingWeights::from_str(weights)
        .map_err(|e| CliError::usage(format!("--weights {weights}: {e}")))?;
    let space = SearchSpace::parse(search_space)?;
    let corpus = stages::load_corpus_checked(corpus_path)?;
    let restricted = stages::restrict_corpus(&corpus, &space)?;
    let corpus = restricted.as_ref().unwrap_or(&corpus);
    let lines: Vec<ResponseLine> = stages::load_jsonl_checked(responses, "responses")?;
    let predictions: Vec<stages::PredictionRecord> = lines
        .iter()
        .map(|line| stages::ground_text(&line.cve_id, &line.raw_text, corpus, &weights))
        .collect();
    let written = stages::write_jsonl(out, &predictions, "predictions")?;
    println!("ground: {written} record(s) -> {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
    pred: PathBuf,
    dataset: PathBuf,
    split: PathBuf,
    ks: Vec<usize>,
    relative: bool,
    rec: Option<PathBuf>,
    validity: bool,
    corpus: Option<PathBuf>,
    out_json: Option<PathBuf>,
    out_text: Option<PathBuf>,
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    if args.ks.is_empty() {
        return Err(CliError::usage("--ks needs at least one value"));
    }
    if args.ks.contains(&0) {
        return Err(CliError::usage("every k must be at least 1"));
    }
    let records = stages::load_dataset_checked(&args.dataset)?;
    let split = stages::read_split(&args.split, records)?;
    let partition = zero_shot_partition(&split);
    let prediction_records: Vec<stages::PredictionRecord> =
        stages::load_jsonl_checked(&args.pred, "predictions")?;
    let predictions = stages::prediction_set(&prediction_records);

    let mut report = evaluate(&predictions, &partition, &args.ks);

    if args.relative {
        let rec_path = args
            .rec
            .as_deref()
            .ok_or_else(|| CliError::usage("--relative needs --rec"))?;
        let rec_map = load_recs_map(rec_path)?;
        let labeled: Vec<VulnerabilityRecord> = partition
            .v_zero
            .iter()
            .chain(&partition.v_full)
            .cloned()
            .collect();
        report.relative = Some(relative_precision(&predictions, &rec_map, &labeled));
    }

    if args.validity {
        let corpus_path = args
            .corpus
            .as_deref()
            .ok_or_else(|| CliError::usage("--validity needs --corpus"))?;
        let corpus = stages::load_corpus_checked(corpus_path)?;
        let raw_names = stages::all_raw_names(&prediction_records);
        if raw_names.is_empty() {
            eprintln!(
                "warning: predictions file `{}` carries no raw extraction lists; \
                 validity covers 0 names",
                args.pred.display()
            );
        }
        report.validity = Some(name_validity_portions(&raw_names, &corpus));
    }

    if let Some(path) = &args.out_json {
        stages::write_json_pretty(path, &report.to_json(), "report")?;
    }
    if let Some(path) = &args.out_text {
        stages::write_text(path, &report.render_text(), "report")?;
    }
    print!("{}", report.render_text());
    Ok(())
}
