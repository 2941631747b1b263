//! The end-to-end pipeline: one config file in, a directory of stage
//! artifacts out. Every artifact uses the same schema as the matching
//! standalone subcommand, so any stage can be re-run or inspected in
//! isolation, and a finished run is byte-reproducible: rerunning with the
//! same inputs writes identical files regardless of concurrency.

use std::collections::BTreeMap;
use std::time::Duration;

use cve2lib::dataset::{zero_shot_partition, SplitPart};
use cve2lib::retriever::{Recommendation, RecommendationLine};
use cve2lib::{
    evaluate, name_validity_portions, relative_precision, run_inference, GenerationParams,
    RecommendationSource, TfidfIndex,
};

use crate::commands::build_backend;
use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::stages;

pub fn cmd_pipeline(config: &PipelineConfig) -> Result<(), CliError> {
    config.validate()?;
    let out = &config.output_dir;
    std::fs::create_dir_all(out).map_err(|e| {
        CliError::data(format!("creating output directory `{}`: {e}", out.display()))
    })?;

    // -- load ----------------------------------------------------------
    let (corpus, records) = (|| {
        let corpus = stages::load_corpus_checked(&config.corpus)?;
        let records = stages::load_dataset_checked(&config.dataset)?;
        Ok((corpus, records))
    })()
    .map_err(|e: CliError| e.in_stage("load"))?;
    println!(
        "pipeline: load      {} libraries, {} vulnerability records",
        corpus.len(),
        records.len()
    );

    // -- split ---------------------------------------------------------
    let split = (|| {
        let spec = config.split.spec()?;
        let split = cve2lib::dataset::split_dataset(records, spec, config.split.seed)
            .map_err(|e| CliError::data(e.to_string()))?;
        stages::write_split(&out.join("split.jsonl"), &split)?;
        Ok(split)
    })()
    .map_err(|e: CliError| e.in_stage("split"))?;
    println!(
        "pipeline: split     train={} validation={} test={} (seed {})",
        split.train.len(),
        split.validation.len(),
        split.test.len(),
        config.split.seed
    );

    // -- partition -------------------------------------------------------
    let partition = (|| {
        let partition = zero_shot_partition(&split);
        let summary = stages::partition_summary(&split, &partition);
        stages::write_json_pretty(&out.join("partition.json"), &summary, "partition")?;
        Ok(partition)
    })()
    .map_err(|e: CliError| e.in_stage("partition"))?;
    println!(
        "pipeline: partition zero={} full={} unlabeled={} (unseen labels: {})",
        partition.v_zero.len(),
        partition.v_full.len(),
        partition.unlabeled_test,
        partition.l_zero.len()
    );

    let test_records = stages::part_records(&split, SplitPart::Test);

    // -- index + recommend ---------------------------------------------
    // Candidates are ranked once, persisted, and replayed into the prompts,
    // so the prompt text and the recommendations file can never disagree.
    let rec_map: BTreeMap<String, Vec<Recommendation>> = (|| {
        match config.recommender.source.as_str() {
            "index" => {
                let index = TfidfIndex::build(&corpus);
                index.save(&out.join("index.json")).map_err(|e| {
                    CliError::data(format!("writing index: {e}"))
                })?;
                println!(
                    "pipeline: index     {} documents, {} terms",
                    index.doc_count(),
                    index.term_count()
                );
                let mut map = BTreeMap::new();
                for record in &test_records {
                    let recs = index
                        .recommend(&record.description, config.recommender.top_k)
                        .map_err(|e| CliError::data(e.to_string()))?;
                    map.insert(record.cve_id.clone(), recs);
                }
                Ok(map)
            }
            "replay" => {
                let path = config
                    .recommender
                    .replay_file
                    .as_deref()
                    .expect("validated: replay source has a file");
                let (map, issues) = cve2lib::retriever::load_recommendations(path)
                    .map_err(|e| {
                        CliError::data(format!(
                            "reading recommendations `{}`: {e}",
                            path.display()
                        ))
                    })?;
                stages::warn_issues("recommendations", path, &issues);
                Ok(map)
            }
            _ => Ok(BTreeMap::new()),
        }
    })()
    .map_err(|e: CliError| e.in_stage("recommend"))?;

    let source = if config.recommender.source == "none" {
        RecommendationSource::None
    } else {
        let lines: Vec<RecommendationLine> = rec_map
            .iter()
            .map(|(cve_id, recs)| RecommendationLine {
                cve_id: cve_id.clone(),
                names: recs.iter().map(|r| r.name.clone()).collect(),
            })
            .collect();
        stages::write_jsonl(&out.join("recommendations.jsonl"), &lines, "recommendations")
            .map_err(|e| e.in_stage("recommend"))?;
        println!(
            "pipeline: recommend {} record(s), top_k={}",
            lines.len(),
            config.recommender.top_k
        );
        RecommendationSource::Replay(rec_map.clone())
    };

    // -- generate --------------------------------------------------------
    let run = (|| {
        let templates = match &config.templates_file {
            None => cve2lib::PromptTemplates::default(),
            Some(path) => cve2lib::PromptTemplates::from_file(path).map_err(|e| {
                CliError::data(format!("templates `{}`: {e}", path.display()))
            })?,
        };
        let backend = build_backend(
            &config.backend.kind,
            config.backend.replay_file.as_deref(),
            config.backend.endpoint.as_deref(),
            config.backend.credential_env.as_deref(),
            Duration::from_secs(config.backend.timeout_secs),
            config.backend.retries,
            &templates,
        )?;
        let params = GenerationParams {
            max_new_tokens: config.backend.max_new_tokens,
            temperature: config.backend.temperature,
        };
        let run = run_inference(
            &test_records,
            &source,
            &templates,
            backend.as_ref(),
            &params,
            config.backend.concurrency,
        )
        .map_err(|e| CliError::data(e.to_string()))?;
        stages::write_prompts(&out.join("prompts.jsonl"), &run)?;
        stages::write_responses(&out.join("responses.jsonl"), &run)?;
        stages::write_generation_errors(&out.join("generation_errors.jsonl"), &run)?;
        Ok(run)
    })()
    .map_err(|e: CliError| e.in_stage("generate"))?;
    println!(
        "pipeline: generate  {} response(s), {} error(s) [{}]",
        run.responses.len(),
        run.errors.len(),
        config.backend.kind
    );
    if !run.errors.is_empty() {
        eprintln!(
            "warning: {} record(s) failed; see generation_errors.jsonl",
            run.errors.len()
        );
    }

    // -- ground ----------------------------------------------------------
    let prediction_records = (|| {
        let space = config.search_space()?;
        let restricted = stages::restrict_corpus(&corpus, &space)?;
        let search_corpus = restricted.as_ref().unwrap_or(&corpus);
        let predictions: Vec<stages::PredictionRecord> = run
            .responses
            .iter()
            .map(|(cve_id, response)| {
                stages::ground_text(
                    cve_id,
                    &response.raw_text,
                    search_corpus,
                    &config.grounding.weights,
                )
            })
            .collect();
        stages::write_jsonl(&out.join("predictions.jsonl"), &predictions, "predictions")?;
        Ok(predictions)
    })()
    .map_err(|e: CliError| e.in_stage("ground"))?;
    println!("pipeline: ground    {} record(s)", prediction_records.len());

    // -- evaluate --------------------------------------------------------
    let report = (|| {
        let predictions = stages::prediction_set(&prediction_records);
        let mut report = evaluate(&predictions, &partition, &config.evaluation.ks);
        if !rec_map.is_empty() {
            let labeled: Vec<_> = partition
                .v_zero
                .iter()
                .chain(&partition.v_full)
                .cloned()
                .collect();
            report.relative = Some(relative_precision(&predictions, &rec_map, &labeled));
        }
        let raw_names = stages::all_raw_names(&prediction_records);
        report.validity = Some(name_validity_portions(&raw_names, &corpus));
        stages::write_json_pretty(&out.join("report.json"), &report.to_json(), "report")?;
        stages::write_text(&out.join("report.txt"), &report.render_text(), "report")?;
        Ok(report)
    })()
    .map_err(|e: CliError| e.in_stage("evaluate"))?;
    print!("{}", report.render_text());
    println!("pipeline: artifacts -> {}", out.display());
    Ok(())
}
