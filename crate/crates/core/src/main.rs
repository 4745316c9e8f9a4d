//! lfkit command-line interface: one subcommand per pipeline stage.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 transport failure.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use lfkit::chrf::{chrf_pp, ChrfParams};
use lfkit::corpus::{
    load_results, load_samples, write_results, EvaluationSample, ResultFormat, SampleResult,
};
use lfkit::error::{Error, Result};
use lfkit::judge::{
    aggregate_available, aggregate_verdicts, judge_all, lf_plus, validate_judge, ConfigName,
    EndpointConfig, GenerationConfig, JudgedSample,
};
use lfkit::langid::{identify_all, load_label_map, IdentifierBackend};
use lfkit::merge::{merge_checkpoints, read_checkpoint, write_checkpoint, MergeMethod, MergeSpec};
use lfkit::mixer::{
    interleave_manifest, plan_mix, scale_text_budget, StageId, StageVolume, Strategy,
};
use lfkit::report::{build_report, emit, interval_series, render_interval_series, ReportFormat};

#[derive(Debug, Parser)]
#[command(
    name = "lfkit",
    version,
    about = "Language-fidelity evaluation and model post-processing toolkit"
)]
struct Cli {
    /// Log level: error, warn, info, debug, trace
    #[arg(long, global = true, default_value = "info")]
    log_level: String,

    /// Seed for operations that shuffle
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Bounded worker count for backend and endpoint calls
    #[arg(long, global = true, default_value_t = 4)]
    parallelism: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Identify caption languages and compute per-language LF
    Lf(LfArgs),
    /// Judge LF-correct samples with an LLM endpoint and compute LF+
    Judge(JudgeArgs),
    /// Score captions against references with chrF++
    Chrf(ChrfArgs),
    /// Merge two checkpoints by linear or spherical interpolation
    Merge(MergeArgs),
    /// Plan a text-budget allocation and optionally emit a manifest
    Mix(MixArgs),
    /// Assemble per-language metric tables and interval-plot series
    Report(ReportArgs),
    /// Judge reference captions to validate the judge itself
    ValidateJudge(ValidateJudgeArgs),
}

#[derive(Debug, Args)]
struct LfArgs {
    /// Sample corpus (jsonl, one record per line)
    #[arg(long)]
    samples: PathBuf,
    /// Output directory; all artifacts land here
    #[arg(long)]
    out: PathBuf,
    /// Identifier backend: builtin, external, http
    #[arg(long, default_value = "builtin")]
    backend: String,
    /// Command line for the external backend
    #[arg(long)]
    command: Option<String>,
    /// URL for the http backend
    #[arg(long)]
    endpoint: Option<String>,
    /// Two-column label map file (backend_label tag)
    #[arg(long)]
    label_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct JudgeArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Results from the lf subcommand (jsonl)
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Chat-completions base URL
    #[arg(long)]
    endpoint: String,
    /// Model name sent with each request
    #[arg(long)]
    model: String,
    /// Environment variable holding the bearer token
    #[arg(long)]
    api_key_env: Option<String>,
    /// Generation configs to run, comma separated (subset of A,B,C)
    #[arg(long, default_value = "A,B,C")]
    configs: String,
    /// Per-request timeout in seconds
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
}

#[derive(Debug, Args)]
struct ChrfArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Existing results to augment with chrF++ scores
    #[arg(long)]
    results: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 6)]
    char_order: usize,
    #[arg(long, default_value_t = 2)]
    word_order: usize,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
}

#[derive(Debug, Args)]
struct MergeArgs {
    /// Visually instructed checkpoint (first parent)
    #[arg(long)]
    instructed: PathBuf,
    /// Backbone checkpoint (second parent; alpha weighs this one)
    #[arg(long)]
    backbone: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// lerp or slerp
    #[arg(long)]
    method: String,
    /// Weight on the backbone checkpoint, in [0,1]
    #[arg(long)]
    alpha: f64,
    /// Name globs copied verbatim from the instructed checkpoint.
    /// Tensor keys are architecture specific, so state them explicitly.
    #[arg(long, required = true, num_args = 1..)]
    preserve: Vec<String>,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
}

#[derive(Debug, Args)]
struct MixArgs {
    /// TR-3S, TR-2S, or TR-1S
    #[arg(long)]
    strategy: String,
    #[arg(long)]
    out: PathBuf,
    /// Explicit text budget (mutually exclusive with --ratio)
    #[arg(long)]
    text_total: Option<u64>,
    /// Text-to-visual ratio; requires --visual-total
    #[arg(long)]
    ratio: Option<f64>,
    /// Total visual volume the ratio applies to
    #[arg(long)]
    visual_total: Option<u64>,
    /// Per-stage visual volumes, e.g. 1.5=2200000,2=1650000,2.5=1650000
    #[arg(long)]
    volumes: String,
    /// Id-per-line file of visual samples (enables manifest emission)
    #[arg(long)]
    visual_ids: Option<PathBuf>,
    /// Id-per-line file of the text pool
    #[arg(long)]
    text_ids: Option<PathBuf>,
    /// Stage whose allocation feeds the manifest
    #[arg(long)]
    stage: Option<String>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// csv, markdown, or json
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Named results for the interval series: NAME=RESULTS_PATH
    #[arg(long, num_args = 0..)]
    compare: Vec<String>,
    #[arg(long, default_value_t = 6)]
    char_order: usize,
    #[arg(long, default_value_t = 2)]
    word_order: usize,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
}

#[derive(Debug, Args)]
struct ValidateJudgeArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    endpoint: String,
    #[arg(long)]
    model: String,
    #[arg(long)]
    api_key_env: Option<String>,
    /// Pass-rate below which a language is flagged
    #[arg(long, default_value_t = 0.90)]
    threshold: f64,
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not usage errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .init();
    log::info!("resolved configuration: {cli:?}");

    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Lf(args) => cmd_lf(cli, args),
        Command::Judge(args) => cmd_judge(cli, args),
        Command::Chrf(args) => cmd_chrf(args),
        Command::Merge(args) => cmd_merge(args),
        Command::Mix(args) => cmd_mix(cli, args),
        Command::Report(args) => cmd_report(args),
        Command::ValidateJudge(args) => cmd_validate_judge(cli, args),
    }
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })
}

fn load_corpus(path: &Path) -> Result<Vec<EvaluationSample>> {
    let samples = load_samples(path)?;
    if samples.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} holds no samples",
            path.display()
        )));
    }
    Ok(samples)
}

/// Per-language groups keyed by language code, in sorted order.
fn group_by_language(samples: &[EvaluationSample]) -> BTreeMap<&str, Vec<&EvaluationSample>> {
    let mut grouped: BTreeMap<&str, Vec<&EvaluationSample>> = BTreeMap::new();
    for sample in samples {
        grouped
            .entry(sample.target_language.code())
            .or_default()
            .push(sample);
    }
    grouped
}

fn cmd_lf(cli: &Cli, args: &LfArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let samples = load_corpus(&args.samples)?;

    let label_map = match &args.label_map {
        Some(path) => load_label_map(path)?,
        None => HashMap::new(),
    };
    let backend = match args.backend.as_str() {
        "builtin" => IdentifierBackend::builtin(),
        "external" => {
            let command = args.command.clone().ok_or_else(|| {
                Error::InvalidParam("--backend external requires --command".into())
            })?;
            IdentifierBackend::external_command(command, label_map)
        }
        "http" => {
            let endpoint = args
                .endpoint
                .clone()
                .ok_or_else(|| Error::InvalidParam("--backend http requires --endpoint".into()))?;
            IdentifierBackend::http_endpoint(endpoint, label_map)
        }
        other => {
            return Err(Error::InvalidParam(format!(
                "unknown backend kind {other:?}"
            )))
        }
    };

    let identifications = identify_all(&samples, &backend, cli.parallelism);
    let mut results = Vec::with_capacity(samples.len());
    let mut failures = 0usize;
    for (sample, outcome) in samples.iter().zip(identifications) {
        let mut result = SampleResult::new(&sample.sample_id);
        match outcome {
            Ok(id) => {
                result.lf_correct = Some(id.tag.matches(&sample.target_language));
                result.identified_language = Some(id.tag);
            }
            Err(e) => {
                failures += 1;
                log::warn!("sample {}: identification failed: {e}", sample.sample_id);
            }
        }
        results.push(result);
    }

    let results_path = args.out.join("results.jsonl");
    write_results(&results, &results_path, ResultFormat::Jsonl)?;

    let mut failed_languages = Vec::new();
    let by_id: HashMap<&str, &SampleResult> =
        results.iter().map(|r| (r.sample_id.as_str(), r)).collect();
    let mut total_correct = 0usize;
    let grouped = group_by_language(&samples);
    for (code, members) in &grouped {
        let correct = members
            .iter()
            .filter(|s| by_id[s.sample_id.as_str()].lf_correct == Some(true))
            .count();
        total_correct += correct;
        let lf = 100.0 * correct as f64 / members.len() as f64;
        println!("lf language={code} n={} lf={lf:.3}", members.len());
        if correct == 0 {
            failed_languages.push(code.to_string());
        }
    }
    println!(
        "lf-summary samples={} languages={} failures={failures} lf={:.3} results={}",
        samples.len(),
        grouped.len(),
        100.0 * total_correct as f64 / samples.len() as f64,
        results_path.display()
    );

    if !failed_languages.is_empty() {
        return Err(Error::InvalidRecord(format!(
            "identification failed for every sample of: {}",
            failed_languages.join(", ")
        )));
    }
    Ok(())
}

fn parse_configs(spec: &str) -> Result<Vec<GenerationConfig>> {
    let mut names = Vec::new();
    for part in spec.split(',') {
        let name: ConfigName = part.parse()?;
        if names.contains(&name) {
            return Err(Error::InvalidParam(format!("config {name} listed twice")));
        }
        names.push(name);
    }
    Ok(names.into_iter().map(GenerationConfig::by_name).collect())
}

fn endpoint_config(
    cli: &Cli,
    endpoint: &str,
    model: &str,
    api_key_env: &Option<String>,
    timeout_secs: u64,
    max_retries: u32,
) -> EndpointConfig {
    let mut config = EndpointConfig::new(endpoint, model);
    config.api_key_env = api_key_env.clone();
    config.timeout = Duration::from_secs(timeout_secs);
    config.max_retries = max_retries;
    config.parallelism = cli.parallelism;
    config
}

fn cmd_judge(cli: &Cli, args: &JudgeArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let samples = load_corpus(&args.samples)?;
    let mut results = load_results(&args.results, ResultFormat::Jsonl)?;
    if results.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} holds no results",
            args.results.display()
        )));
    }
    let by_id: HashMap<&str, &EvaluationSample> =
        samples.iter().map(|s| (s.sample_id.as_str(), s)).collect();
    for result in &results {
        if result.lf_correct.is_none() {
            return Err(Error::InvalidRecord(format!(
                "result {} carries no lf_correct flag; run lf first",
                result.sample_id
            )));
        }
        if !by_id.contains_key(result.sample_id.as_str()) {
            return Err(Error::UnjoinedResult(result.sample_id.clone()));
        }
    }

    let configs = parse_configs(&args.configs)?;
    if configs.is_empty() {
        return Err(Error::InvalidParam(
            "--configs must name at least one config".into(),
        ));
    }
    let canonical_triple = configs.len() == 3;
    let endpoint = endpoint_config(
        cli,
        &args.endpoint,
        &args.model,
        &args.api_key_env,
        args.timeout_secs,
        args.max_retries,
    );

    // only samples the identifier passed get judged
    let judged_indices: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.lf_correct == Some(true))
        .map(|(i, _)| i)
        .collect();
    let captions: Vec<String> = judged_indices
        .iter()
        .map(|&i| by_id[results[i].sample_id.as_str()].caption.clone())
        .collect();

    let outcomes = judge_all(&captions, &configs, &endpoint);
    for (&i, outcome) in judged_indices.iter().zip(outcomes) {
        let verdicts = outcome.map_err(|e| {
            log::error!("sample {}: {e}", results[i].sample_id);
            e
        })?;
        let aggregated = if canonical_triple {
            let triple: [_; 3] = verdicts.try_into().expect("three configs");
            aggregate_verdicts(&triple)?
        } else {
            aggregate_available(&verdicts)
        };
        results[i].aggregated_verdict = Some(aggregated);
    }

    let results_path = args.out.join("results.jsonl");
    write_results(&results, &results_path, ResultFormat::Jsonl)?;

    let result_by_id: HashMap<&str, &SampleResult> =
        results.iter().map(|r| (r.sample_id.as_str(), r)).collect();
    let grouped = group_by_language(&samples);
    let mut lf_plus_weighted = 0.0;
    for (code, members) in &grouped {
        let rows: Vec<JudgedSample> = members
            .iter()
            .map(|s| {
                let r = result_by_id[s.sample_id.as_str()];
                JudgedSample {
                    sample_id: &r.sample_id,
                    lf_correct: r.lf_correct.unwrap_or(false),
                    verdict: r.aggregated_verdict.as_ref(),
                }
            })
            .collect();
        let correct = rows.iter().filter(|r| r.lf_correct).count();
        let lf = 100.0 * correct as f64 / rows.len() as f64;
        let plus = lf_plus(&rows)?;
        lf_plus_weighted += plus * rows.len() as f64;
        println!(
            "judge language={code} n={} lf={lf:.3} lf_plus={plus:.3}",
            rows.len()
        );
    }
    println!(
        "judge-summary samples={} judged={} configs={} lf_plus={:.3} results={}",
        samples.len(),
        captions.len(),
        args.configs,
        lf_plus_weighted / samples.len() as f64,
        results_path.display()
    );
    Ok(())
}

fn cmd_chrf(args: &ChrfArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let samples = load_corpus(&args.samples)?;
    let params = ChrfParams {
        char_order: args.char_order,
        word_order: args.word_order,
        beta: args.beta,
    };
    params.validate()?;

    let mut results = match &args.results {
        Some(path) => {
            let results = load_results(path, ResultFormat::Jsonl)?;
            for r in &results {
                if !samples.iter().any(|s| s.sample_id == r.sample_id) {
                    return Err(Error::UnjoinedResult(r.sample_id.clone()));
                }
            }
            results
        }
        None => samples
            .iter()
            .map(|s| SampleResult::new(&s.sample_id))
            .collect(),
    };

    let by_id: HashMap<&str, &EvaluationSample> =
        samples.iter().map(|s| (s.sample_id.as_str(), s)).collect();
    let mut scored = 0usize;
    for result in &mut results {
        let sample = by_id[result.sample_id.as_str()];
        if sample.references.iter().all(|r| r.trim().is_empty()) {
            log::warn!(
                "sample {}: no references, skipping chrF++",
                sample.sample_id
            );
            continue;
        }
        let sentence = chrf_pp(&sample.caption, &sample.references, &params)?;
        if sentence.degenerate {
            log::warn!("sample {}: empty caption scored 0", sample.sample_id);
        }
        result.chrf_score = Some(sentence.score);
        scored += 1;
    }
    if scored == 0 {
        return Err(Error::EmptyInput(
            "no sample carries a reference caption".into(),
        ));
    }

    let results_path = args.out.join("results.jsonl");
    write_results(&results, &results_path, ResultFormat::Jsonl)?;

    let result_by_id: HashMap<&str, &SampleResult> =
        results.iter().map(|r| (r.sample_id.as_str(), r)).collect();
    let grouped = group_by_language(&samples);
    let mut corpus_sum = 0.0;
    for (code, members) in &grouped {
        let scores: Vec<f64> = members
            .iter()
            .filter_map(|s| {
                result_by_id
                    .get(s.sample_id.as_str())
                    .and_then(|r| r.chrf_score)
            })
            .collect();
        if scores.is_empty() {
            println!("chrf language={code} n={} scored=0", members.len());
            continue;
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        corpus_sum += scores.iter().sum::<f64>();
        println!(
            "chrf language={code} n={} scored={} chrf={mean:.3}",
            members.len(),
            scores.len()
        );
    }
    println!(
        "chrf-summary samples={} scored={scored} chrf={:.3} results={}",
        samples.len(),
        corpus_sum / scored as f64,
        results_path.display()
    );
    Ok(())
}

fn cmd_merge(args: &MergeArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let method: MergeMethod = args.method.parse()?;
    let spec = MergeSpec {
        method,
        alpha: args.alpha,
        preserve_patterns: args.preserve.clone(),
        epsilon: args.epsilon,
    };
    let instructed = read_checkpoint(&args.instructed)?;
    let backbone = read_checkpoint(&args.backbone)?;
    let merged = merge_checkpoints(&instructed, &backbone, &spec)?;

    let preserved = merged
        .tensors
        .keys()
        .filter(|name| {
            spec.preserve_patterns
                .iter()
                .any(|p| lfkit::merge::glob_match(p, name))
        })
        .count();
    let out_path = args.out.join("merged.safetensors");
    write_checkpoint(&merged, &out_path)?;
    println!(
        "merge-summary method={method} alpha={} tensors={} preserved={preserved} digest={} out={}",
        args.alpha,
        merged.tensors.len(),
        merged.digest(),
        out_path.display()
    );
    Ok(())
}

fn parse_volumes(spec: &str) -> Result<Vec<StageVolume>> {
    let mut volumes = Vec::new();
    for part in spec.split(',') {
        let (stage, count) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidParam(format!("volume {part:?} is not stage=count")))?;
        let stage: StageId = stage.parse()?;
        if volumes.iter().any(|v: &StageVolume| v.stage == stage) {
            return Err(Error::InvalidParam(format!("stage {stage} listed twice")));
        }
        let visual_count: u64 = count.trim().parse().map_err(|_| {
            Error::InvalidParam(format!("volume count {count:?} is not an integer"))
        })?;
        volumes.push(StageVolume {
            stage,
            visual_count,
        });
    }
    Ok(volumes)
}

fn read_id_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect())
}

fn cmd_mix(cli: &Cli, args: &MixArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let strategy: Strategy = args.strategy.parse()?;
    let volumes = parse_volumes(&args.volumes)?;

    let text_total = match (args.text_total, args.ratio) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidParam(
                "--text-total and --ratio are mutually exclusive".into(),
            ))
        }
        (Some(total), None) => total,
        (None, Some(ratio)) => {
            let visual_total = args
                .visual_total
                .ok_or_else(|| Error::InvalidParam("--ratio requires --visual-total".into()))?;
            scale_text_budget(ratio, visual_total)?
        }
        (None, None) => {
            return Err(Error::InvalidParam(
                "one of --text-total or --ratio is required".into(),
            ))
        }
    };

    let plan = plan_mix(strategy, text_total, &volumes)?;
    let plan_path = args.out.join("plan.tsv");
    std::fs::write(&plan_path, plan.to_tsv()).map_err(|source| Error::Io {
        path: plan_path.clone(),
        source,
    })?;
    for (stage, allocation) in &plan.allocations {
        println!("mix stage={stage} allocation={allocation}");
    }

    let mut manifest_note = String::new();
    match (&args.visual_ids, &args.text_ids) {
        (Some(visual_path), Some(text_path)) => {
            let stage: StageId = args
                .stage
                .as_deref()
                .ok_or_else(|| Error::InvalidParam("manifest emission requires --stage".into()))?
                .parse()?;
            let allocation = *plan
                .allocations
                .get(&stage)
                .ok_or_else(|| Error::MissingStage(stage.to_string()))?;
            let visual_ids = read_id_lines(visual_path)?;
            let text_ids = read_id_lines(text_path)?;
            let manifest = interleave_manifest(&visual_ids, &text_ids, allocation, cli.seed)?;
            let manifest_path = args.out.join(format!("manifest_{stage}.txt"));
            let body: String = manifest.iter().map(|e| format!("{e}\n")).collect();
            std::fs::write(&manifest_path, body).map_err(|source| Error::Io {
                path: manifest_path.clone(),
                source,
            })?;
            manifest_note = format!(" manifest={}", manifest_path.display());
        }
        (None, None) => {}
        _ => {
            return Err(Error::InvalidParam(
                "--visual-ids and --text-ids must be given together".into(),
            ))
        }
    }

    println!(
        "mix-summary strategy={strategy} text_total={text_total} plan={}{manifest_note}",
        plan_path.display()
    );
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let samples = load_corpus(&args.samples)?;
    let results = load_results(&args.results, ResultFormat::Jsonl)?;
    let params = ChrfParams {
        char_order: args.char_order,
        word_order: args.word_order,
        beta: args.beta,
    };
    let format: ReportFormat = args.format.parse()?;

    let report = build_report(&samples, &results, &params)?;
    let report_path = args.out.join(format!("report.{}", format.extension()));
    emit(&report, format, &report_path)?;

    let mut interval_note = String::new();
    if !args.compare.is_empty() {
        let mut named = BTreeMap::new();
        for entry in &args.compare {
            let (name, path) = entry.split_once('=').ok_or_else(|| {
                Error::InvalidParam(format!("--compare entry {entry:?} is not NAME=PATH"))
            })?;
            let model_results = load_results(Path::new(path), ResultFormat::Jsonl)?;
            named.insert(
                name.to_string(),
                build_report(&samples, &model_results, &params)?,
            );
        }
        let rows = interval_series(&named)?;
        let interval_path = args.out.join("interval.tsv");
        std::fs::write(&interval_path, render_interval_series(&rows)).map_err(|source| {
            Error::Io {
                path: interval_path.clone(),
                source,
            }
        })?;
        interval_note = format!(" interval={}", interval_path.display());
    }

    println!(
        "report-summary languages={} out={}{interval_note}",
        report.rows.len(),
        report_path.display()
    );
    Ok(())
}

fn cmd_validate_judge(cli: &Cli, args: &ValidateJudgeArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let samples = load_corpus(&args.samples)?;
    let endpoint = endpoint_config(
        cli,
        &args.endpoint,
        &args.model,
        &args.api_key_env,
        args.timeout_secs,
        args.max_retries,
    );

    let rates = validate_judge(&samples, &endpoint, args.threshold)?;
    let mut body = String::from("language\treferences\tpassed\tunparseable\tpass_rate\tflagged\n");
    let mut flagged = 0usize;
    for rate in &rates {
        if rate.flagged {
            flagged += 1;
        }
        println!(
            "validate-judge language={} references={} passed={} rate={:.3} flagged={}",
            rate.language, rate.references, rate.passed, rate.pass_rate, rate.flagged
        );
        body.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.6}\t{}\n",
            rate.language,
            rate.references,
            rate.passed,
            rate.unparseable,
            rate.pass_rate,
            rate.flagged
        ));
    }
    let table_path = args.out.join("judge_validation.tsv");
    std::fs::write(&table_path, body).map_err(|source| Error::Io {
        path: table_path.clone(),
        source,
    })?;
    println!(
        "validate-judge-summary languages={} flagged={flagged} threshold={} out={}",
        rates.len(),
        args.threshold,
        table_path.display()
    );
    Ok(())
}
