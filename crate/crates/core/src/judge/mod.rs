//! LLM-as-a-judge orchestration for the LF+ metric: prompt construction,
//! endpoint querying under three generation configurations, structured
//! reply parsing, verdict aggregation, and judge validation against
//! reference captions.

mod client;
mod mock;
mod parse;
mod prompt;

pub use client::query_judge;
pub use mock::{MockJudgeServer, MockReply, MockRequest};
pub use parse::parse_verdict;
pub use prompt::{build_prompt, format_verdict, CAPTION_PLACEHOLDER};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::{EvaluationSample, LanguageTag};
use crate::error::{Error, Result};

/// Name of one of the three canonical generation configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConfigName {
    A,
    B,
    C,
}

impl fmt::Display for ConfigName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigName::A => write!(f, "A"),
            ConfigName::B => write!(f, "B"),
            ConfigName::C => write!(f, "C"),
        }
    }
}

impl FromStr for ConfigName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(ConfigName::A),
            "B" | "b" => Ok(ConfigName::B),
            "C" | "c" => Ok(ConfigName::C),
            other => Err(Error::InvalidParam(format!(
                "unknown generation config {other:?}"
            ))),
        }
    }
}

/// Sampling parameters for one judge pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub name: ConfigName,
    pub temperature: f64,
    pub top_p: f64,
    pub max_new_tokens: u32,
}

impl GenerationConfig {
    pub fn by_name(name: ConfigName) -> Self {
        match name {
            ConfigName::A => GenerationConfig {
                name,
                temperature: 0.6,
                top_p: 0.7,
                max_new_tokens: 50,
            },
            ConfigName::B => GenerationConfig {
                name,
                temperature: 0.8,
                top_p: 0.6,
                max_new_tokens: 50,
            },
            ConfigName::C => GenerationConfig {
                name,
                temperature: 1.0,
                top_p: 0.5,
                max_new_tokens: 50,
            },
        }
    }

    /// The canonical A, B, C triple.
    pub fn canonical() -> [GenerationConfig; 3] {
        [
            GenerationConfig::by_name(ConfigName::A),
            GenerationConfig::by_name(ConfigName::B),
            GenerationConfig::by_name(ConfigName::C),
        ]
    }
}

/// Per-configuration judge output. An absent field means the raw reply
/// failed format extraction for that field.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgeVerdict {
    pub language_guess: Option<String>,
    pub language_score: Option<f64>,
    pub fully_in_language: Option<bool>,
    pub summary: Option<String>,
    pub config_name: ConfigName,
}

impl JudgeVerdict {
    pub fn empty(config_name: ConfigName) -> Self {
        JudgeVerdict {
            language_guess: None,
            language_score: None,
            fully_in_language: None,
            summary: None,
            config_name,
        }
    }
}

/// Three-way aggregate of per-configuration verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedVerdict {
    pub mean_language_score: Option<f64>,
    pub fully_in_language: bool,
    /// True iff every per-configuration boolean field was absent.
    pub unparseable: bool,
}

/// Aggregates whatever verdicts are available: numeric scores average over
/// present values; the boolean takes the majority of present values, with
/// a tie (or nothing present) resolving to false.
pub fn aggregate_available(verdicts: &[JudgeVerdict]) -> AggregatedVerdict {
    let scores: Vec<f64> = verdicts.iter().filter_map(|v| v.language_score).collect();
    let mean_language_score = if scores.is_empty() {
        None
    } else {
        Some(scores.iter().sum::<f64>() / scores.len() as f64)
    };
    let n_true = verdicts
        .iter()
        .filter(|v| v.fully_in_language == Some(true))
        .count();
    let n_false = verdicts
        .iter()
        .filter(|v| v.fully_in_language == Some(false))
        .count();
    AggregatedVerdict {
        mean_language_score,
        fully_in_language: n_true > n_false,
        unparseable: n_true + n_false == 0,
    }
}

/// Aggregates exactly one verdict per canonical configuration A, B, C.
pub fn aggregate_verdicts(verdicts: &[JudgeVerdict; 3]) -> Result<AggregatedVerdict> {
    let mut names: Vec<ConfigName> = verdicts.iter().map(|v| v.config_name).collect();
    names.sort();
    if names != [ConfigName::A, ConfigName::B, ConfigName::C] {
        return Err(Error::BadConfigSet(format!("{names:?}")));
    }
    Ok(aggregate_available(verdicts))
}

/// One sample's judging state, as consumed by [`lf_plus`].
#[derive(Debug, Clone, Copy)]
pub struct JudgedSample<'a> {
    pub sample_id: &'a str,
    pub lf_correct: bool,
    pub verdict: Option<&'a AggregatedVerdict>,
}

/// LF+: the percentage of all samples that both passed the identifier and
/// were judged fully in the target language. Samples failing LF count as
/// LF+ failures without being judged; LF-correct samples must carry a
/// verdict.
pub fn lf_plus(rows: &[JudgedSample]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::EmptyInput(
            "lf_plus requires at least one sample".into(),
        ));
    }
    let mut hits = 0usize;
    for row in rows {
        match (row.lf_correct, row.verdict) {
            (true, None) => return Err(Error::MissingVerdict(row.sample_id.to_string())),
            (true, Some(v)) if v.fully_in_language => hits += 1,
            _ => {}
        }
    }
    Ok(100.0 * hits as f64 / rows.len() as f64)
}

/// Inference endpoint settings for judge queries.
#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_name: String,
    /// Environment variable holding the bearer token; None sends no auth.
    pub api_key_env: Option<String>,
    pub timeout: Duration,
    pub max_retries: u32,
    pub parallelism: usize,
    /// First retry delay; doubles per attempt with jitter.
    pub backoff_base: Duration,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model_name: model_name.into(),
            api_key_env: None,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            parallelism: 1,
            backoff_base: Duration::from_millis(500),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            return Err(Error::InvalidParam(
                "endpoint timeout must be positive".into(),
            ));
        }
        if self.parallelism < 1 {
            return Err(Error::InvalidParam("parallelism must be at least 1".into()));
        }
        Ok(())
    }
}

/// Judges one caption under each configuration, in order.
pub fn judge_caption(
    caption: &str,
    configs: &[GenerationConfig],
    endpoint: &EndpointConfig,
) -> Result<Vec<JudgeVerdict>> {
    let prompt = build_prompt(caption);
    let mut verdicts = Vec::with_capacity(configs.len());
    for gen in configs {
        let raw = query_judge(&prompt, gen, endpoint)?;
        verdicts.push(parse_verdict(&raw, gen.name));
    }
    Ok(verdicts)
}

/// Judges a batch of captions with a bounded worker pool. Output order
/// follows input order regardless of completion order; in-flight requests
/// share no mutable state.
pub fn judge_all(
    captions: &[String],
    configs: &[GenerationConfig],
    endpoint: &EndpointConfig,
) -> Vec<Result<Vec<JudgeVerdict>>> {
    let workers = endpoint.parallelism.max(1).min(captions.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<Result<Vec<JudgeVerdict>>>>> = (0..captions.len())
        .map(|_| std::sync::Mutex::new(None))
        .collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= captions.len() {
                    break;
                }
                let outcome = judge_caption(&captions[i], configs, endpoint);
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .unwrap()
                .expect("worker filled every slot")
        })
        .collect()
}

/// Per-language pass rate of the judge over reference captions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JudgePassRate {
    pub language: LanguageTag,
    pub references: usize,
    pub passed: usize,
    pub unparseable: usize,
    /// Fraction of references judged fully in-language, in [0, 1].
    pub pass_rate: f64,
    /// Set when the rate falls below the configured threshold.
    pub flagged: bool,
}

/// Judge-the-judge: scores every reference caption with configuration B
/// only and reports the per-language fraction judged fully in-language.
/// Transport failures are tallied as unparseable (and count against the
/// rate). Languages without references are omitted.
pub fn validate_judge(
    samples: &[EvaluationSample],
    endpoint: &EndpointConfig,
    threshold: f64,
) -> Result<Vec<JudgePassRate>> {
    endpoint.validate()?;
    let mut languages: Vec<LanguageTag> = Vec::new();
    let mut references: Vec<(usize, String)> = Vec::new(); // (language index, text)
    for sample in samples {
        for reference in &sample.references {
            if reference.trim().is_empty() {
                continue;
            }
            let lang_idx = match languages
                .iter()
                .position(|l| l.code() == sample.target_language.code())
            {
                Some(i) => i,
                None => {
                    languages.push(sample.target_language.clone());
                    languages.len() - 1
                }
            };
            references.push((lang_idx, reference.clone()));
        }
    }
    if references.is_empty() {
        return Err(Error::EmptyInput(
            "validate_judge requires reference captions".into(),
        ));
    }

    let configs = [GenerationConfig::by_name(ConfigName::B)];
    let captions: Vec<String> = references.iter().map(|(_, text)| text.clone()).collect();
    let outcomes = judge_all(&captions, &configs, endpoint);

    let mut by_language: BTreeMap<String, (LanguageTag, usize, usize, usize)> = BTreeMap::new();
    for ((lang_idx, _), outcome) in references.iter().zip(outcomes) {
        let language = &languages[*lang_idx];
        let entry = by_language
            .entry(language.code().to_string())
            .or_insert_with(|| (language.clone(), 0, 0, 0));
        entry.1 += 1;
        match outcome {
            Ok(verdicts) => {
                let agg = aggregate_available(&verdicts);
                if agg.fully_in_language {
                    entry.2 += 1;
                }
                if agg.unparseable {
                    entry.3 += 1;
                }
            }
            Err(_) => entry.3 += 1, // transport failure: unparseable, not passed
        }
    }

    Ok(by_language
        .into_values()
        .map(|(language, total, passed, unparseable)| {
            let pass_rate = passed as f64 / total as f64;
            JudgePassRate {
                language,
                references: total,
                passed,
                unparseable,
                pass_rate,
                flagged: pass_rate < threshold,
            }
        })
        .collect())
}
