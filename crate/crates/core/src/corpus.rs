//! Evaluation samples and per-sample results: ingestion, validation, persistence.
//!
//! Records are line-delimited so corpora of Crossmodal-3600 scale stream in
//! constant memory. One sample per line:
//!
//! ```json
//! {"sample_id":"x1","target_language":"es","prompt":"...","caption":"...","references":["..."]}
//! ```

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::judge::AggregatedVerdict;

/// A normalized language tag: lowercase ISO 639-1/639-3 code plus an
/// optional title-case script (e.g. `es`, `spa_Latn`).
///
/// Comparison semantics live in [`LanguageTag::matches`]: the script is
/// ignored when either side omits it. Structural equality (`==`) requires
/// both fields to agree; use `matches` wherever an identifier output is
/// compared against a target language.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LanguageTag {
    code: String,
    script: Option<String>,
}

impl LanguageTag {
    pub fn new(code: &str, script: Option<&str>) -> Result<Self> {
        let code_norm = code.to_ascii_lowercase();
        if !(code_norm.len() == 2 || code_norm.len() == 3)
            || !code_norm.bytes().all(|b| b.is_ascii_lowercase())
        {
            return Err(Error::InvalidLanguageTag(code.to_string()));
        }
        let script_norm = match script {
            None => None,
            Some(s) => {
                if s.len() != 4 || !s.bytes().all(|b| b.is_ascii_alphabetic()) {
                    return Err(Error::InvalidLanguageTag(format!("{code}_{s}")));
                }
                let mut t = s.to_ascii_lowercase();
                t[..1].make_ascii_uppercase();
                Some(t)
            }
        };
        Ok(LanguageTag {
            code: code_norm,
            script: script_norm,
        })
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn script(&self) -> Option<&str> {
        self.script.as_deref()
    }

    /// Script-tolerant comparison: scripts are compared only when both
    /// sides carry one.
    pub fn matches(&self, other: &LanguageTag) -> bool {
        if self.code != other.code {
            return false;
        }
        match (&self.script, &other.script) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        }
    }
}

impl FromStr for LanguageTag {
    type Err = Error;

    /// Parses `code` or `code_Script` compound tags (the form external
    /// identifiers emit, e.g. `spa_Latn`).
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('_') {
            None => LanguageTag::new(s, None),
            Some((code, script)) => LanguageTag::new(code, Some(script)),
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.script {
            None => write!(f, "{}", self.code),
            Some(script) => write!(f, "{}_{}", self.code, script),
        }
    }
}

impl Serialize for LanguageTag {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LanguageTag {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One generated caption with its target language, prompt, and reference
/// captions (0–3; metrics that need references skip samples without them).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSample {
    pub sample_id: String,
    pub target_language: LanguageTag,
    #[serde(default)]
    pub prompt: String,
    pub caption: String,
    #[serde(default)]
    pub references: Vec<String>,
}

impl EvaluationSample {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.sample_id.is_empty() {
            return Err("sample_id is empty".into());
        }
        if self.caption.trim().is_empty() {
            return Err("caption is empty after whitespace trim".into());
        }
        if self.references.len() > 3 {
            return Err(format!(
                "{} references, at most 3 allowed",
                self.references.len()
            ));
        }
        Ok(())
    }
}

/// Per-sample measurement state. Optionals fill in as the pipeline stages
/// run: `lf` sets the identifier fields, `judge` attaches verdicts to
/// samples the identifier passed, `chrf` attaches reference-based scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub sample_id: String,
    pub identified_language: Option<LanguageTag>,
    pub lf_correct: Option<bool>,
    pub aggregated_verdict: Option<AggregatedVerdict>,
    pub chrf_score: Option<f64>,
}

impl SampleResult {
    pub fn new(sample_id: impl Into<String>) -> Self {
        SampleResult {
            sample_id: sample_id.into(),
            identified_language: None,
            lf_correct: None,
            aggregated_verdict: None,
            chrf_score: None,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.lf_correct.is_some() != self.identified_language.is_some() {
            return Err("lf_correct must be present exactly when identified_language is".into());
        }
        if self.aggregated_verdict.is_some() && self.lf_correct != Some(true) {
            return Err("aggregated_verdict requires lf_correct == true".into());
        }
        if let Some(score) = self.chrf_score {
            if !(0.0..=100.0).contains(&score) {
                return Err(format!("chrf_score {score} outside [0,100]"));
            }
        }
        Ok(())
    }
}

/// Serialization format for sample results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultFormat {
    Jsonl,
    Csv,
}

impl FromStr for ResultFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(ResultFormat::Jsonl),
            "csv" => Ok(ResultFormat::Csv),
            other => Err(Error::InvalidParam(format!(
                "unknown result format {other:?}"
            ))),
        }
    }
}

/// Loads a line-delimited sample corpus, preserving file order.
/// Rejects malformed lines (with their line number) and duplicate ids.
pub fn load_samples(path: impl AsRef<Path>) -> Result<Vec<EvaluationSample>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);

    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: EvaluationSample =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        sample
            .validate()
            .map_err(|message| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            })?;
        if !seen.insert(sample.sample_id.clone()) {
            return Err(Error::DuplicateSampleId(sample.sample_id));
        }
        samples.push(sample);
    }
    Ok(samples)
}

/// Writes results in file order. `load_results` after `write_results`
/// yields field-equal records for both formats.
pub fn write_results(
    results: &[SampleResult],
    path: impl AsRef<Path>,
    format: ResultFormat,
) -> Result<()> {
    let path = path.as_ref();
    for r in results {
        r.validate().map_err(Error::InvalidRecord)?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    match format {
        ResultFormat::Jsonl => {
            for r in results {
                serde_json::to_writer(&mut w, r).map_err(|e| Error::Io {
                    path: path.to_path_buf(),
                    source: e.into(),
                })?;
                w.write_all(b"\n").map_err(io_err(path))?;
            }
        }
        ResultFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(CSV_HEADER).map_err(|e| csv_err(path, e))?;
            for r in results {
                csv.write_record(to_csv_row(r))
                    .map_err(|e| csv_err(path, e))?;
            }
            csv.flush().map_err(io_err(path))?;
            return Ok(());
        }
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Loads results written by [`write_results`], preserving order.
pub fn load_results(path: impl AsRef<Path>, format: ResultFormat) -> Result<Vec<SampleResult>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    let mut results = Vec::new();
    match format {
        ResultFormat::Jsonl => {
            for (idx, line) in reader.lines().enumerate() {
                let line = line.map_err(io_err(path))?;
                if line.trim().is_empty() {
                    continue;
                }
                let r: SampleResult =
                    serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        message: e.to_string(),
                    })?;
                r.validate().map_err(|message| Error::MalformedRecord {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message,
                })?;
                results.push(r);
            }
        }
        ResultFormat::Csv => {
            let mut csv = csv::Reader::from_reader(reader);
            for (idx, record) in csv.records().enumerate() {
                let record = record.map_err(|e| csv_err(path, e))?;
                let r = from_csv_row(&record).map_err(|message| Error::MalformedRecord {
                    path: path.to_path_buf(),
                    line: idx + 2, // header occupies line 1
                    message,
                })?;
                results.push(r);
            }
        }
    }
    Ok(results)
}

const CSV_HEADER: [&str; 7] = [
    "sample_id",
    "identified_language",
    "lf_correct",
    "mean_language_score",
    "fully_in_language",
    "unparseable",
    "chrf_score",
];

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

fn to_csv_row(r: &SampleResult) -> Vec<String> {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let (mean, fully, unparseable) = match &r.aggregated_verdict {
        None => (None, None, None),
        Some(v) => (
            v.mean_language_score.map(|s| s.to_string()),
            Some(v.fully_in_language.to_string()),
            Some(v.unparseable.to_string()),
        ),
    };
    vec![
        r.sample_id.clone(),
        opt(r.identified_language.as_ref().map(|t| t.to_string())),
        opt(r.lf_correct.map(|b| b.to_string())),
        opt(mean),
        opt(fully),
        opt(unparseable),
        opt(r.chrf_score.map(|s| s.to_string())),
    ]
}

fn from_csv_row(record: &csv::StringRecord) -> std::result::Result<SampleResult, String> {
    if record.len() != CSV_HEADER.len() {
        return Err(format!(
            "expected {} columns, got {}",
            CSV_HEADER.len(),
            record.len()
        ));
    }
    let cell = |i: usize| -> Option<&str> {
        let v = record.get(i).unwrap_or("");
        if v.is_empty() {
            None
        } else {
            Some(v)
        }
    };
    let identified_language = cell(1)
        .map(|v| v.parse::<LanguageTag>().map_err(|e| e.to_string()))
        .transpose()?;
    let parse_bool = |v: &str| v.parse::<bool>().map_err(|e| e.to_string());
    let lf_correct = cell(2).map(parse_bool).transpose()?;
    let mean = cell(3)
        .map(|v| v.parse::<f64>().map_err(|e| e.to_string()))
        .transpose()?;
    let fully = cell(4).map(parse_bool).transpose()?;
    let unparseable = cell(5).map(parse_bool).transpose()?;
    let aggregated_verdict = match (fully, unparseable) {
        (None, None) => {
            if mean.is_some() {
                return Err("mean_language_score present without verdict booleans".into());
            }
            None
        }
        (Some(fully), Some(unparseable)) => Some(AggregatedVerdict {
            mean_language_score: mean,
            fully_in_language: fully,
            unparseable,
        }),
        _ => return Err("fully_in_language and unparseable must appear together".into()),
    };
    let chrf_score = cell(6)
        .map(|v| v.parse::<f64>().map_err(|e| e.to_string()))
        .transpose()?;
    let r = SampleResult {
        sample_id: record.get(0).unwrap_or("").to_string(),
        identified_language,
        lf_correct,
        aggregated_verdict,
        chrf_score,
    };
    r.validate()?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_corpus(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f.flush().unwrap();
        f
    }

    #[test]
    fn tag_parsing_and_normalization() {
        let t: LanguageTag = "ES".parse().unwrap();
        assert_eq!(t.to_string(), "es");
        let t: LanguageTag = "spa_latn".parse().unwrap();
        assert_eq!(t.to_string(), "spa_Latn");
        assert!("e".parse::<LanguageTag>().is_err());
        assert!("espa".parse::<LanguageTag>().is_err());
        assert!("es_Lat".parse::<LanguageTag>().is_err());
    }

    #[test]
    fn tag_matching_ignores_script_when_absent() {
        let bare: LanguageTag = "es".parse().unwrap();
        let latn: LanguageTag = "es_Latn".parse().unwrap();
        let cyrl: LanguageTag = "es_Cyrl".parse().unwrap();
        assert!(bare.matches(&latn));
        assert!(latn.matches(&bare));
        assert!(!latn.matches(&cyrl));
        assert!(!bare.matches(&"en".parse().unwrap()));
    }

    #[test]
    fn load_single_sample() {
        let f = write_corpus(&[r#"{"sample_id":"a","target_language":"es","caption":"hola"}"#]);
        let samples = load_samples(f.path()).unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].sample_id, "a");
        assert_eq!(samples[0].target_language.code(), "es");
        assert_eq!(samples[0].caption, "hola");
        assert!(samples[0].references.is_empty());
    }

    #[test]
    fn load_empty_file() {
        let f = write_corpus(&[]);
        assert!(load_samples(f.path()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_rejected() {
        let f = write_corpus(&[
            r#"{"sample_id":"a","target_language":"es","caption":"hola"}"#,
            r#"{"sample_id":"a","target_language":"es","caption":"adios"}"#,
        ]);
        match load_samples(f.path()) {
            Err(Error::DuplicateSampleId(id)) => assert_eq!(id, "a"),
            other => panic!("expected duplicate-id error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_carries_line_number() {
        let f = write_corpus(&[
            r#"{"sample_id":"a","target_language":"es","caption":"hola"}"#,
            r#"{"sample_id":"b""#,
        ]);
        match load_samples(f.path()) {
            Err(Error::MalformedRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed-record error, got {other:?}"),
        }
    }

    #[test]
    fn blank_caption_rejected() {
        let f = write_corpus(&[r#"{"sample_id":"a","target_language":"es","caption":"  "}"#]);
        assert!(load_samples(f.path()).is_err());
    }

    fn synthetic_results() -> Vec<SampleResult> {
        vec![
            SampleResult {
                sample_id: "a".into(),
                identified_language: Some("es".parse().unwrap()),
                lf_correct: Some(true),
                aggregated_verdict: Some(AggregatedVerdict {
                    mean_language_score: Some(0.9),
                    fully_in_language: true,
                    unparseable: false,
                }),
                chrf_score: Some(57.5),
            },
            SampleResult {
                sample_id: "b".into(),
                identified_language: Some("en".parse().unwrap()),
                lf_correct: Some(false),
                aggregated_verdict: None,
                chrf_score: None,
            },
            SampleResult::new("c"),
        ]
    }

    #[test]
    fn jsonl_round_trip() {
        let results = synthetic_results();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_results(&results, f.path(), ResultFormat::Jsonl).unwrap();
        let back = load_results(f.path(), ResultFormat::Jsonl).unwrap();
        assert_eq!(results, back);
    }

    #[test]
    fn csv_round_trip() {
        let results = synthetic_results();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_results(&results, f.path(), ResultFormat::Csv).unwrap();
        let back = load_results(f.path(), ResultFormat::Csv).unwrap();
        assert_eq!(results, back);
    }

    #[test]
    fn empty_csv_is_headered() {
        let f = tempfile::NamedTempFile::new().unwrap();
        write_results(&[], f.path(), ResultFormat::Csv).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("sample_id,"));
        assert!(load_results(f.path(), ResultFormat::Csv)
            .unwrap()
            .is_empty());
    }

    // any syntactically valid result set must survive write/load unchanged
    proptest::proptest! {
        #[test]
        fn results_round_trip_both_formats(results in proptest::collection::vec(arb_result(), 0..12)) {
            for format in [ResultFormat::Jsonl, ResultFormat::Csv] {
                let f = tempfile::NamedTempFile::new().unwrap();
                write_results(&results, f.path(), format).unwrap();
                let back = load_results(f.path(), format).unwrap();
                proptest::prop_assert_eq!(&results, &back);
            }
        }
    }

    fn arb_result() -> impl proptest::strategy::Strategy<Value = SampleResult> {
        use proptest::prelude::*;
        (
            "[a-z0-9]{1,8}",
            proptest::option::of(("[a-z]{2}", any::<bool>())),
            proptest::option::of(0.0f64..=100.0),
            proptest::option::of((proptest::option::of(0.0f64..=1.0), any::<bool>())),
        )
            .prop_map(|(id, identified, chrf, verdict)| {
                let (identified_language, lf_correct) = match identified {
                    None => (None, None),
                    Some((code, correct)) => {
                        (Some(code.parse::<LanguageTag>().unwrap()), Some(correct))
                    }
                };
                // verdicts are only legal on identifier-passed samples
                let aggregated_verdict = match (lf_correct, verdict) {
                    (Some(true), Some((mean, fully))) => Some(AggregatedVerdict {
                        mean_language_score: mean,
                        fully_in_language: fully,
                        unparseable: false,
                    }),
                    _ => None,
                };
                SampleResult {
                    sample_id: id,
                    identified_language,
                    lf_correct,
                    aggregated_verdict,
                    chrf_score: chrf,
                }
            })
    }

    #[test]
    fn verdict_without_lf_pass_rejected() {
        let r = SampleResult {
            sample_id: "a".into(),
            identified_language: Some("es".parse().unwrap()),
            lf_correct: Some(false),
            aggregated_verdict: Some(AggregatedVerdict {
                mean_language_score: None,
                fully_in_language: false,
                unparseable: true,
            }),
            chrf_score: None,
        };
        assert!(r.validate().is_err());
        let f = tempfile::NamedTempFile::new().unwrap();
        assert!(write_results(&[r], f.path(), ResultFormat::Jsonl).is_err());
    }
}
