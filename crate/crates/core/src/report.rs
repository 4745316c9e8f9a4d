//! Per-language metric tables and interval-plot series assembled from
//! stored results.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chrf::{corpus_chrf, ChrfParams};
use crate::corpus::{EvaluationSample, LanguageTag, SampleResult};
use crate::error::{io_err, Error, Result};
use crate::judge::{lf_plus, JudgedSample};
use crate::langid::{language_fidelity, Identification};

/// One per-language row. Percentages are on the 0–100 scale; `lf_plus`
/// and `chrf` stay empty when judging or references were not available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub language: LanguageTag,
    pub n: usize,
    pub lf: f64,
    pub lf_plus: Option<f64>,
    pub chrf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub rows: Vec<ReportRow>,
}

impl FidelityReport {
    /// Validates the per-row bound 0 <= LF+ <= LF <= 100 and n > 0.
    pub fn new(rows: Vec<ReportRow>) -> Result<Self> {
        for row in &rows {
            if row.n == 0 {
                return Err(Error::InvalidRecord(format!(
                    "language {} row has no samples",
                    row.language
                )));
            }
            if !(0.0..=100.0).contains(&row.lf) {
                return Err(Error::InvalidRecord(format!(
                    "language {} LF {} outside [0,100]",
                    row.language, row.lf
                )));
            }
            if let Some(plus) = row.lf_plus {
                if !(0.0..=row.lf).contains(&plus) {
                    return Err(Error::BoundViolation {
                        model: String::new(),
                        language: row.language.to_string(),
                        lf: row.lf,
                        lf_plus: plus,
                    });
                }
            }
        }
        Ok(FidelityReport { rows })
    }
}

/// Builds the per-language report by joining results to samples and
/// delegating to the metric modules over each language's subset.
pub fn build_report(
    samples: &[EvaluationSample],
    results: &[SampleResult],
    chrf_params: &ChrfParams,
) -> Result<FidelityReport> {
    if results.is_empty() {
        return Err(Error::EmptyInput(
            "build_report requires at least one result".into(),
        ));
    }
    let by_id: BTreeMap<&str, &EvaluationSample> =
        samples.iter().map(|s| (s.sample_id.as_str(), s)).collect();

    let mut grouped: BTreeMap<String, Vec<(&EvaluationSample, &SampleResult)>> = BTreeMap::new();
    for result in results {
        let sample = by_id
            .get(result.sample_id.as_str())
            .ok_or_else(|| Error::UnjoinedResult(result.sample_id.clone()))?;
        grouped
            .entry(sample.target_language.code().to_string())
            .or_default()
            .push((sample, result));
    }

    // judging ran iff any verdict exists anywhere in the result set
    let judged_mode = results.iter().any(|r| r.aggregated_verdict.is_some());

    let mut rows = Vec::with_capacity(grouped.len());
    for (_, pairs) in grouped {
        let language = pairs[0].0.target_language.clone();

        let subset_samples: Vec<EvaluationSample> =
            pairs.iter().map(|(s, _)| (*s).clone()).collect();
        let identifications: Vec<Identification> = pairs
            .iter()
            .map(|(_, r)| {
                r.identified_language
                    .clone()
                    .map(|tag| Identification {
                        tag,
                        confidence: 1.0,
                    })
                    .ok_or_else(|| {
                        Error::InvalidRecord(format!(
                            "result {} lacks identifier output; run lf first",
                            r.sample_id
                        ))
                    })
            })
            .collect::<Result<_>>()?;
        let lf = language_fidelity(&subset_samples, &identifications)?;

        let lf_plus_value = if judged_mode {
            let judged: Vec<JudgedSample> = pairs
                .iter()
                .map(|(_, r)| JudgedSample {
                    sample_id: &r.sample_id,
                    lf_correct: r.lf_correct.unwrap_or(false),
                    verdict: r.aggregated_verdict.as_ref(),
                })
                .collect();
            Some(lf_plus(&judged)?)
        } else {
            None
        };

        let referenced: Vec<(String, Vec<String>)> = pairs
            .iter()
            .filter(|(s, _)| s.references.iter().any(|r| !r.trim().is_empty()))
            .map(|(s, _)| (s.caption.clone(), s.references.clone()))
            .collect();
        let chrf = if referenced.is_empty() {
            None
        } else {
            Some(corpus_chrf(&referenced, chrf_params)?)
        };

        rows.push(ReportRow {
            language,
            n: pairs.len(),
            lf,
            lf_plus: lf_plus_value,
            chrf,
        });
    }

    FidelityReport::new(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParam(format!(
                "unknown report format {other:?}"
            ))),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
            ReportFormat::Json => "json",
        }
    }
}

fn one_decimal(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.1}")).unwrap_or_default()
}

/// Renders the report. Percentages carry one decimal in csv and markdown;
/// json keeps full precision.
pub fn render_report(report: &FidelityReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from("language,n,lf,lf_plus,chrf\n");
            for row in &report.rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.language,
                    row.n,
                    one_decimal(Some(row.lf)),
                    one_decimal(row.lf_plus),
                    one_decimal(row.chrf),
                ));
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out =
                String::from("| Language | n | LF | LF+ | chrF++ |\n|---|---:|---:|---:|---:|\n");
            for row in &report.rows {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} |\n",
                    row.language,
                    row.n,
                    one_decimal(Some(row.lf)),
                    one_decimal(row.lf_plus),
                    one_decimal(row.chrf),
                ));
            }
            out
        }
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            text
        }
    }
}

pub fn emit(report: &FidelityReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut writer = BufWriter::new(file);
    writer
        .write_all(render_report(report, format).as_bytes())
        .map_err(io_err(path))?;
    writer.flush().map_err(io_err(path))
}

/// Reads back a json emission; `emit` then `load_report_json` is the
/// identity.
pub fn load_report_json(path: impl AsRef<Path>) -> Result<FidelityReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let report: FidelityReport =
        serde_json::from_str(&text).map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
    FidelityReport::new(report.rows)
}

/// One plot-ready row: LF as the upper bound, LF+ as the lower.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRow {
    pub model: String,
    pub language: LanguageTag,
    pub lf_upper: f64,
    pub lf_plus_lower: f64,
}

/// Flattens named reports into interval-plot rows, model-major. All
/// reports must share a language set and carry LF+; a row with
/// LF+ > LF indicates upstream corruption and is rejected.
pub fn interval_series(reports: &BTreeMap<String, FidelityReport>) -> Result<Vec<IntervalRow>> {
    if reports.is_empty() {
        return Err(Error::EmptyInput(
            "interval_series requires at least one report".into(),
        ));
    }
    let language_codes = |r: &FidelityReport| -> Vec<String> {
        let mut codes: Vec<String> = r
            .rows
            .iter()
            .map(|row| row.language.code().to_string())
            .collect();
        codes.sort();
        codes
    };
    let reference = language_codes(reports.values().next().unwrap());

    let mut out = Vec::new();
    for (model, report) in reports {
        if language_codes(report) != reference {
            return Err(Error::LanguageSetMismatch(model.clone()));
        }
        for row in &report.rows {
            let lf_plus_lower = row.lf_plus.ok_or_else(|| {
                Error::InvalidRecord(format!(
                    "model {model}, language {}: LF+ missing",
                    row.language
                ))
            })?;
            if lf_plus_lower > row.lf {
                return Err(Error::BoundViolation {
                    model: model.clone(),
                    language: row.language.to_string(),
                    lf: row.lf,
                    lf_plus: lf_plus_lower,
                });
            }
            out.push(IntervalRow {
                model: model.clone(),
                language: row.language.clone(),
                lf_upper: row.lf,
                lf_plus_lower,
            });
        }
    }
    Ok(out)
}

/// Tab-separated plot data, full precision.
pub fn render_interval_series(rows: &[IntervalRow]) -> String {
    let mut out = String::from("model\tlanguage\tlf_upper\tlf_plus_lower\n");
    for row in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            row.model, row.language, row.lf_upper, row.lf_plus_lower
        ));
    }
    out
}

impl fmt::Display for FidelityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_report(self, ReportFormat::Markdown))
    }
}
