//! Structured extraction of judge replies.
//!
//! Replies are expected to carry four `- Field: value` lines. Extraction
//! tolerates field reordering and case variation but nothing looser: a
//! line without its colon delimiter, a score that is not a single real in
//! [0, 1], or a boolean that is not True/False leaves that field absent.
//! Malformation is never an error; it is encoded as absence.

use super::{ConfigName, JudgeVerdict};

/// Parses one raw judge reply produced under `config_name`.
pub fn parse_verdict(raw: &str, config_name: ConfigName) -> JudgeVerdict {
    let mut verdict = JudgeVerdict::empty(config_name);
    for line in raw.lines() {
        let Some((name_part, value_part)) = line.split_once(':') else {
            continue;
        };
        let name = name_part.trim();
        let name = name
            .strip_prefix('-')
            .unwrap_or(name)
            .trim()
            .to_ascii_lowercase();
        let value = value_part.trim();
        match name.as_str() {
            "language" => {
                if verdict.language_guess.is_none() && !value.is_empty() {
                    verdict.language_guess = Some(value.to_string());
                }
            }
            "language score" => {
                if verdict.language_score.is_none() {
                    verdict.language_score = parse_score(value);
                }
            }
            "fully in language" => {
                if verdict.fully_in_language.is_none() {
                    verdict.fully_in_language = parse_bool(value);
                }
            }
            "summary" if verdict.summary.is_none() && !value.is_empty() => {
                verdict.summary = Some(value.to_string());
            }
            _ => {}
        }
    }
    verdict
}

/// A score must be a single real in [0, 1]; ranges and estimates fail.
fn parse_score(value: &str) -> Option<f64> {
    let score: f64 = value.parse().ok()?;
    (score.is_finite() && (0.0..=1.0).contains(&score)).then_some(score)
}

fn parse_bool(value: &str) -> Option<bool> {
    if value.eq_ignore_ascii_case("true") {
        Some(true)
    } else if value.eq_ignore_ascii_case("false") {
        Some(false)
    } else {
        None
    }
}
