//! The language-consistency evaluation prompt and the verdict line format.

use super::JudgeVerdict;

/// Marker replaced by the caption under evaluation.
pub const CAPTION_PLACEHOLDER: &str = "<CAPTION GENERATED BY VISUAL SALAMANDRA>";

const PROMPT_TEMPLATE: &str = "\
Analyze the following text and determine the language it is written in.
- Identify the most likely language.
- Ensure the probability score is a single value, not a range or estimate.
- Determine a language consistency score between 0 and 1.0, where 1.0 means the text is entirely in one language, and 0.0 means it is completely incomprehensible.
- Lower the score proportionally if foreign words are present, but do not assign 0.0 unless the text is nonsensical.
- The language score must be a single number between 0 and 1.0.
- Indicate whether the text is completely written in the identified language (True or False).
- In both language consistency metrics, do not penalize for proper nouns, brand names, or commonly used foreign terms (e.g., 'software', 'email') that do not alter the overall language structure.
- Avoid unnecessary explanations. Summarize the feedback (reason of the mark) in at most 30 words.

Use the exact format below:

- Language: [language_guess]
- Language Score: [single value between 0 and 1.0]
- Fully in Language: [True/False]
- Summary: [Concise explanation (max 30 words)]

Keep your answer short and concise. The sentence to analyze is the following:
<CAPTION GENERATED BY VISUAL SALAMANDRA>";

/// Renders the evaluation prompt for one caption. The template is fixed,
/// so output is byte-stable across calls; the caption substitutes exactly
/// once, literally, even if it contains the placeholder itself.
pub fn build_prompt(caption: &str) -> String {
    PROMPT_TEMPLATE.replacen(CAPTION_PLACEHOLDER, caption, 1)
}

fn opt(field: &Option<String>) -> &str {
    field.as_deref().unwrap_or("N/A")
}

/// Emits the four-line reply format. For fully populated verdicts,
/// `parse_verdict(format_verdict(v), v.config_name) == v`; absent fields
/// render as `N/A` and parse back as absent for the score and boolean.
pub fn format_verdict(v: &JudgeVerdict) -> String {
    let score = v
        .language_score
        .map(|s| s.to_string())
        .unwrap_or_else(|| "N/A".to_string());
    let fully = match v.fully_in_language {
        Some(true) => "True",
        Some(false) => "False",
        None => "N/A",
    };
    format!(
        "- Language: {}\n- Language Score: {}\n- Fully in Language: {}\n- Summary: {}",
        opt(&v.language_guess),
        score,
        fully,
        opt(&v.summary),
    )
}
