//! chrF++ caption quality scoring: character n-gram F-scores augmented
//! with word n-grams.
//!
//! N-grams operate on Unicode scalar values without normalization; callers
//! that need NFC/NFKC behavior should pre-normalize their corpora.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Scoring parameters. Defaults reproduce standard chrF++: character
/// 6-grams, word 2-grams, beta = 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ChrfParams {
    pub char_order: usize,
    pub word_order: usize,
    pub beta: f64,
}

impl Default for ChrfParams {
    fn default() -> Self {
        ChrfParams {
            char_order: 6,
            word_order: 2,
            beta: 2.0,
        }
    }
}

impl ChrfParams {
    pub fn validate(&self) -> Result<()> {
        if self.char_order < 1 {
            return Err(Error::InvalidParam("char_order must be >= 1".into()));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidParam("beta must be a positive real".into()));
        }
        Ok(())
    }
}

/// Multiset of n-grams for a single order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramProfile<U: Eq + Hash> {
    counts: HashMap<Vec<U>, usize>,
}

impl<U: Eq + Hash + Clone> NgramProfile<U> {
    fn from_units(units: &[U], n: usize) -> Self {
        let mut counts = HashMap::new();
        if n >= 1 && units.len() >= n {
            for window in units.windows(n) {
                *counts.entry(window.to_vec()).or_insert(0) += 1;
            }
        }
        NgramProfile { counts }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, gram: &[U]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Clipped overlap: for each n-gram, min of the two multiplicities.
    pub fn overlap(&self, other: &NgramProfile<U>) -> usize {
        self.counts
            .iter()
            .map(|(gram, &count)| count.min(other.count(gram)))
            .sum()
    }
}

/// Character n-grams over the text with all whitespace removed.
pub fn extract_char_ngrams(text: &str, n: usize) -> NgramProfile<char> {
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    NgramProfile::from_units(&chars, n)
}

/// ASCII punctuation set used by the chrF++ word tokenizer.
fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
}

/// chrF++ word tokenization: whitespace-separated tokens with a single
/// leading or trailing punctuation character split off.
pub fn tokenize_words(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let chars: Vec<char> = word.chars().collect();
        if chars.len() > 1 && is_punct(chars[chars.len() - 1]) {
            tokens.push(chars[..chars.len() - 1].iter().collect());
            tokens.push(chars[chars.len() - 1].to_string());
        } else if chars.len() > 1 && is_punct(chars[0]) {
            tokens.push(chars[0].to_string());
            tokens.push(chars[1..].iter().collect());
        } else {
            tokens.push(word.to_string());
        }
    }
    tokens
}

/// Word n-grams over the chrF++ tokenization.
pub fn extract_word_ngrams(text: &str, n: usize) -> NgramProfile<String> {
    NgramProfile::from_units(&tokenize_words(text), n)
}

/// Sentence-level chrF++ score with a degenerate-input marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentenceChrf {
    /// Score in [0, 100].
    pub score: f64,
    /// Set when the caption was empty after trimming; the score is 0.
    pub degenerate: bool,
}

struct OrderStats {
    hyp_total: usize,
    ref_total: usize,
    matches: usize,
}

fn order_stats<U: Eq + Hash + Clone>(
    hyp: &NgramProfile<U>,
    reference: &NgramProfile<U>,
) -> OrderStats {
    OrderStats {
        hyp_total: hyp.total(),
        ref_total: reference.total(),
        matches: hyp.overlap(reference),
    }
}

/// F-beta averaged uniformly over all orders where either side produced
/// n-grams. Orders empty on both sides are excluded so identical short
/// strings score a full 1.0.
fn average_fscore(stats: &[OrderStats], beta: f64) -> f64 {
    let beta_sq = beta * beta;
    let mut sum = 0.0;
    let mut effective = 0usize;
    for s in stats {
        if s.hyp_total == 0 && s.ref_total == 0 {
            continue;
        }
        effective += 1;
        if s.matches == 0 {
            continue; // F contribution is 0
        }
        let precision = s.matches as f64 / s.hyp_total as f64;
        let recall = s.matches as f64 / s.ref_total as f64;
        sum += (1.0 + beta_sq) * precision * recall / (beta_sq * precision + recall);
    }
    if effective == 0 {
        0.0
    } else {
        sum / effective as f64
    }
}

fn sentence_score_against(caption: &str, reference: &str, params: &ChrfParams) -> f64 {
    let mut stats = Vec::with_capacity(params.char_order + params.word_order);
    for n in 1..=params.char_order {
        stats.push(order_stats(
            &extract_char_ngrams(caption, n),
            &extract_char_ngrams(reference, n),
        ));
    }
    for n in 1..=params.word_order {
        stats.push(order_stats(
            &extract_word_ngrams(caption, n),
            &extract_word_ngrams(reference, n),
        ));
    }
    100.0 * average_fscore(&stats, params.beta)
}

/// Sentence chrF++ against one or more references; the sentence score is
/// the maximum over references. Empty reference strings are skipped.
pub fn chrf_pp<S: AsRef<str>>(
    caption: &str,
    references: &[S],
    params: &ChrfParams,
) -> Result<SentenceChrf> {
    params.validate()?;
    let usable: Vec<&str> = references
        .iter()
        .map(|r| r.as_ref())
        .filter(|r| !r.trim().is_empty())
        .collect();
    if usable.is_empty() {
        return Err(Error::EmptyInput(
            "chrf_pp requires at least one non-empty reference".into(),
        ));
    }
    if caption.trim().is_empty() {
        return Ok(SentenceChrf {
            score: 0.0,
            degenerate: true,
        });
    }
    let score = usable
        .iter()
        .map(|r| sentence_score_against(caption, r, params))
        .fold(0.0f64, f64::max);
    Ok(SentenceChrf {
        score,
        degenerate: false,
    })
}

/// Corpus chrF++: the macro-average of sentence scores.
pub fn corpus_chrf<C, S>(pairs: &[(C, Vec<S>)], params: &ChrfParams) -> Result<f64>
where
    C: AsRef<str>,
    S: AsRef<str>,
{
    if pairs.is_empty() {
        return Err(Error::EmptyInput(
            "corpus_chrf requires at least one sentence pair".into(),
        ));
    }
    let mut sum = 0.0;
    for (caption, references) in pairs {
        sum += chrf_pp(caption.as_ref(), references, params)?.score;
    }
    Ok(sum / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn profile_pairs(p: &NgramProfile<char>) -> Vec<(String, usize)> {
        let mut v: Vec<(String, usize)> = p
            .counts
            .iter()
            .map(|(g, &c)| (g.iter().collect(), c))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn char_bigrams_direct() {
        let p = extract_char_ngrams("abc", 2);
        assert_eq!(profile_pairs(&p), vec![("ab".into(), 1), ("bc".into(), 1)]);
    }

    #[test]
    fn char_ngrams_drop_whitespace() {
        let p = extract_char_ngrams("a b", 2);
        assert_eq!(profile_pairs(&p), vec![("ab".into(), 1)]);
    }

    #[test]
    fn char_ngrams_empty_text() {
        assert!(extract_char_ngrams("", 3).is_empty());
        assert!(extract_char_ngrams("ab", 3).is_empty());
    }

    #[test]
    fn char_ngram_total_matches_window_count() {
        let p = extract_char_ngrams("banana", 2);
        assert_eq!(p.total(), 5);
        assert_eq!(p.count(&['a', 'n']), 2);
    }

    #[test]
    fn word_bigrams_direct() {
        let p = extract_word_ngrams("the cat sat", 2);
        assert_eq!(p.total(), 2);
        assert_eq!(p.count(&["the".to_string(), "cat".to_string()]), 1);
        assert_eq!(p.count(&["cat".to_string(), "sat".to_string()]), 1);
    }

    #[test]
    fn word_tokenizer_splits_trailing_punctuation() {
        assert_eq!(tokenize_words("hi."), vec!["hi", "."]);
        assert_eq!(tokenize_words("¿que?"), vec!["¿que", "?"]);
        assert_eq!(tokenize_words("(ok)"), vec!["(ok", ")"]);
        assert_eq!(tokenize_words("."), vec!["."]);
    }

    #[test]
    fn word_ngrams_short_text() {
        assert!(extract_word_ngrams("x", 2).is_empty());
    }

    #[test]
    fn identity_scores_100() {
        let params = ChrfParams::default();
        for text in ["hola", "a", "the cat sat on the mat.", "дом у озера"] {
            let s = chrf_pp(text, &[text], &params).unwrap();
            assert_eq!(s.score, 100.0, "identity failed for {text:?}");
            assert!(!s.degenerate);
        }
    }

    #[test]
    fn disjoint_alphabets_score_0() {
        let s = chrf_pp("abcd", &["wxyz"], &ChrfParams::default()).unwrap();
        assert_eq!(s.score, 0.0);
    }

    // Golden value produced by the brute-force overlap oracle in
    // tests/acceptance.rs (oracle_sentence_chrf), frozen here.
    #[test]
    fn cat_sat_golden() {
        let s = chrf_pp("cat sat", &["the cat sat"], &ChrfParams::default()).unwrap();
        assert!(
            (s.score - 57.362_766_462_031_15).abs() < 1e-9,
            "got {}",
            s.score
        );
    }

    #[test]
    fn empty_caption_degenerate() {
        let s = chrf_pp("   ", &["ref"], &ChrfParams::default()).unwrap();
        assert_eq!(s.score, 0.0);
        assert!(s.degenerate);
    }

    #[test]
    fn empty_reference_skipped() {
        let params = ChrfParams::default();
        let with_blank = chrf_pp("cat sat", &["", "the cat sat"], &params).unwrap();
        let without = chrf_pp("cat sat", &["the cat sat"], &params).unwrap();
        assert_eq!(with_blank.score, without.score);
        assert!(chrf_pp("cat", &["", "  "], &params).is_err());
    }

    #[test]
    fn corpus_macro_average() {
        let params = ChrfParams::default();
        let pairs = vec![
            ("same".to_string(), vec!["same".to_string()]),
            ("abcd".to_string(), vec!["wxyz".to_string()]),
        ];
        assert_eq!(corpus_chrf(&pairs, &params).unwrap(), 50.0);
        assert!(corpus_chrf::<String, String>(&[], &params).is_err());
    }

    #[test]
    fn corpus_singleton() {
        let pairs = vec![("x y", vec!["x y"])];
        assert_eq!(corpus_chrf(&pairs, &ChrfParams::default()).unwrap(), 100.0);
    }

    proptest! {
        #[test]
        fn score_bounded(cap in "[a-f ]{0,24}", refs in proptest::collection::vec("[a-f ]{1,24}", 1..4)) {
            let params = ChrfParams::default();
            if let Ok(s) = chrf_pp(&cap, &refs, &params) {
                prop_assert!((0.0..=100.0).contains(&s.score));
            }
        }

        #[test]
        fn adding_reference_never_decreases(cap in "[a-e]{1,12}", r1 in "[a-e]{1,12}", r2 in "[a-e]{1,12}") {
            let params = ChrfParams::default();
            let one = chrf_pp(&cap, std::slice::from_ref(&r1), &params).unwrap().score;
            let two = chrf_pp(&cap, &[r1, r2], &params).unwrap().score;
            prop_assert!(two >= one - 1e-12);
        }

        #[test]
        fn reference_order_invariant(cap in "[a-e]{1,12}", mut refs in proptest::collection::vec("[a-e]{1,12}", 2..4)) {
            let params = ChrfParams::default();
            let forward = chrf_pp(&cap, &refs, &params).unwrap().score;
            refs.reverse();
            let backward = chrf_pp(&cap, &refs, &params).unwrap().score;
            prop_assert_eq!(forward, backward);
        }

        #[test]
        fn constant_corpus_equals_sentence(cap in "[a-e]{1,10}", re in "[a-e]{1,10}", n in 1usize..5) {
            let params = ChrfParams::default();
            let sentence = chrf_pp(&cap, std::slice::from_ref(&re), &params).unwrap().score;
            let pairs: Vec<(String, Vec<String>)> =
                (0..n).map(|_| (cap.clone(), vec![re.clone()])).collect();
            let corpus = corpus_chrf(&pairs, &params).unwrap();
            prop_assert!((corpus - sentence).abs() < 1e-9);
        }
    }
}
