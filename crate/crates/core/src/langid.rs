//! Language identification behind a pluggable backend, plus the LF
//! (language fidelity) accuracy metric.
//!
//! The builtin trigram classifier exists so tests and end-to-end runs need
//! no external model download. It is a fixture-scale tool, not a research
//! identifier; real runs should wrap their identifier of choice behind the
//! external-command or HTTP backend.

use std::collections::HashMap;
use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::OnceLock;

use crate::corpus::{EvaluationSample, LanguageTag};
use crate::error::{Error, Result};

/// Top-1 identification with a confidence in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    pub tag: LanguageTag,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    ExternalCommand,
    HttpEndpoint,
    BuiltinTrigram,
}

/// A language-identifier backend. `label_map` translates whatever label
/// strings the backend emits (e.g. `spa_Latn`) into language tags; it must
/// cover every label the backend can produce for the configured languages.
#[derive(Debug, Clone)]
pub struct IdentifierBackend {
    pub kind: BackendKind,
    /// Command line (whitespace-split) or URL; unused for the builtin.
    pub location: String,
    pub label_map: HashMap<String, LanguageTag>,
}

impl IdentifierBackend {
    pub fn builtin() -> Self {
        IdentifierBackend {
            kind: BackendKind::BuiltinTrigram,
            location: String::new(),
            label_map: HashMap::new(),
        }
    }

    pub fn external_command(
        cmdline: impl Into<String>,
        label_map: HashMap<String, LanguageTag>,
    ) -> Self {
        IdentifierBackend {
            kind: BackendKind::ExternalCommand,
            location: cmdline.into(),
            label_map,
        }
    }

    pub fn http_endpoint(url: impl Into<String>, label_map: HashMap<String, LanguageTag>) -> Self {
        IdentifierBackend {
            kind: BackendKind::HttpEndpoint,
            location: url.into(),
            label_map,
        }
    }
}

/// Loads a two-column label map file: `backend_label<ws>tag`, one mapping
/// per line, `#` comments allowed.
pub fn load_label_map(path: impl AsRef<std::path::Path>) -> Result<HashMap<String, LanguageTag>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(crate::error::io_err(path))?;
    let mut map = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (label, tag) = match (fields.next(), fields.next(), fields.next()) {
            (Some(label), Some(tag), None) => (label, tag),
            _ => {
                return Err(Error::MalformedRecord {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: "expected exactly two columns: backend_label tag".into(),
                })
            }
        };
        map.insert(label.to_string(), tag.parse()?);
    }
    Ok(map)
}

/// Identifies the language of `text` with the given backend.
pub fn identify(text: &str, backend: &IdentifierBackend) -> Result<Identification> {
    if text.trim().is_empty() {
        return Err(Error::EmptyInput("identify requires non-empty text".into()));
    }
    match backend.kind {
        BackendKind::BuiltinTrigram => Ok(identify_builtin(text)),
        BackendKind::ExternalCommand => {
            let (label, confidence) = run_external(&backend.location, text)?;
            Ok(Identification {
                tag: map_label(&backend.label_map, &label)?,
                confidence,
            })
        }
        BackendKind::HttpEndpoint => {
            let (label, confidence) = query_http(&backend.location, text)?;
            Ok(Identification {
                tag: map_label(&backend.label_map, &label)?,
                confidence,
            })
        }
    }
}

/// Runs `identify` over a corpus with a bounded worker pool. Results come
/// back in sample order regardless of completion order.
pub fn identify_all(
    samples: &[EvaluationSample],
    backend: &IdentifierBackend,
    parallelism: usize,
) -> Vec<Result<Identification>> {
    let workers = parallelism.max(1).min(samples.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<Result<Identification>>>> = (0..samples.len())
        .map(|_| std::sync::Mutex::new(None))
        .collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= samples.len() {
                    break;
                }
                let outcome = identify(&samples[i].caption, backend);
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

/// LF: percentage of samples whose identified language matches the target.
pub fn language_fidelity(
    samples: &[EvaluationSample],
    identifications: &[Identification],
) -> Result<f64> {
    if samples.len() != identifications.len() {
        return Err(Error::LengthMismatch {
            left: samples.len(),
            right: identifications.len(),
        });
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput(
            "language_fidelity requires at least one sample".into(),
        ));
    }
    let correct = samples
        .iter()
        .zip(identifications)
        .filter(|(s, id)| id.tag.matches(&s.target_language))
        .count();
    Ok(100.0 * correct as f64 / samples.len() as f64)
}

fn map_label(label_map: &HashMap<String, LanguageTag>, label: &str) -> Result<LanguageTag> {
    label_map
        .get(label)
        .cloned()
        .ok_or_else(|| Error::UnmappedLabel(label.to_string()))
}

/// Protocol: one input line on stdin, one `label<TAB>confidence` line on
/// stdout. A missing confidence column defaults to 1.0.
fn run_external(cmdline: &str, text: &str) -> Result<(String, f64)> {
    let mut parts = cmdline.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| Error::Backend("empty external command".into()))?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::Backend(format!("failed to spawn {program}: {e}")))?;

    let one_line = text.replace(['\n', '\r'], " ");
    child
        .stdin
        .take()
        .expect("stdin piped")
        .write_all(format!("{one_line}\n").as_bytes())
        .map_err(|e| Error::Backend(format!("failed to write to {program}: {e}")))?;
    let output = child
        .wait_with_output()
        .map_err(|e| Error::Backend(format!("failed to read from {program}: {e}")))?;
    if !output.status.success() {
        return Err(Error::Backend(format!(
            "{program} exited with {}",
            output.status
        )));
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    let line = stdout
        .lines()
        .next()
        .ok_or_else(|| Error::Backend(format!("{program} produced no output")))?;
    parse_label_line(line)
}

fn query_http(url: &str, text: &str) -> Result<(String, f64)> {
    let mut response = ureq::post(url)
        .content_type("text/plain; charset=utf-8")
        .send(text)
        .map_err(|e| Error::Transport(format!("POST {url}: {e}")))?;
    let body = response
        .body_mut()
        .read_to_string()
        .map_err(|e| Error::Transport(format!("reading body from {url}: {e}")))?;
    parse_label_line(body.trim())
}

fn parse_label_line(line: &str) -> Result<(String, f64)> {
    let mut fields = line.split_whitespace();
    let label = fields
        .next()
        .ok_or_else(|| Error::Backend("backend emitted an empty line".into()))?;
    let confidence = match fields.next() {
        None => 1.0,
        Some(c) => c
            .parse::<f64>()
            .map_err(|_| Error::Backend(format!("unparseable confidence {c:?}")))?
            .clamp(0.0, 1.0),
    };
    Ok((label.to_string(), confidence))
}

// --- builtin trigram classifier ---

struct LanguageProfile {
    tag: LanguageTag,
    freqs: HashMap<[char; 3], f64>,
}

/// Text-side trigram frequencies keep a sorted order so float summation
/// is deterministic across calls.
type TextFreqs = std::collections::BTreeMap<[char; 3], f64>;

/// Embedded per-language corpora; also the source of hermetic test texts.
pub const BUILTIN_CORPORA: &[(&str, &str)] = &[
    ("de", include_str!("../fixtures/langid/de.txt")),
    ("en", include_str!("../fixtures/langid/en.txt")),
    ("es", include_str!("../fixtures/langid/es.txt")),
    ("fr", include_str!("../fixtures/langid/fr.txt")),
    ("nl", include_str!("../fixtures/langid/nl.txt")),
    ("ru", include_str!("../fixtures/langid/ru.txt")),
];

fn profiles() -> &'static [LanguageProfile] {
    static PROFILES: OnceLock<Vec<LanguageProfile>> = OnceLock::new();
    PROFILES.get_or_init(|| {
        BUILTIN_CORPORA
            .iter()
            .map(|(code, corpus)| LanguageProfile {
                tag: code.parse().expect("builtin code is valid"),
                freqs: trigram_freqs(corpus).into_iter().collect(),
            })
            .collect()
    })
}

/// Lowercases, maps every non-alphabetic character to a space, collapses
/// runs, and pads the ends so word boundaries contribute trigrams.
fn normalize(text: &str) -> Vec<char> {
    let mut out = vec![' '];
    for c in text.chars() {
        if c.is_alphabetic() {
            for lower in c.to_lowercase() {
                out.push(lower);
            }
        } else if *out.last().unwrap() != ' ' {
            out.push(' ');
        }
    }
    if *out.last().unwrap() != ' ' {
        out.push(' ');
    }
    out
}

fn trigram_freqs(text: &str) -> TextFreqs {
    let chars = normalize(text);
    let mut counts: std::collections::BTreeMap<[char; 3], usize> = Default::default();
    for w in chars.windows(3) {
        *counts.entry([w[0], w[1], w[2]]).or_insert(0) += 1;
    }
    let total: usize = counts.values().sum();
    if total == 0 {
        return TextFreqs::new();
    }
    counts
        .into_iter()
        .map(|(g, c)| (g, c as f64 / total as f64))
        .collect()
}

/// Histogram intersection of relative trigram frequencies, in [0, 1].
fn intersection(text_freqs: &TextFreqs, lang_freqs: &HashMap<[char; 3], f64>) -> f64 {
    text_freqs
        .iter()
        .map(|(g, &f)| f.min(lang_freqs.get(g).copied().unwrap_or(0.0)))
        .sum()
}

/// Deterministic argmax over the builtin profiles; ties break to the
/// lexicographically smallest language code.
fn identify_builtin(text: &str) -> Identification {
    let text_freqs = trigram_freqs(text);
    let mut best: Option<(&LanguageProfile, f64)> = None;
    for profile in profiles() {
        let score = intersection(&text_freqs, &profile.freqs);
        best = match best {
            None => Some((profile, score)),
            Some((_, best_score)) if score > best_score => Some((profile, score)),
            other => other,
        };
    }
    let (profile, score) = best.expect("builtin profile set is non-empty");
    Identification {
        tag: profile.tag.clone(),
        confidence: score,
    }
}
