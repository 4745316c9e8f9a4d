//! lfkit evaluates and post-processes multilingual vision-language models
//! without training one: language-fidelity metrics (LF, and LF+ via an
//! LLM judge), chrF++ caption scoring, checkpoint merging by linear or
//! spherical interpolation, and proportional data-mix planning.
//!
//! Modules map onto the pipeline stages:
//!
//! * [`corpus`] — evaluation samples and per-sample results on disk
//! * [`langid`] — pluggable language identification and the LF metric
//! * [`judge`] — LLM-as-a-judge orchestration and the LF+ metric
//! * [`chrf`] — chrF++ sentence and corpus scores
//! * [`merge`] — checkpoint interpolation (lerp/slerp) with preserved tensors
//! * [`mixer`] — text-budget allocation and interleaved manifests
//! * [`report`] — per-language tables and interval-plot series

pub mod chrf;
pub mod corpus;
pub mod error;
pub mod judge;
pub mod langid;
pub mod merge;
pub mod mixer;
pub mod report;

pub use error::{Error, Result};
