//! Crate-wide error type with an exit-code classification for the CLI.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate sample id {0:?}")]
    DuplicateSampleId(String),

    #[error("invalid language tag {0:?}")]
    InvalidLanguageTag(String),

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("parallel lists differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("backend emitted unmapped label {0:?}")]
    UnmappedLabel(String),

    #[error("identifier backend failed: {0}")]
    Backend(String),

    #[error("transport failure: {0}")]
    Transport(String),

    #[error("endpoint returned status {status}: {excerpt}")]
    Status { status: u16, excerpt: String },

    #[error("expected one verdict per generation config A, B, C; got {0}")]
    BadConfigSet(String),

    #[error("sample {0:?} passed the identifier but carries no judge verdict")]
    MissingVerdict(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("tensor {name}: shape mismatch {left:?} vs {right:?}")]
    ShapeMismatch {
        name: String,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("tensor {name}: dtype mismatch {left} vs {right}")]
    DtypeMismatch {
        name: String,
        left: &'static str,
        right: &'static str,
    },

    #[error("tensors missing from backbone checkpoint: {}", .0.join(", "))]
    MissingTensors(Vec<String>),

    #[error("checkpoint format error at byte {offset}: {message}")]
    CheckpointFormat { offset: u64, message: String },

    #[error("mix plan is missing required stage {0}")]
    MissingStage(String),

    #[error("all included stage volumes are zero")]
    ZeroVolumes,

    #[error("allocation {allocation} exceeds available text ids ({available})")]
    AllocationExceedsPool { allocation: u64, available: u64 },

    #[error("result {0:?} does not join to any sample")]
    UnjoinedResult(String),

    #[error("reports disagree on the language set: {0}")]
    LanguageSetMismatch(String),

    #[error("model {model}, language {language}: LF+ {lf_plus} exceeds LF {lf}")]
    BoundViolation {
        model: String,
        language: String,
        lf: f64,
        lf_plus: f64,
    },
}

impl Error {
    /// Exit-code class: 1 usage, 2 data, 3 transport.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParam(_) | Error::EmptyInput(_) => 1,
            Error::Transport(_) | Error::Status { .. } | Error::Backend(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
