use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed RIFF/WAVE container: {0}")]
    MalformedContainer(String),

    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),

    #[error("I/O failure: {0}")]
    IoFailure(#[from] std::io::Error),

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("overlap-add window sum {min_sum:e} below 1e-9 at output sample {index}")]
    DegenerateWindowSum { index: usize, min_sum: f64 },

    #[error("input too short: need at least {needed} samples, got {got}")]
    InputTooShort { needed: usize, got: usize },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("only {found} co-voiced frames, need at least {needed}")]
    InsufficientVoicedOverlap { found: usize, needed: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vocoder command failed with {status}: {stderr}")]
    VocoderProcessFailure { status: String, stderr: String },

    #[error("vocoder command produced no output at {0}")]
    VocoderOutputMissing(PathBuf),

    #[error("vocoder command timed out after {0} s")]
    VocoderTimeout(u64),

    #[error("no WAV files found under {0}")]
    EmptyCorpus(PathBuf),

    #[error("{path}: {stage}: {source}")]
    Stage {
        path: PathBuf,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, path: impl Into<PathBuf>, stage: &'static str) -> Self {
        Error::Stage {
            path: path.into(),
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
