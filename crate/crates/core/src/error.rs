use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("input too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("signal has zero variance")]
    ZeroVariance,
    #[error("spectrum has no energy")]
    EmptySpectrum,
    #[error("bad band range: {0}")]
    BadBandRange(String),
    #[error("unknown wavelet '{0}'")]
    UnknownWavelet(String),
    #[error("invalid wavelet registry: {0}")]
    BadRegistry(String),
    #[error("decomposition depth {level} is not possible for a signal of {len} samples")]
    TooShallow { level: usize, len: usize },
    #[error("inconsistent decomposition: {0}")]
    InconsistentDecomposition(String),
    #[error("candidate wavelet bank is empty")]
    EmptyBank,
    #[error("bad bearing geometry: {0}")]
    BadGeometry(String),
    #[error("fault band out of range: {0}")]
    BandOutOfRange(String),
    #[error("feature {0} is constant over the input rows")]
    ConstantFeature(usize),
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("bad synthesis spec: {0}")]
    BadSpec(String),
    #[error("bad dataset counts: {0}")]
    BadCounts(String),
    #[error("unknown class label '{0}'")]
    UnknownLabel(String),
    #[error("unsupported audio: {0}")]
    UnsupportedAudio(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
