use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One problem found while validating an input table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// 1-based line (CSV) or trial index (JSON) where the problem was found.
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frequency {freq} Hz is at or above the Nyquist frequency {nyquist} Hz")]
    AboveNyquist { freq: f64, nyquist: f64 },

    #[error("sample rate mismatch: {expected} Hz vs {found} Hz")]
    SampleRateMismatch { expected: u32, found: u32 },

    #[error("channel count mismatch: {expected} vs {found}")]
    ChannelMismatch { expected: usize, found: usize },

    #[error("expected a mono signal, got {0} channels")]
    NotMono(usize),

    #[error("signal is silent")]
    Silent,

    #[error("signal carries no absolute calibration")]
    Uncalibrated,

    #[error("source too short: need {needed:.4} s, have {available:.4} s")]
    SourceTooShort { needed: f64, available: f64 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("too few samples: need at least {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },

    #[error("input is constant; correlation is undefined")]
    ConstantInput,

    #[error("{} validation error(s): {}", .0.len(), join_issues(.0))]
    Validation(Vec<ValidationIssue>),

    #[error("clipping: peak {peak_pa:.3} Pa exceeds full scale {full_scale_pa:.3} Pa (needs {headroom_db:.2} dB more headroom)")]
    Clipping {
        peak_pa: f64,
        full_scale_pa: f64,
        headroom_db: f64,
    },

    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("image encoding failed: {0}")]
    Image(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),
}

fn join_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::AboveNyquist { .. } => "above_nyquist",
            Error::SampleRateMismatch { .. } => "sample_rate_mismatch",
            Error::ChannelMismatch { .. } => "channel_mismatch",
            Error::NotMono(_) => "not_mono",
            Error::Silent => "silent",
            Error::Uncalibrated => "uncalibrated",
            Error::SourceTooShort { .. } => "source_too_short",
            Error::Empty(_) => "empty",
            Error::LengthMismatch(..) => "length_mismatch",
            Error::TooFewSamples { .. } => "too_few_samples",
            Error::ConstantInput => "constant_input",
            Error::Validation(_) => "validation",
            Error::Clipping { .. } => "clipping",
            Error::MissingFile(_) => "missing_file",
            Error::Mismatch(_) => "mismatch",
            Error::Image(_) => "image",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Wav(_) => "wav",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
