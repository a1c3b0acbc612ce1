use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected {expected}-channel input, got {found} channel(s)")]
    InvalidChannelCount { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("region {region:?} lies outside a {width}x{height} mask")]
    OutOfBounds {
        region: (usize, usize, usize, usize),
        width: usize,
        height: usize,
    },

    #[error("no files matching {pattern:?} in {dir}")]
    NoFiles { dir: PathBuf, pattern: String },

    #[error("cannot decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("clip of {frames} frame(s) is shorter than one {window}-frame window")]
    EmptySchedule { frames: usize, window: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frame of {width}x{height} is not divisible into {block}x{block} blocks; rescale first")]
    IndivisibleDimensions {
        width: usize,
        height: usize,
        block: usize,
    },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("class {label} has {count} sample(s), fewer than {folds} folds")]
    ClassTooSmall { label: i8, count: usize, folds: usize },

    #[error("SMO did not converge after {iterations} iterations (gap {gap:.3e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("unsupported model format version {found} (this build reads version {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("malformed feature file: {0}")]
    MalformedFeatures(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("ground truth mismatch: {0}")]
    LabelMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 1,
            Error::NonConvergence { .. } => 3,
            _ => 2,
        }
    }
}
