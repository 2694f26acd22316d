use std::path::PathBuf;

use crate::grid::Cell;

/// Errors produced across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid spec: {0}")]
    InvalidGrid(String),
    #[error("cell {0:?} is outside the grid")]
    OutOfBounds(Cell),
    #[error("start position is outside the grid")]
    StartOutOfBounds,
    #[error("grid spec mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    SpecMismatch {
        expected_w: u32,
        expected_h: u32,
        got_w: u32,
        got_h: u32,
    },

    #[error("vectors must be nonzero")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("ensemble needs at least 2 scores, got {0}")]
    EnsembleTooSmall(usize),
    #[error("bearing {bearing} exceeds half field of view {half_fov}")]
    BearingOutsideFov { bearing: f64, half_fov: f64 },
    #[error("variance must be nonnegative, got {0}")]
    NegativeVariance(f64),
    #[error("visible set is empty")]
    EmptyView,
    #[error("invalid prompt ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("bridge transport failure: {0}")]
    Transport(#[from] std::io::Error),
    #[error("malformed bridge response: {0}")]
    MalformedResponse(String),
    #[error("bridge returned {got} scores, expected {expected}")]
    ScoreCount { expected: usize, got: usize },
    #[error("bridge score {0} outside [-1, 1]")]
    ScoreRange(f64),
    #[error("bridge response id {got} does not match request id {expected}")]
    IdMismatch { expected: u64, got: u64 },
    #[error("bridge reported an error: {0}")]
    Remote(String),

    #[error("trace parse error on line {line}: {message}")]
    TraceParse { line: usize, message: String },
    #[error("trace exhausted after {0} records")]
    TraceExhausted(usize),

    #[error("degenerate measurement variance at bearing {0}")]
    DegenerateVariance(f64),
    #[error("snapshot version mismatch")]
    SnapshotVersion,
    #[error("snapshot truncated")]
    SnapshotTruncated,
    #[error("snapshot dimension mismatch: {0}")]
    SnapshotDimension(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("no frontier available")]
    NoFrontier,
    #[error("path start {0:?} is occupied")]
    StartOccupied(Cell),

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("environment generation failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("episode already terminated")]
    EpisodeTerminated,
    #[error("no episode results")]
    EmptyResults,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
