use thiserror::Error;

/// Errors raised by the matching pipeline, the scene generator and the
/// benchmark harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input too small or otherwise degenerate for the requested operation.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Two inputs that must agree in shape do not.
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    /// A configuration value violates its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no correspondences to estimate a transform from")]
    NoCorrespondences,

    /// ACPPR is undefined when a scene has no genuine pairs left.
    #[error("metric undefined: scene has no true pairs")]
    UndefinedMetric,

    /// A benchmark trial failed; carries the grid coordinates.
    #[error("trial {trial} of cell (K={k}, outlier={outlier}, jitter={jitter}) failed: {source}")]
    Trial {
        k: usize,
        outlier: f64,
        jitter: f64,
        trial: usize,
        source: Box<Error>,
    },

    /// Malformed text input, with the 1-based line number.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
