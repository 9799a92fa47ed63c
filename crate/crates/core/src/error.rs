use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SngcaError {
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset must have at least {min_rows} rows and {min_cols} columns, got {rows}x{cols}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        min_rows: usize,
        min_cols: usize,
    },

    #[error("direction is not unit length (norm {0})")]
    NonUnitDirection(f64),

    #[error("empty input")]
    EmptyData,

    #[error("projection solver did not converge after {iterations} iterations (gap {gap:e})")]
    SolverNotConverged { iterations: usize, gap: f64 },

    #[error("candidate vectors span a degenerate subspace")]
    DegenerateSpan,

    #[error("ellipsoid rounding did not reach the stopping rule after {0} iterations")]
    MaxIterations(usize),

    #[error("invalid rank {m} for dimension {d}")]
    InvalidRank { m: usize, d: usize },

    #[error("too few samples: need at least {min}, got {n}")]
    TooFewSamples { n: usize, min: usize },

    #[error("too many samples: at most {max}, got {n}")]
    TooManySamples { n: usize, max: usize },

    #[error("sample has zero spread")]
    ConstantSample,

    #[error("unsupported significance level {0}")]
    UnsupportedAlpha(f64),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("eigensolver failed to converge")]
    EigenFailure,
}

impl SngcaError {
    /// True for failures caused by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SngcaError::SolverNotConverged { .. }
                | SngcaError::DegenerateSpan
                | SngcaError::MaxIterations(_)
                | SngcaError::EigenFailure
        )
    }
}

pub type Result<T> = std::result::Result<T, SngcaError>;
