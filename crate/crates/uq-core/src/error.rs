use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point index {index} out of range: rule holds at most 2^{max_log2} points")]
    PointIndexOutOfRange { index: u64, max_log2: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge in {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigenNonConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix not positive semi-definite: eigenvalue {value:.6e} below clamping threshold")]
    NotPositiveSemiDefinite { value: f64 },

    #[error("coarse-grid solve stalled: residual {residual:.3e} after {iterations} sweeps")]
    CoarseSolveNonConvergence { residual: f64, iterations: usize },

    #[error("empty accumulator: level {level} has no samples")]
    EmptyAccumulator { level: usize },

    #[error("operation requires at least {required} shifts, configured {got}")]
    TooFewShifts { required: usize, got: usize },

    #[error("bias estimate requires at least 3 levels, have {got}")]
    TooFewLevels { got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
