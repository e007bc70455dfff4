use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Part 1 resolved every coefficient; there is nothing left for Part 2.
    #[error("residual set is empty")]
    EmptyResidual,

    #[error("calibration failed: best zero-identification fraction {best_fraction:.4} at c={best_constant} (target {target})")]
    CalibrationFailure {
        best_constant: f64,
        best_fraction: f64,
        target: f64,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("sweep produced no feasible grid point")]
    InfeasibleSweep,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
