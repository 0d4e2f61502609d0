use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the analysis routines and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("positivity violation: {0}")]
    PositivityViolation(String),

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("characteristic function vanishes on the contour near {0}")]
    RootOnBoundary(Complex64),

    #[error("resolvent is singular at lambda = {0}")]
    SingularResolvent(f64),

    #[error("time step {dt} exceeds the stability bound {max}")]
    CflViolation { dt: f64, max: f64 },

    #[error("history does not cover the delay window: {0}")]
    HistoryGap(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("trajectory is identically zero in the fit window")]
    AllZero,
}

pub type Result<T> = std::result::Result<T, Error>;
