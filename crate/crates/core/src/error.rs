//! Error type shared across the crate.

/// Errors surfaced by the simulator.
///
/// `Config` maps to CLI exit code 1, everything else to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("domain error: {0}")]
    Domain(String),
    /// Angle estimate left the physical disk; the trial can be retried or
    /// flagged by the caller.
    #[error("estimation failure: {0}")]
    EstimationFailure(String),
    #[error("barrier domain error: {0}")]
    BarrierDomain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
