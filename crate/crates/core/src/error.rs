use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller combined otherwise valid inputs in an unsupported way.
    #[error("usage error: {0}")]
    Usage(String),

    /// The requested time step violates the advective stability bound.
    #[error("step-size error at t={time}: dt={dt} exceeds CFL limit {limit} (u_max={u_max})")]
    StepSize {
        time: f64,
        dt: f64,
        limit: f64,
        u_max: f64,
    },

    /// Non-finite values appeared; `last_good_time` is the last state that was finite.
    #[error("numerical failure at step {step}: non-finite state (last good time {last_good_time})")]
    NonFinite { step: usize, last_good_time: f64 },

    /// A power-law fit was asked to take the log of nonpositive data, or had too few points.
    #[error("fit-domain error: {0}")]
    FitDomain(String),

    /// A sampler or simulator was configured so that it cannot make progress.
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
