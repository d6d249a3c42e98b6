use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// σ is indexed from 1.
    #[error("sigma is defined for n >= 1 (got n = 0)")]
    ZeroIndex,

    /// A custom table was queried past its last row with no extrapolation rule.
    #[error("custom sequence has no value at n = {n}: table ends at {len} and no extrapolation rule is set")]
    BeyondTable { n: u64, len: u64 },

    /// The tail of a custom sequence is not determined, so no tail bound exists.
    #[error("tail behaviour is inconclusive: {0}")]
    Inconclusive(String),

    /// A truncation tolerance could not be met within the term budget.
    #[error("tolerance {tol:e} not reached after {terms} terms (remaining bound {bound:e})")]
    ToleranceUnreachable { tol: f64, terms: u64, bound: f64 },

    /// A check was asked for outside the regime where its inequality is proved.
    #[error("hypothesis not met: {0}")]
    HypothesisUnmet(String),

    #[error("theta left [0, 1] by more than rounding at step {n}: {theta}")]
    ThetaOutOfRange { n: u64, theta: f64 },

    #[error("window ({start}, {end}] exceeds the recorded horizon {horizon}")]
    WindowOutOfRange { start: u64, end: u64, horizon: u64 },

    #[error("path dump needs about {needed} bytes, over the budget of {budget}")]
    DumpBudgetExceeded { needed: u64, budget: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
