use std::fmt;

/// Errors produced by the estimation toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The sample violates a structural invariant.
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    /// The data do not admit an estimate (e.g. all values identical).
    #[error("no solution: {0}")]
    NoSolution(String),

    /// An estimator precondition is not met by otherwise valid data.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The requested estimator is not defined for this kind of sample.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The root finder ran out of iterations.
    #[error("{0}")]
    Convergence(ConvergenceFailure),

    /// A matrix or denominator is numerically singular.
    #[error("singular: {0}")]
    Singular(String),

    /// An intermediate quantity overflowed.
    #[error("overflow: {0}")]
    Overflow(String),

    /// The bias adjustment drove a parameter to a non-positive value.
    #[error("bias correction overshoot: {parameter} estimate {estimate} minus bias {bias} is not positive")]
    CorrectionOvershoot {
        parameter: &'static str,
        estimate: f64,
        bias: f64,
    },

    /// Malformed data file; `line` is 1-based.
    #[error("{}", match .line { Some(l) => format!("line {l}: {message}"), None => message.clone() })]
    Parse { line: Option<usize>, message: String },

    /// Invalid simulation configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Diagnostics attached to a root-finder failure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceFailure {
    pub iterations: usize,
    pub last_x: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
}

impl fmt::Display for ConvergenceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no convergence after {} iterations (x = {}, residual = {:e}, bracket = [{}, {}])",
            self.iterations, self.last_x, self.residual, self.bracket.0, self.bracket.1
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
