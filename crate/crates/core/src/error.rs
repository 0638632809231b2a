use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, the solvers and the file emitters.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` must be strictly positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("coexistence equilibrium is degenerate (denominator {denominator:e})")]
    DegenerateEquilibrium { denominator: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("logistic seed must lie in (0, 1), got {0}")]
    InvalidSeed(f64),

    #[error("period-doubling transition {from} -> {to} is not bracketed in [{lo}, {hi}]")]
    ConvergenceFailure {
        from: usize,
        to: usize,
        lo: f64,
        hi: f64,
    },

    #[error("need at least 3 doubling points for a ratio, found {0}")]
    InsufficientPoints(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::DegenerateEquilibrium { .. }
                | Error::DivisionByZero(_)
                | Error::ConvergenceFailure { .. }
                | Error::InsufficientPoints(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
