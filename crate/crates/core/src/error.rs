//! Error type shared by every module.

use thiserror::Error;

/// Failures raised by the library and the CLI.
///
/// Variants split into validation problems (bad input, exit code 2) and
/// numeric problems (exit code 3), see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("group element does not conform to spec: {0}")]
    Domain(String),
    #[error("weight matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("undefined projection: expected value {0} has zero modulus on a circle quantity")]
    UndefinedProjection(String),
    #[error("parameter outside supported range: {0}")]
    OffGrid(String),
    #[error("inadmissible window: {0}")]
    Inadmissible(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("optimizer did not converge after {iterations} iterations (best objective {best:e})")]
    NoConvergence { iterations: usize, best: f64 },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the CLI: 2 for validation, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) | Error::NoConvergence { .. } | Error::UndefinedProjection(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_validation_from_numeric_failures() {
        assert_eq!(Error::InvalidArgument("x".into()).exit_code(), 2);
        assert_eq!(Error::Parse("x".into()).exit_code(), 2);
        assert_eq!(Error::Precondition("x".into()).exit_code(), 2);
        assert_eq!(Error::Numeric("x".into()).exit_code(), 3);
        assert_eq!(Error::UndefinedProjection("0".into()).exit_code(), 3);
        assert_eq!(
            Error::NoConvergence {
                iterations: 1,
                best: 0.0
            }
            .exit_code(),
            3
        );
    }
}
