use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    #[error("series did not converge after {terms} terms (next term {next_term:e})")]
    NonConvergence { terms: usize, next_term: f64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("quadrature did not converge: error estimate {estimate:e} after {panels} panels")]
    Quadrature { estimate: f64, panels: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid parameters: {0}")]
    Param(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),

    #[error("dataset `{name}` is not bundled; place the series at {}", path.display())]
    MissingExternalData { name: String, path: PathBuf },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("all {starts} starts failed; last error: {last}")]
    AllStartsFailed { starts: usize, last: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        func,
        msg: msg.into(),
    }
}
