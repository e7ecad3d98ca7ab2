//! Common error type for the library.

/// Errors produced by the analysis, design and simulation layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structured input (degree distribution, matrix, config) is invalid.
    #[error("validation error: {0}")]
    Validation(String),

    /// An optimization problem has no solution under the given constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// No noise threshold exists on the search bracket.
    #[error("no threshold found: {0}")]
    NoThreshold(String),

    /// A graph or encoder construction could not be completed.
    #[error("construction error: {0}")]
    Construction(String),

    /// A numerical procedure failed to converge or lost precision.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// File or parse problems for the plain-text interchange formats.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
    pub fn no_threshold(msg: impl Into<String>) -> Self {
        Error::NoThreshold(msg.into())
    }
    pub fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
