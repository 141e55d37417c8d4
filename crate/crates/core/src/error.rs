use thiserror::Error;

/// Errors raised by the estimation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgs(String),
    #[error("every discriminant is zero for row {row}")]
    AllZeroDiscriminants { row: usize },
    #[error("covariance fixed-point denominator is not positive ({denominator})")]
    NonPositiveDenominator { denominator: f64 },
    #[error("cluster has zero total weight")]
    DegenerateCluster,
    #[error("need at least {k} rows, found {n}")]
    TooFewRows { n: usize, k: usize },
    #[error("all {starts} starts failed; last error: {last}")]
    AllStartsFailed { starts: usize, last: String },
    #[error("scale-inflation bracket cannot be made positive (ratio {ratio})")]
    Infeasible { ratio: f64 },
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("ragged rows: line {line} has {found} fields, expected {expected}")]
    RaggedRows { line: usize, expected: usize, found: usize },
    #[error("input contains no data rows")]
    EmptyFile,
    #[error("io error: {0}")]
    Io(String),
}

/// Coarse classification used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgs(_) => ErrorClass::Usage,
            Error::DimensionMismatch { .. }
            | Error::TooFewRows { .. }
            | Error::ParseError { .. }
            | Error::RaggedRows { .. }
            | Error::EmptyFile
            | Error::Io(_) => ErrorClass::Data,
            _ => ErrorClass::Numerical,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidArgs(_) => "InvalidArgs",
            Error::AllZeroDiscriminants { .. } => "AllZeroDiscriminants",
            Error::NonPositiveDenominator { .. } => "NonPositiveDenominator",
            Error::DegenerateCluster => "DegenerateCluster",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::AllStartsFailed { .. } => "AllStartsFailed",
            Error::Infeasible { .. } => "Infeasible",
            Error::ParseError { .. } => "ParseError",
            Error::RaggedRows { .. } => "RaggedRows",
            Error::EmptyFile => "EmptyFile",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
