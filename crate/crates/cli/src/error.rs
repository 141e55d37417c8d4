use betamix::ErrorClass;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] betamix::Error),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
    #[error("invalid truth file {path}: {message}")]
    Truth { path: String, message: String },
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    class: &'a str,
    message: String,
}

impl CliError {
    pub fn class(&self) -> ErrorClass {
        match self {
            CliError::Usage(_) => ErrorClass::Usage,
            CliError::Core(e) => e.class(),
            CliError::Write { .. } | CliError::Truth { .. } => ErrorClass::Data,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Core(e) => e.code(),
            CliError::Write { .. } => "IoError",
            CliError::Truth { .. } => "TruthFile",
        }
    }

    /// 2 usage, 3 data, 4 numerical.
    pub fn exit_code(&self) -> u8 {
        match self.class() {
            ErrorClass::Usage => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numerical => 4,
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        let class = match self.class() {
            ErrorClass::Usage => "usage",
            ErrorClass::Data => "data",
            ErrorClass::Numerical => "numerical",
        };
        let body = ErrorBody { error: self.code(), class, message: self.to_string() };
        serde_json::to_string(&body).expect("error body serialises")
    }
}
