//! Command-line front end: CSV ingestion, fits, experiments and JSON reports.

pub mod args;
pub mod contaminate;
pub mod error;
pub mod report;
pub mod run;

pub use args::Cli;
pub use contaminate::{inject_contamination, Contamination};
pub use error::CliError;
pub use run::run;
