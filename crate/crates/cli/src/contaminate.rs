//! Appending contaminating rows: the embedded thyroid table or rows from a file.

use std::path::PathBuf;
use std::str::FromStr;

use betamix::reference::THYROID_CONTAMINANTS;
use betamix::{load_csv, Dataset, Error};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Contamination {
    /// The ten embedded five-dimensional thyroid contaminants.
    ThyroidTable,
    File(PathBuf),
}

impl FromStr for Contamination {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "thyroid" {
            return Ok(Contamination::ThyroidTable);
        }
        match s.strip_prefix("file:") {
            Some(path) if !path.is_empty() => Ok(Contamination::File(PathBuf::from(path))),
            _ => Err(format!("expected `thyroid` or `file:PATH`, got `{s}`")),
        }
    }
}

impl Contamination {
    pub fn rows(&self, p: usize) -> Result<Vec<Vec<f64>>, CliError> {
        match self {
            Contamination::ThyroidTable => {
                if p != 5 {
                    return Err(Error::DimensionMismatch { expected: 5, found: p }.into());
                }
                Ok(THYROID_CONTAMINANTS.iter().map(|r| r.to_vec()).collect())
            }
            Contamination::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                if text.trim().is_empty() {
                    return Ok(Vec::new());
                }
                let extra = load_csv(path)?;
                if extra.p() != p {
                    return Err(Error::DimensionMismatch { expected: p, found: extra.p() }.into());
                }
                Ok(extra.rows().map(|r| r.to_vec()).collect())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Contamination::ThyroidTable => "thyroid".into(),
            Contamination::File(path) => format!("file:{}", path.display()),
        }
    }
}

/// `data` with the contaminant rows appended.
pub fn inject_contamination(data: &Dataset, which: &Contamination) -> Result<Dataset, CliError> {
    let rows = which.rows(data.p())?;
    if rows.is_empty() {
        return Ok(data.clone());
    }
    Ok(data.append_rows(&rows, format!("{}+{}", data.source(), which.label()))?)
}
