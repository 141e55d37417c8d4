//! Observation tables and CSV ingestion.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Immutable `n x p` table of finite observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n: usize,
    p: usize,
    values: Vec<f64>,
    source: String,
}

impl Dataset {
    pub fn new(p: usize, values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgs("dimension must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::EmptyFile);
        }
        if values.len() % p != 0 {
            return Err(Error::DimensionMismatch { expected: p, found: values.len() % p });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgs(format!("non-finite value in row {}", pos / p)));
        }
        Ok(Self { n: values.len() / p, p, values, source: source.into() })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], source: impl Into<String>) -> Result<Self> {
        let p = rows.first().map(|r| r.as_ref().len()).ok_or(Error::EmptyFile)?;
        let mut values = Vec::with_capacity(rows.len() * p);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != p {
                return Err(Error::RaggedRows { line: i + 1, expected: p, found: r.len() });
            }
            values.extend_from_slice(r);
        }
        Self::new(p, values, source)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p)
    }

    /// New dataset with `extra` appended below the existing rows.
    pub fn append_rows<R: AsRef<[f64]>>(&self, extra: &[R], source: impl Into<String>) -> Result<Self> {
        let mut values = self.values.clone();
        for r in extra {
            let r = r.as_ref();
            if r.len() != self.p {
                return Err(Error::DimensionMismatch { expected: self.p, found: r.len() });
            }
            values.extend_from_slice(r);
        }
        Self::new(self.p, values, source)
    }

    /// Translates every row by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let values = self.values.chunks_exact(self.p).flat_map(|r| r.iter().zip(shift).map(|(a, b)| a + b)).collect();
        Self { n: self.n, p: self.p, values, source: self.source.clone() }
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.p];
        for r in self.rows() {
            for (acc, v) in m.iter_mut().zip(r) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }

    /// Maximum-likelihood (divide by `n`) covariance, row-major.
    pub fn covariance(&self) -> Vec<f64> {
        let mean = self.column_means();
        let p = self.p;
        let mut c = vec![0.0; p * p];
        for r in self.rows() {
            for i in 0..p {
                let di = r[i] - mean[i];
                for j in 0..p {
                    c[i * p + j] += di * (r[j] - mean[j]);
                }
            }
        }
        c.iter_mut().for_each(|v| *v /= self.n as f64);
        c
    }

    /// Per-coordinate `(min, max)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.p];
        for r in self.rows() {
            for (bb, v) in b.iter_mut().zip(r) {
                bb.0 = bb.0.min(*v);
                bb.1 = bb.1.max(*v);
            }
        }
        b
    }

    /// Renders rows as CSV using shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in self.rows() {
            let line: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parses comma-separated numeric rows. A first line that does not parse as
/// numbers is treated as a header and skipped. Blank lines are ignored.
pub fn parse_csv(text: &str, source: impl Into<String>) -> Result<Dataset> {
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut first_content = true;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(e) => {
                if first_content {
                    first_content = false;
                    continue;
                }
                return Err(Error::ParseError { line: line_no, message: e.to_string() });
            }
        };
        first_content = false;
        if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::ParseError { line: line_no, message: format!("field {} is not finite", bad + 1) });
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::RaggedRows { line: line_no, expected: w, found: row.len() })
            }
            _ => {}
        }
        values.extend(row);
    }
    let p = width.ok_or(Error::EmptyFile)?;
    Dataset::new(p, values, source)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&text, path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_rows() {
        let d = parse_csv("1.0,2.0\n3.0,4.0", "mem").unwrap();
        assert_eq!((d.n(), d.p()), (2, 2));
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.source(), "mem");
    }

    #[test]
    fn header_skipped() {
        let d = parse_csv("x,y\n1,2", "mem").unwrap();
        assert_eq!((d.n(), d.p()), (1, 2));
    }

    #[test]
    fn ragged_rows_reported_with_line() {
        let err = parse_csv("1,2\n3", "mem").unwrap_err();
        assert_eq!(err, Error::RaggedRows { line: 2, expected: 2, found: 1 });
    }

    #[test]
    fn empty_and_header_only() {
        assert_eq!(parse_csv("", "mem").unwrap_err(), Error::EmptyFile);
        assert_eq!(parse_csv("a,b\n\n", "mem").unwrap_err(), Error::EmptyFile);
    }

    #[test]
    fn second_bad_line_is_parse_error() {
        let err = parse_csv("1,2\nfoo,3", "mem").unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 2, .. }));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = Dataset::from_rows(&[[0.1, -1e-300], [std::f64::consts::PI, 123456.789]], "x").unwrap();
        let back = parse_csv(&d.to_csv(), "x").unwrap();
        assert_eq!(back.values(), d.values());
    }
}
