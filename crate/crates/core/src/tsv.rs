//! Tab-separated input and output helpers.
//!
//! Inputs are UTF-8, tab-separated, with a header row; multi-valued cells use
//! `|`. Outputs always use `\n` line endings.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// One data row of a TSV file, with its 1-based line number.
#[derive(Debug, Clone)]
pub struct Row {
    pub line: u64,
    pub fields: Vec<String>,
}

/// Reads a TSV file and checks that the header matches `expected` exactly.
pub fn read_table(path: &Path, expected: &[&str]) -> Result<Vec<Row>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_table_from(file, path, expected)
}

pub fn read_table_from<R: Read>(reader: R, path: &Path, expected: &[&str]) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header {:?}, found {:?}", expected, got),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            csv_error(path, line, e)
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec.get(0).is_some_and(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() != expected.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected {} fields, found {}", expected.len(), rec.len()),
            });
        }
        rows.push(Row {
            line,
            fields: rec.iter().map(|f| f.trim_end_matches('\r').to_string()).collect(),
        });
    }
    Ok(rows)
}

fn csv_error(path: &Path, line: u64, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

/// Splits a `|`-separated multi-valued cell, dropping empty parts.
pub fn split_multi(cell: &str) -> impl Iterator<Item = &str> {
    cell.split('|').map(str::trim).filter(|s| !s.is_empty())
}

pub(crate) fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses an optional finite number. Empty, `NA`, `NaN` and `.` mean missing.
pub(crate) fn parse_optional_f64(path: &Path, line: u64, col: &str, cell: &str) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") || cell == "." {
        return Ok(None);
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| parse_error(path, line, format!("column {col}: cannot parse {cell:?} as a number")))?;
    if !v.is_finite() {
        return Err(parse_error(path, line, format!("column {col}: non-finite value {cell:?}")));
    }
    Ok(Some(v))
}

/// In-memory TSV document builder.
#[derive(Debug, Clone, Default)]
pub struct TsvWriter {
    buf: String,
}

impl TsvWriter {
    pub fn new(header: &[&str]) -> Self {
        let mut w = TsvWriter { buf: String::new() };
        w.row(header.iter().copied());
        w
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push('\t');
            }
            first = false;
            self.buf.push_str(f.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Formats a float for output files. Shortest round-trip representation, with
/// `NA` for missing or non-finite values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        let mut s = String::new();
        write!(s, "{v}").expect("write to string");
        s
    } else {
        "NA".to_string()
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "NA".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_mismatch_is_reported() {
        let data = "a\tb\n1\t2\n";
        let err = read_table_from(data.as_bytes(), Path::new("x.tsv"), &["a", "c"]).unwrap_err();
        assert!(err.to_string().contains("x.tsv:1"), "{err}");
    }

    #[test]
    fn wrong_field_count_names_line() {
        let data = "a\tb\n1\t2\n3\n";
        let err = read_table_from(data.as_bytes(), Path::new("x.tsv"), &["a", "b"]).unwrap_err();
        assert!(err.to_string().contains("x.tsv:3"), "{err}");
    }

    #[test]
    fn missing_markers() {
        let p = Path::new("x");
        assert_eq!(parse_optional_f64(p, 1, "c", "NA").unwrap(), None);
        assert_eq!(parse_optional_f64(p, 1, "c", "").unwrap(), None);
        assert_eq!(parse_optional_f64(p, 1, "c", "2.5").unwrap(), Some(2.5));
        assert!(parse_optional_f64(p, 1, "c", "inf").is_err());
        assert!(parse_optional_f64(p, 1, "c", "abc").is_err());
    }

    #[test]
    fn writer_uses_newlines() {
        let mut w = TsvWriter::new(&["a", "b"]);
        w.row(["1", "x"]);
        assert_eq!(w.finish(), "a\tb\n1\tx\n");
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(f64::NAN), "NA");
    }
}
