//! CSV and JSON writers with deterministic formatting.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Shortest decimal that parses back to the same `f64`; empty for NaN.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:?}")
    }
}

/// One CSV table: a `#` comment line, a column row, then data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub comment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(comment: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            comment: comment.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!("# {}\n{}\n", self.comment.replace('\n', " "), self.columns.join(","));
        for r in &self.rows {
            debug_assert_eq!(r.len(), self.columns.len());
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Keeps free text from breaking the CSV layout.
pub fn cell(text: &str) -> String {
    text.replace([',', '\n'], ";")
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    write(path, &s)
}
