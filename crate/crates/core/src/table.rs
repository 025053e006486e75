//! Shared CSV plumbing: header checks, line tracking and field parsing.

use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord, Trim};

#[derive(Debug)]
pub(crate) enum TableError {
    Io { path: String, source: std::io::Error },
    Parse { file: String, line: u64, message: String },
}

pub(crate) struct Row {
    pub line: u64,
    record: StringRecord,
}

impl Row {
    pub fn field(&self, idx: usize) -> &str {
        self.record.get(idx).unwrap_or("")
    }

    pub fn opt(&self, idx: usize) -> Option<&str> {
        let v = self.field(idx);
        (!v.is_empty()).then_some(v)
    }

    pub fn parse<T: FromStr>(&self, idx: usize, name: &str) -> Result<T, String> {
        let raw = self.field(idx);
        if raw.is_empty() {
            return Err(format!("missing {name}"));
        }
        raw.parse()
            .map_err(|_| format!("invalid {name} '{raw}'"))
    }

    pub fn parse_opt<T: FromStr>(&self, idx: usize, name: &str) -> Result<Option<T>, String> {
        match self.opt(idx) {
            None => Ok(None),
            Some(_) => self.parse(idx, name).map(Some),
        }
    }
}

pub(crate) fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Reads every data row of a comma-separated file whose header must match
/// `header` exactly.
pub(crate) fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Row>, TableError> {
    let file = File::open(path).map_err(|source| TableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let label = file_label(path);
    let parse_err = |line: u64, message: String| TableError::Parse {
        file: label.clone(),
        line,
        message,
    };
    let mut reader = ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .from_reader(file);

    let found = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let found: Vec<&str> = found.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if found != header {
        return Err(parse_err(
            1,
            format!("expected header '{}', found '{}'", header.join(","), found.join(",")),
        ));
    }

    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        rows.push(Row { line, record });
    }
    Ok(rows)
}

pub(crate) fn join_list(items: &[String]) -> String {
    items.join(";")
}

pub(crate) fn split_list(raw: &str) -> Vec<String> {
    raw.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}
