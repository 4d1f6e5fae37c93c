//! Delimiter-separated numeric dataset files.
//!
//! One observation per row, numeric columns only. The delimiter (comma,
//! tab, semicolon, or whitespace) is detected from the first non-blank
//! line, and a single leading header row is skipped when its fields do
//! not parse as numbers. Values are written with Rust's shortest
//! round-trip formatting, so a generate/parse cycle is lossless.

use std::fs;
use std::path::Path;

use mvnt::Sample;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("insufficient data: dataset contains no observations")]
    Empty,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Delimiter {
    Char(char),
    Whitespace,
}

fn detect_delimiter(line: &str) -> Delimiter {
    for c in [',', '\t', ';'] {
        if line.contains(c) {
            return Delimiter::Char(c);
        }
    }
    Delimiter::Whitespace
}

fn split_fields(line: &str, delim: Delimiter) -> Vec<&str> {
    match delim {
        Delimiter::Char(c) => line.split(c).map(str::trim).collect(),
        Delimiter::Whitespace => line.split_whitespace().collect(),
    }
}

fn parse_fields(fields: &[&str]) -> Result<Vec<f64>, String> {
    fields
        .iter()
        .map(|tok| match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(format!("non-finite value '{v}'")),
            Err(_) => Err(format!("non-numeric field '{tok}'")),
        })
        .collect()
}

pub fn read_dataset(path: &Path) -> Result<Sample, DatasetError> {
    let text = fs::read_to_string(path)?;
    parse_dataset(&text)
}

pub fn parse_dataset(text: &str) -> Result<Sample, DatasetError> {
    let mut delim: Option<Delimiter> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut saw_first_line = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let d = *delim.get_or_insert_with(|| detect_delimiter(line));
        let fields = split_fields(line, d);
        match parse_fields(&fields) {
            Ok(values) => {
                match width {
                    None => width = Some(values.len()),
                    Some(w) if w != values.len() => {
                        return Err(DatasetError::Parse {
                            line: line_no,
                            msg: format!("expected {w} columns, found {}", values.len()),
                        });
                    }
                    Some(_) => {}
                }
                rows.push(values);
            }
            Err(msg) => {
                // a single leading header row is allowed
                if !saw_first_line {
                    saw_first_line = true;
                    continue;
                }
                return Err(DatasetError::Parse { line: line_no, msg });
            }
        }
        saw_first_line = true;
    }

    if rows.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(Sample::from_rows(&rows).expect("rows validated during parsing"))
}

/// Renders a sample as comma-separated rows, shortest round-trip floats.
pub fn format_dataset(sample: &Sample) -> String {
    let mut out = String::new();
    for row in sample.data().rows() {
        let mut first = true;
        for v in row.iter() {
            if !first {
                out.push(',');
            }
            out.push_str(&v.to_string());
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn write_dataset(sample: &Sample, path: &Path) -> std::io::Result<()> {
    fs::write(path, format_dataset(sample))
}
