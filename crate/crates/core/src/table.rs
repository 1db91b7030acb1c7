//! CSV tables (RFC 4180 subset: header row, comma separator, quoting only
//! when needed) and atomic file writes. Floats are printed in Rust's
//! shortest round-trip form, so the files are the ground truth for every
//! figure and can be diffed byte for byte across runs.

use crate::error::{invalid, Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Write `bytes` to `path` through a temp file in the same directory, so
/// a crash never leaves a half-written artifact behind.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    fs::write(tmp.path(), bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// An in-memory table with a fixed column set.
#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<String>) -> Result<()> {
        if cells.len() != self.columns.len() {
            return Err(invalid(format!(
                "row of {} cells in a table of {} columns",
                cells.len(),
                self.columns.len()
            )));
        }
        self.rows.push(cells);
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        render_row(&mut out, &self.columns);
        for row in &self.rows {
            render_row(&mut out, row);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_csv().as_bytes())
    }
}

/// Shortest decimal form that parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn render_row(out: &mut String, cells: &[String]) {
    for (i, cell) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if cell.contains([',', '"', '\n', '\r']) {
            out.push('"');
            for ch in cell.chars() {
                if ch == '"' {
                    out.push('"');
                }
                out.push(ch);
            }
            out.push('"');
        } else {
            out.push_str(cell);
        }
    }
    out.push('\n');
}

/// Parse a CSV document into (header, rows). Handles quoted fields with
/// doubled quotes and either line ending; every row must match the
/// header's width.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut records = Vec::new();
    let mut field = String::new();
    let mut record = Vec::new();
    let mut quoted = false;
    let mut chars = text.chars().peekable();
    while let Some(ch) = chars.next() {
        if quoted {
            match ch {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    field.push('"');
                }
                '"' => quoted = false,
                _ => field.push(ch),
            }
        } else {
            match ch {
                '"' if field.is_empty() => quoted = true,
                ',' => record.push(std::mem::take(&mut field)),
                '\r' => {}
                '\n' => {
                    record.push(std::mem::take(&mut field));
                    records.push(std::mem::take(&mut record));
                }
                _ => field.push(ch),
            }
        }
    }
    if quoted {
        return Err(Error::Parse("unterminated quoted field".into()));
    }
    if !field.is_empty() || !record.is_empty() {
        record.push(field);
        records.push(record);
    }
    let mut it = records.into_iter();
    let header = it.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let rows: Vec<Vec<String>> = it.collect();
    for (k, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::Parse(format!(
                "row {} has {} fields, header has {}",
                k + 2,
                row.len(),
                header.len()
            )));
        }
    }
    Ok((header, rows))
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

/// Read one named numeric column from a CSV file.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let (header, rows) = read_csv(&text)?;
    let idx = header
        .iter()
        .position(|c| c == column)
        .ok_or_else(|| Error::Parse(format!("no column {column:?} in {}", path.display())))?;
    rows.iter().map(|r| parse_f64(&r[idx])).collect()
}

/// Plain key=value block used by manifests; values keep their textual
/// form so the file round-trips.
pub fn render_kv(pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}
