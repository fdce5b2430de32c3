//! Deterministic text outputs: 9-significant-digit numbers, CSV tables,
//! indented key/value reports, and atomic file writes.

use std::io::{self, Write};
use std::path::Path;

use tempfile::NamedTempFile;

/// Formats `x` with 9 significant digits: fixed notation for moderate
/// magnitudes, scientific otherwise. Negative zero prints as zero.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    // the rounded exponent decides the layout, so 9.9999999996 becomes 10.0000000
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').map_or(sci.len(), |i| i + 1)..]
        .parse()
        .unwrap_or(0);
    if (-5..10).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory
/// and a rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Renders a CSV table; floats go through [`sig9`].
pub fn csv_table(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(row.iter().map(Cell::render))
            .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv output is utf-8")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => sig9(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Indented `key: value` document with a fixed field order.
#[derive(Debug, Default, Clone)]
pub struct Report {
    out: String,
    depth: usize,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
    }

    /// Opens a nested section; close it with [`Report::end`].
    pub fn section(&mut self, name: &str) -> &mut Self {
        self.indent();
        self.out.push_str(name);
        self.out.push_str(":\n");
        self.depth += 1;
        self
    }

    /// Opens a list item section (`- name:`).
    pub fn item(&mut self, name: &str) -> &mut Self {
        self.indent();
        self.out.push_str("- ");
        self.out.push_str(name);
        self.out.push_str(":\n");
        self.depth += 1;
        self
    }

    pub fn end(&mut self) -> &mut Self {
        self.depth = self.depth.saturating_sub(1);
        self
    }

    pub fn text(&mut self, key: &str, value: impl AsRef<str>) -> &mut Self {
        self.indent();
        self.out.push_str(key);
        self.out.push_str(": ");
        self.out.push_str(value.as_ref());
        self.out.push('\n');
        self
    }

    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.text(key, sig9(value))
    }

    pub fn int(&mut self, key: &str, value: impl Into<i64>) -> &mut Self {
        self.text(key, value.into().to_string())
    }

    pub fn flag(&mut self, key: &str, value: bool) -> &mut Self {
        self.text(key, if value { "true" } else { "false" })
    }

    pub fn finish(self) -> String {
        self.out
    }
}
