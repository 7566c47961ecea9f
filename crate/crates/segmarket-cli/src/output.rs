//! Output plumbing: stdout-or-file sinks, fixed-width tables, and CSV rows.
//! Reports print numbers at six decimals; JSON keeps full precision.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (table|json|csv)")),
        }
    }
}

/// Collects the whole report, then writes it in one shot so --out files are
/// complete or absent.
pub struct Sink {
    buffer: String,
    target: Option<PathBuf>,
}

impl Sink {
    pub fn new(target: Option<PathBuf>) -> Self {
        Sink {
            buffer: String::new(),
            target,
        }
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        self.buffer.push_str(text.as_ref());
        self.buffer.push('\n');
    }

    pub fn finish(self) -> io::Result<()> {
        match self.target {
            Some(path) => fs::write(path, self.buffer),
            None => io::stdout().write_all(self.buffer.as_bytes()),
        }
    }
}

pub fn num(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.6}")
    } else {
        format!("{value}")
    }
}

pub fn csv_row(fields: &[String]) -> String {
    fields.join(",")
}

/// Left-padded table row from column widths.
pub fn table_row(cells: &[String], widths: &[usize]) -> String {
    let mut out = String::new();
    for (i, (cell, width)) in cells.iter().zip(widths).enumerate() {
        if i > 0 {
            out.push_str("  ");
        }
        let _ = write!(out, "{cell:>width$}");
    }
    out
}

/// Renders a header plus rows with per-column widths wide enough for all
/// content.
pub fn render_table(sink: &mut Sink, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let header_cells: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    sink.line(table_row(&header_cells, &widths));
    for row in rows {
        sink.line(table_row(row, &widths));
    }
}
