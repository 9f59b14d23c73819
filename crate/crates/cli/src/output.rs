//! Tabular artifacts and their CSV/JSON encodings.
//!
//! Rendering is a pure function of the rows, so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    /// Unsigned values that may exceed `i128` in principle (`n_k` is `u128`).
    UInt(u128),
    Float(f64),
    /// An exact value already rendered as text (rationals, witnesses).
    Exact(String),
    Text(String),
    Bool(bool),
}

impl Cell {
    /// Floats carry 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Exact(s) | Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn render_json(&self) -> String {
        match self {
            Cell::Int(_) | Cell::UInt(_) | Cell::Bool(_) => self.render(),
            Cell::Float(v) if v.is_finite() => self.render(),
            Cell::Float(_) => "null".into(),
            Cell::Exact(s) | Cell::Text(s) => json_string(s),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v.into())
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::UInt(v.into())
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::UInt(v)
    }
}

impl From<i128> for Cell {
    fn from(v: i128) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().context("flushing csv buffer")
    }

    /// An array of objects whose keys follow the header order.
    pub fn to_json(&self) -> String {
        let keys: Vec<String> = self.headers.iter().map(|h| json_string(h)).collect();
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (k, cell)) in keys.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{k}: {}", cell.render_json());
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        let bytes = match format {
            Format::Csv => self.to_csv()?,
            Format::Json => self.to_json().into_bytes(),
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["k", "ratio", "note"]);
        t.push(vec![1u64.into(), 0.25.into(), "a,b".into()]);
        t.push(vec![2u64.into(), f64::NAN.into(), "say \"hi\"".into()]);
        t
    }

    #[test]
    fn csv_quotes_fields() {
        let text = String::from_utf8(sample().to_csv().unwrap()).unwrap();
        assert_eq!(
            text,
            "k,ratio,note\r\n1,2.5000000000000000e-1,\"a,b\"\r\n2,NaN,\"say \"\"hi\"\"\"\r\n"
        );
    }

    #[test]
    fn json_keeps_header_order() {
        let text = sample().to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v[0]["ratio"], 0.25);
        assert!(v[1]["ratio"].is_null());
        assert!(text.find("\"k\"").unwrap() < text.find("\"ratio\"").unwrap());
        assert_eq!(Table::new(&["x"]).to_json(), "[]\n");
    }

    #[test]
    fn floats_round_trip() {
        let x = 0.1 + 0.2;
        let s = Cell::Float(x).render();
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}
