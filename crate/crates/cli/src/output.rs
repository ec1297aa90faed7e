//! Delimited tables and JSON sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Tsv,
}

impl Format {
    fn delimiter(self) -> u8 {
        match self {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        }
    }
}

/// Floats are written with 17 significant digits, which round-trips f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

/// Header, data rows, and optional footer rows (label in the first column).
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub footer: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path, format: Format) -> CliResult<()> {
        let wrap = |source| CliError::Csv {
            path: path.display().to_string(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let mut w = csv::WriterBuilder::new()
            .delimiter(format.delimiter())
            .flexible(true)
            .from_path(path)
            .map_err(wrap)?;
        w.write_record(&self.header).map_err(wrap)?;
        for row in self.rows.iter().chain(&self.footer) {
            w.write_record(row.iter().map(Cell::render)).map_err(wrap)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
        Ok(())
    }
}

/// `<out>.json` next to the table.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        let v = 1.0 / 3.0;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn writes_csv_and_tsv() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(["n", "v"]);
        t.push(vec![3usize.into(), 0.5.into()]);
        t.footer.push(vec!["slope".into(), (-1.0).into(), Cell::Empty]);
        let p = dir.path().join("a.csv");
        t.write(&p, Format::Csv).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            "n,v\n3,5.0000000000000000e-1\nslope,-1.0000000000000000e0,\n"
        );
        let q = dir.path().join("sub/a.tsv");
        t.write(&q, Format::Tsv).unwrap();
        assert!(fs::read_to_string(&q).unwrap().starts_with("n\tv\n3\t"));
        assert_eq!(sidecar_path(&p), dir.path().join("a.csv.json"));
    }
}
