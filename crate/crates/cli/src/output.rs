//! CSV tables and the JSON run summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: vec![] }
    }

    /// Appends a row; non-finite numbers are numeric failures.
    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), CliError> {
        if let Some((i, _)) = row.iter().enumerate().find(|(_, c)| matches!(c, Cell::Num(v) if !v.is_finite())) {
            return Err(CliError::Numeric {
                context: format!("row {} column {}", self.rows.len(), self.header[i]),
                source: fanning_lab_core::GeomError::NonFiniteValue("result".into()),
            });
        }
        self.push_unchecked(row);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(vec![]);
        let io = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub label: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckSummary {
    pub fn new(label: &str, measured: f64, tolerance: f64) -> Self {
        CheckSummary { label: label.into(), measured, tolerance, passed: measured.is_finite() && measured < tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub experiment: String,
    pub seed: u64,
    pub rows: usize,
    pub csv: String,
    pub max_residuals: std::collections::BTreeMap<String, f64>,
    pub checks: Vec<CheckSummary>,
    pub passed: bool,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Writes `<name>.csv` and `<name>.summary.json` into `dir`.
pub fn write_outputs(dir: &Path, name: &str, table: &Table, summary: &Summary) -> Result<(PathBuf, PathBuf), CliError> {
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |e: std::io::Error| CliError::Output(format!("{}: {e}", p.display()))
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let csv_path = dir.join(format!("{name}.csv"));
    let json_path = dir.join(format!("{name}.summary.json"));
    fs::write(&csv_path, table.to_csv()?).map_err(io(&csv_path))?;
    fs::write(&json_path, summary.to_json()).map_err(io(&json_path))?;
    Ok((csv_path, json_path))
}
