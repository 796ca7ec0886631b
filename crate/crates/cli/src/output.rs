//! Tabular artifacts and their CSV / JSON renderings.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::spec::Format;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
    /// Missing value (e.g. a flagged self-consistency row).
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// Rows of plot-ready data plus run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Value,
}

impl Artifact {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: json!({}),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Columns, rows as objects, and the metadata in one document.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.clone(), json_cell(v)))
                    .collect::<serde_json::Map<_, _>>();
                Value::Object(obj)
            })
            .collect();
        json!({ "columns": self.columns, "rows": rows, "metadata": self.metadata })
    }

    /// Write to `out` (stdout when `None`). CSV output to a file gets a
    /// `<out>.json` metadata sidecar.
    pub fn write(&self, out: Option<&Path>, format: Format) -> Result<(), CliError> {
        match (out, format) {
            (None, Format::Csv) => self.write_csv(std::io::stdout().lock()),
            (None, Format::Json) => {
                let mut stdout = std::io::stdout().lock();
                serde_json::to_writer_pretty(&mut stdout, &self.to_json())
                    .map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(stdout)?;
                Ok(())
            }
            (Some(path), Format::Csv) => {
                let mut buf = Vec::new();
                self.write_csv(&mut buf)?;
                std::fs::write(path, buf).map_err(|e| io_at(path, e))?;
                let sidecar = sidecar_path(path);
                write_json(&sidecar, &self.metadata)
            }
            (Some(path), Format::Json) => write_json(path, &self.to_json()),
        }
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Num(v) if v.is_finite() => json!(v),
        Cell::Num(v) => json!(v.to_string()),
        Cell::Text(s) => json!(s),
        Cell::Bool(b) => json!(b),
        Cell::Empty => Value::Null,
    }
}

fn io_at(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_at(path, e))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_shortest_round_trip_floats() {
        let mut a = Artifact::new(&["T", "Z", "status"]);
        a.push(vec![0.1.into(), (1.0 / 3.0).into(), "ok".into()]);
        a.push(vec![2.0.into(), Cell::Empty, "branch_breakdown".into()]);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "T,Z,status\n0.1,0.3333333333333333,ok\n2,,branch_breakdown\n");
        let z: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(z, 1.0 / 3.0);
    }

    #[test]
    fn json_rows_are_objects() {
        let mut a = Artifact::new(&["T", "pass"]);
        a.push(vec![1.0.into(), true.into()]);
        let v = a.to_json();
        assert_eq!(v["rows"][0]["T"], json!(1.0));
        assert_eq!(v["rows"][0]["pass"], json!(true));
    }

    #[test]
    fn sidecar_appends_extension() {
        assert_eq!(sidecar_path(Path::new("out/bk.csv")), PathBuf::from("out/bk.csv.json"));
    }
}
