//! CSV and JSON writers. Floats are written so that they parse back to the same bits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meta {
    pub geometry: String,
    pub a: f64,
    pub m: usize,
    #[serde(rename = "M")]
    pub trunc: usize,
    pub tol: f64,
    pub command: String,
    pub version: String,
}

impl Meta {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Meta {
            geometry: cfg.geometry.name().to_string(),
            a: cfg.a,
            m: cfg.m,
            trunc: cfg.trunc,
            tol: cfg.tol,
            command: cfg.command.name().to_string(),
            version: VERSION.to_string(),
        }
    }

    pub fn comment(&self) -> String {
        format!("# geometry={}, a={}, m={}, M={}, tol={:e}", self.geometry, self.a, self.m, self.trunc, self.tol)
    }
}

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => fmt_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // Non-finite values become null.
            Cell::Float(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<u32> for Cell {
    fn from(i: u32) -> Self {
        Cell::Int(i64::from(i))
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self, meta: &Meta) -> String {
        let mut out = meta.comment();
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

pub fn document(meta: &Meta, data: Value) -> Value {
    json!({ "meta": meta, "data": data })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<PathBuf> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(path.to_path_buf())
}

pub fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values always serialize");
    s.push('\n');
    s
}

/// Writes `<stem>.csv` or `<stem>.json` into `dir`.
pub fn write_table(dir: &Path, stem: &str, table: &Table, meta: &Meta, format: Format) -> CliResult<PathBuf> {
    let path = dir.join(format!("{stem}.{format}"));
    let text = match format {
        Format::Csv => table.to_csv(meta),
        Format::Json => json_text(&document(meta, table.to_json_rows())),
    };
    write_file(&path, &text)
}

pub fn write_json(dir: &Path, stem: &str, meta: &Meta, data: Value) -> CliResult<PathBuf> {
    write_file(&dir.join(format!("{stem}.json")), &json_text(&document(meta, data)))
}
