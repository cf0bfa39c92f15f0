//! Run directory: config snapshot, event log, summary table and metadata.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    #[default]
    Csv,
    Jsonl,
}

/// A tabular output: named columns and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Bool(v) => Value::from(*v),
            Cell::Text(v) => Value::from(v.as_str()),
        }
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
            out.push_str(&Value::Object(obj).to_string());
            out.push('\n');
        }
        out
    }
}

pub struct RunDir {
    dir: PathBuf,
    format: TableFormat,
    events: BufWriter<File>,
}

impl RunDir {
    /// Create the directory, write `config.json` and open `events.jsonl`.
    pub fn create(dir: &Path, format: TableFormat, config: &RunConfig) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let cfg_path = dir.join("config.json");
        fs::write(&cfg_path, config.to_json()).map_err(CliError::io(&cfg_path))?;
        let ev_path = dir.join("events.jsonl");
        let events = BufWriter::new(File::create(&ev_path).map_err(CliError::io(&ev_path))?);
        Ok(Self { dir: dir.to_path_buf(), format, events })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Append one event line: `{"event": kind, ...fields}`.
    pub fn event<T: Serialize>(&mut self, kind: &str, fields: &T) -> CliResult<()> {
        let mut obj = Map::new();
        obj.insert("event".into(), Value::from(kind));
        match serde_json::to_value(fields).expect("events serialize") {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("value".into(), other);
            }
        }
        let path = self.dir.join("events.jsonl");
        writeln!(self.events, "{}", Value::Object(obj)).map_err(CliError::io(path))
    }

    /// `summary.csv` or `summary.jsonl`, per the run's table format.
    pub fn summary(&self, table: &Table) -> CliResult<PathBuf> {
        self.table("summary", table)
    }

    pub fn table(&self, stem: &str, table: &Table) -> CliResult<PathBuf> {
        let (name, body) = match self.format {
            TableFormat::Csv => (format!("{stem}.csv"), table.to_csv()),
            TableFormat::Jsonl => (format!("{stem}.jsonl"), table.to_jsonl()),
        };
        self.file(&name, &body)
    }

    pub fn file(&self, name: &str, body: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(CliError::io(&path))?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        self.file(name, &(serde_json::to_string_pretty(value).expect("values serialize") + "\n"))
    }

    pub fn finish(mut self) -> CliResult<()> {
        let path = self.dir.join("events.jsonl");
        self.events.flush().map_err(CliError::io(path))
    }
}

/// Contents of `meta.json`: everything about a run that is not data.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub command: String,
    pub version: String,
    pub schema: String,
    pub seed: u64,
    pub workers: usize,
    pub started_at: String,
    pub finished_at: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_formats() {
        let mut t = Table::new(&["generation", "best_F", "ok"]);
        t.push(vec![Cell::Int(0), Cell::Float(0.5), Cell::Bool(true)]);
        assert_eq!(t.to_csv(), "generation,best_F,ok\n0,0.5,true\n");
        assert_eq!(t.to_jsonl(), "{\"generation\":0,\"best_F\":0.5,\"ok\":true}\n");
    }
}
