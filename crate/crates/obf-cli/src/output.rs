//! Tabular output with a provenance header, rendered as CSV or JSON.

use crate::{CliError, OutputFormat};
use serde_json::{json, Map, Value};
use std::path::Path;

pub const VERSION_TAG: &str = concat!("obf ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x}"),
            Cell::Int(n) => format!("{n}"),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => Value::String(format!("{x}")),
            Cell::Int(n) => json!(n),
            Cell::Empty => Value::Null,
        }
    }
}

/// One output table: provenance pairs, column names, rows.
pub struct Table {
    provenance: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { provenance: Vec::new(), columns, rows: Vec::new() }
    }

    pub fn tag(mut self, key: &str, value: impl ToString) -> Self {
        self.provenance.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn header(&self) -> String {
        let mut parts = vec![VERSION_TAG.to_string()];
        for (k, v) in &self.provenance {
            parts.push(format!("{k}={v}"));
        }
        format!("# {}", parts.join(" | "))
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => {
                let mut out = String::new();
                out.push_str(&self.header());
                out.push('\n');
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            OutputFormat::Json => {
                let mut provenance = Map::new();
                provenance.insert("version".into(), Value::String(VERSION_TAG.into()));
                for (k, v) in &self.provenance {
                    provenance.insert(k.clone(), Value::String(v.clone()));
                }
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut obj = Map::new();
                        for (name, cell) in self.columns.iter().zip(row) {
                            obj.insert(name.to_string(), cell.json());
                        }
                        Value::Object(obj)
                    })
                    .collect();
                let doc = json!({
                    "provenance": Value::Object(provenance),
                    "columns": self.columns,
                    "rows": rows,
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("static structure");
                text.push('\n');
                text
            }
        }
    }
}

/// Writes to the path or standard output.
pub fn emit(table: &Table, format: OutputFormat, output: Option<&Path>) -> Result<(), CliError> {
    let text = table.render(format);
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
