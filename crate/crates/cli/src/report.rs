//! Tables and JSON documents with a fixed byte layout.

use std::io::Write;

use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    /// Floats use 17 significant digits in scientific notation.
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// What a command produces: a table with a summary, or a document.
pub enum Report {
    Table { table: Table, summary: Value },
    Document(Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn write_csv(table: &Table, out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

pub fn table_json(command: &str, table: &Table, summary: &Value) -> Value {
    let rows: Vec<Value> = table.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "columns": table.columns,
        "rows": rows,
        "summary": summary,
    })
}

pub fn document_json(command: &str, body: Value) -> Value {
    json!({ "schema_version": SCHEMA_VERSION, "command": command, "report": body })
}

/// One `key: value` line per summary entry, in key order.
pub fn summary_lines(summary: &Value) -> Vec<String> {
    match summary {
        Value::Object(map) => map.iter().map(|(k, v)| format!("{k}: {v}")).collect(),
        Value::Null => Vec::new(),
        other => vec![other.to_string()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["n", "value", "label"]);
        t.push(vec![3usize.into(), 0.1.into(), "a".into()]);
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,value,label\n3,1.0000000000000001e-1,a\n");
    }

    #[test]
    fn empty_table_keeps_header() {
        let mut buf = Vec::new();
        write_csv(&Table::new(&["omega_x", "ratio"]), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "omega_x,ratio\n");
    }
}
