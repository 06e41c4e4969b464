//! Tables, run manifests and their CSV/JSON rendering.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// A table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
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
        Cell::Text(v.to_owned())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // shortest round-trip form, `.` decimal, exponent outside 1e-5..1e16
            Cell::Float(v) => format!("{v:?}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(v.to_string()),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

/// A named table with a fixed column order.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Self {
            name: name.to_owned(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Provenance of one invocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub params: Value,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    /// SHA-256 of the data section.
    pub checksum: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, params: Value, seed: u64) -> Self {
        Self {
            tool: "pinlab",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_owned(),
            params,
            seed,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            checksum: String::new(),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn csv_data(tables: &[Table]) -> String {
    let mut s = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        let _ = writeln!(s, "# table: {}", t.name);
        let _ = writeln!(s, "{}", t.columns.join(","));
        for row in &t.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
    }
    s
}

fn json_data(tables: &[Table]) -> Value {
    let mut map = Map::new();
    for t in tables {
        let rows: Vec<Value> = t.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        map.insert(t.name.clone(), json!({ "columns": t.columns, "rows": rows }));
    }
    Value::Object(map)
}

/// Renders a document; the manifest checksum covers exactly the data
/// section (everything after the manifest line in CSV, the compact `data`
/// value in JSON).
pub fn render(mut manifest: RunManifest, tables: &[Table], format: Format) -> String {
    match format {
        Format::Csv => {
            let data = csv_data(tables);
            manifest.checksum = sha256_hex(data.as_bytes());
            let header = serde_json::to_string(&manifest).expect("manifest serializes");
            format!("# {header}\n{data}")
        }
        Format::Json => {
            let data = json_data(tables);
            manifest.checksum = sha256_hex(data.to_string().as_bytes());
            let doc = json!({ "meta": manifest, "data": data });
            let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
            s.push('\n');
            s
        }
    }
}

/// Splits a rendered document into its manifest and data section.
pub fn data_section(document: &str, format: Format) -> Option<String> {
    match format {
        Format::Csv => document.strip_prefix("# ")?.split_once('\n').map(|(_, d)| d.to_owned()),
        Format::Json => {
            let v: Value = serde_json::from_str(document).ok()?;
            Some(v.get("data")?.to_string())
        }
    }
}

/// Manifest of a rendered document.
pub fn manifest_of(document: &str, format: Format) -> Option<Value> {
    match format {
        Format::Csv => serde_json::from_str(document.strip_prefix("# ")?.split_once('\n')?.0).ok(),
        Format::Json => serde_json::from_str::<Value>(document).ok()?.get("meta").cloned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Table> {
        let mut t = Table::new("demo", &["k", "value", "ok"]);
        t.push(vec![1u64.into(), 0.75.into(), true.into()]);
        t.push(vec![2u64.into(), 1e-20.into(), false.into()]);
        vec![t]
    }

    #[test]
    fn csv_layout() {
        let doc = render(RunManifest::new("demo", json!({}), 0), &sample(), Format::Csv);
        let data = data_section(&doc, Format::Csv).unwrap();
        assert_eq!(data, "# table: demo\nk,value,ok\n1,0.75,true\n2,1e-20,false\n");
        let meta = manifest_of(&doc, Format::Csv).unwrap();
        assert_eq!(meta["checksum"], sha256_hex(data.as_bytes()));
    }

    #[test]
    fn json_layout() {
        let doc = render(RunManifest::new("demo", json!({"a": 1}), 4), &sample(), Format::Json);
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["meta"]["seed"], 4);
        assert_eq!(v["data"]["demo"]["columns"][1], "value");
        assert_eq!(v["data"]["demo"]["rows"][0][1], 0.75);
        let data = data_section(&doc, Format::Json).unwrap();
        assert_eq!(v["meta"]["checksum"], sha256_hex(data.as_bytes()));
    }
}
