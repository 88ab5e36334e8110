use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

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

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => csv_field(s),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            // non-finite values have no JSON number form
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Self { name: name.to_string(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Cell::to_csv).collect();
            writeln!(out, "{}", fields.join(",")).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub subcommand: &'static str,
    pub parameters: Value,
    pub timestamp: String,
    pub outputs: Vec<OutputFile>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Collects the files of one run and writes the manifest last.
pub struct Writer {
    dir: PathBuf,
    format: Format,
    outputs: Vec<OutputFile>,
    pub notes: Vec<String>,
}

fn to_json_string(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

impl Writer {
    pub fn new(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), format, outputs: Vec::new(), notes: Vec::new() })
    }

    fn write_file(&mut self, file: String, contents: &str, rows: usize) -> Result<()> {
        let path = self.dir.join(&file);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(OutputFile { file, rows });
        Ok(())
    }

    pub fn table(&mut self, table: &Table) -> Result<()> {
        let file = format!("{}.{}", table.name, self.format.extension());
        let contents = match self.format {
            Format::Csv => table.to_csv(),
            Format::Json => to_json_string(&table.to_json())?,
        };
        self.write_file(file, &contents, table.rows.len())
    }

    /// Writes a serializable value as `<name>.json` regardless of format.
    pub fn json(&mut self, name: &str, value: &impl Serialize, rows: usize) -> Result<()> {
        let contents = to_json_string(value)?;
        self.write_file(format!("{name}.json"), &contents, rows)
    }

    pub fn finish(self, subcommand: &'static str, parameters: &impl Serialize) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            subcommand,
            parameters: serde_json::to_value(parameters)?,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs: self.outputs,
            notes: self.notes,
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, to_json_string(&manifest)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_float(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(fmt_float(-2.0), "-2.0000000000000000e0");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_and_json_carry_the_same_values() {
        let mut t = Table::new("t", &["a", "b", "c"]);
        t.push(vec![Cell::Num(0.1), Cell::Empty, "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b,c\n1.0000000000000001e-1,,\"x,y\"\n");
        let j = t.to_json();
        assert_eq!(j["rows"][0][0].as_f64(), Some(0.1));
        assert!(j["rows"][0][1].is_null());
    }
}
