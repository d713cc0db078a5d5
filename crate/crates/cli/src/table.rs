//! Typed result tables and their CSV form.
//!
//! A table is written as a `# key: value` provenance block followed by an
//! RFC 4180 body. Floats use `{:.16e}`, which round-trips every `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = concat!("iucorr ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Int,
    Float,
    Bool,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Value {
    fn ty(&self) -> ColumnType {
        match self {
            Value::Int(_) => ColumnType::Int,
            Value::Float(_) => ColumnType::Float,
            Value::Bool(_) => ColumnType::Bool,
            Value::Text(_) => ColumnType::Text,
        }
    }

    fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format!("{v:.16e}"),
            Value::Bool(v) => v.to_string(),
            Value::Text(v) => v.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(v) => Some(*v),
            Value::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Extra `key: value` lines, kept in insertion order.
    pub notes: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(config_text: &str, seed: u64) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
    pub provenance: Provenance,
}

impl ResultTable {
    pub fn new(columns: &[(&str, ColumnType)], provenance: Provenance) -> Self {
        Self {
            columns: columns
                .iter()
                .map(|(n, t)| Column {
                    name: n.to_string(),
                    ty: *t,
                })
                .collect(),
            rows: Vec::new(),
            provenance,
        }
    }

    pub fn push(&mut self, row: Vec<Value>) -> CliResult<()> {
        if row.len() != self.columns.len() {
            return Err(CliError::invalid(format!(
                "row has {} values, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (v, c) in row.iter().zip(&self.columns) {
            if v.ty() != c.ty {
                return Err(CliError::invalid(format!(
                    "column {} expects {:?}, got {:?}",
                    c.name,
                    c.ty,
                    v.ty()
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// All values of a float or int column.
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn bools(&self, name: &str) -> Option<Vec<bool>> {
        let i = self.column_index(name)?;
        self.rows
            .iter()
            .map(|r| match r[i] {
                Value::Bool(b) => Some(b),
                _ => None,
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> CliResult<()> {
        let p = &self.provenance;
        let mut head = format!(
            "# tool_version: {}\n# config_sha256: {}\n# seed: {}\n",
            p.tool_version, p.config_sha256, p.seed
        );
        for (k, v) in &p.notes {
            head.push_str(&format!("# {k}: {v}\n"));
        }
        out.write_all(head.as_bytes()).map_err(|e| CliError::io("<csv>", e))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render))?;
        }
        w.flush().map_err(|e| CliError::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, table.to_csv_string()).map_err(|e| CliError::io(path, e))
}
