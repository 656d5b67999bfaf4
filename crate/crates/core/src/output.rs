//! A flat `(command, params, rows)` record with CSV, JSON and plain-text
//! encodings. CSV and JSON both round-trip without loss.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Table,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            other => Err(Error::InvalidParameter(format!(
                "unknown format {other:?} (expected csv, json or table)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub rows: Vec<Row>,
}

impl OutputRecord {
    pub fn new(command: impl Into<String>) -> Self {
        OutputRecord {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn row(&mut self, label: impl Into<String>, value: impl ToString) -> &mut Self {
        self.rows.push(Row {
            label: label.into(),
            value: value.to_string(),
        });
        self
    }

    pub fn value(&self, label: &str) -> Option<&str> {
        self.rows
            .iter()
            .find(|r| r.label == label)
            .map(|r| r.value.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("bad JSON: {e}")))
    }

    /// Three columns `section,key,value`; sections are `command`, `param`
    /// and `row`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut put =
            |a: &str, b: &str, c: &str| w.write_record([a, b, c]).expect("write to memory");
        put("section", "key", "value");
        put("command", "command", &self.command);
        for (k, v) in &self.params {
            put("param", k, v);
        }
        for r in &self.rows {
            put("row", &r.label, &r.value);
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(format!("bad CSV: {msg}"));
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| bad(e.to_string()))?;
        if header != vec!["section", "key", "value"] {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut record = OutputRecord::default();
        for (i, line) in reader.records().enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.len() != 3 {
                return Err(bad(format!("record {} has {} fields", i + 2, line.len())));
            }
            match &line[0] {
                "command" => record.command = line[2].to_string(),
                "param" => {
                    record
                        .params
                        .insert(line[1].to_string(), line[2].to_string());
                }
                "row" => {
                    record.row(&line[1], &line[2]);
                }
                other => return Err(bad(format!("unknown section {other:?}"))),
            }
        }
        Ok(record)
    }

    /// Human-readable two-column listing.
    pub fn to_plain(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.command);
        for (k, v) in &self.params {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0);
        for r in &self.rows {
            let _ = writeln!(out, "{:<width$}  {}", r.label, r.value);
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Table => self.to_plain(),
        }
    }
}

/// Formats `value` cut (not rounded) to `digits` decimals, the convention
/// of the published four-digit tables.
pub fn format_truncated(value: f64, digits: u32) -> String {
    assert!(
        value >= 0.0 && value.is_finite(),
        "non-negative finite value"
    );
    let scale = 10u64.pow(digits);
    let scaled = (value * scale as f64).floor() as u64;
    format!(
        "{}.{:0width$}",
        scaled / scale,
        scaled % scale,
        width = digits as usize
    )
}
