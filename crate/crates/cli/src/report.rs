//! Report assembly and atomic output.

use crate::config::{Format, RunConfig};
use serde::Serialize;
use serde_json::{Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Environment variable that redirects report files.
pub const OUT_DIR_ENV: &str = "DRHEAT_OUT_DIR";

/// One tolerance check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            value: if passed { 1.0 } else { 0.0 },
            tolerance: 1.0,
            passed,
        }
    }
}

/// A rectangular table of cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt17(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::to_value(v).unwrap_or(Value::Null),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

/// 17 significant digits, locale independent.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub summary: Value,
    pub table: Option<Table>,
    pub checks: Vec<Check>,
    /// Raw CSV body used instead of `table` when present.
    pub csv_body: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        match cfg.format {
            Format::Json => self.render_json(cfg),
            Format::Csv => self.render_csv(cfg),
        }
    }

    fn render_json(&self, cfg: &RunConfig) -> String {
        let mut obj = Map::new();
        obj.insert("command".into(), Value::from(cfg.command));
        obj.insert("version".into(), Value::from(drheat_core::VERSION));
        obj.insert("config".into(), serde_json::to_value(cfg).unwrap_or(Value::Null));
        if let Value::Object(fields) = &self.summary {
            for (k, v) in fields {
                obj.insert(k.clone(), v.clone());
            }
        }
        if let Some(table) = &self.table {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    Value::Object(
                        table
                            .header
                            .iter()
                            .zip(row)
                            .map(|(h, c)| (h.clone(), c.json()))
                            .collect(),
                    )
                })
                .collect();
            obj.insert("rows".into(), Value::Array(rows));
        }
        obj.insert("checks".into(), serde_json::to_value(&self.checks).unwrap_or(Value::Null));
        obj.insert("passed".into(), Value::from(self.passed()));
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).unwrap_or_default();
        s.push('\n');
        s
    }

    fn render_csv(&self, cfg: &RunConfig) -> String {
        let mut out = String::new();
        out.push_str(&format!("# command: {}\n", cfg.command));
        out.push_str(&format!("# version: {}\n", drheat_core::VERSION));
        out.push_str(&format!("# config: {}\n", serde_json::to_string(cfg).unwrap_or_default()));
        for c in &self.checks {
            out.push_str(&format!(
                "# check {}: {} (value {}, tolerance {})\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                fmt17(c.value),
                fmt17(c.tolerance)
            ));
        }
        if let Some(body) = &self.csv_body {
            out.push_str(body);
        } else if let Some(table) = &self.table {
            out.push_str(&table.header.join(","));
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }
}

/// Where the report goes: `None` means stdout.
pub fn destination(cfg: &RunConfig) -> Option<PathBuf> {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match (&cfg.out, dir) {
        (Some(out), Some(dir)) if out.is_relative() => Some(dir.join(out)),
        (Some(out), _) => Some(out.clone()),
        (None, Some(dir)) => {
            let ext = match cfg.format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            Some(dir.join(format!("{}.{ext}", cfg.command)))
        }
        (None, None) => None,
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
