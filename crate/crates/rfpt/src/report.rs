//! CSV tables and JSON summaries. Every file carries the resolved config and
//! seed; nothing time- or host-dependent is written, so reruns reproduce the
//! files byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Flag(bool),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            // 17 significant digits
            Cell::Real(v) => write!(out, "{v:.16e}"),
            Cell::Int(v) => write!(out, "{v}"),
            Cell::Flag(v) => write!(out, "{}", u8::from(*v)),
        }
        .expect("write to string");
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_reals(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| Cell::Real(v)).collect());
    }

    pub fn render(&self, cfg: &ExperimentConfig, command: &str) -> String {
        let mut out = String::new();
        writeln!(out, "# rfpt {command}").unwrap();
        writeln!(out, "# config: {}", cfg.to_json()).unwrap();
        writeln!(out, "# seed: {}", cfg.numerics.seed).unwrap();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

/// Writes files into one output directory and remembers what was written.
#[derive(Debug)]
pub struct ReportWriter {
    dir: PathBuf,
    command: String,
    pub written: Vec<PathBuf>,
}

impl ReportWriter {
    pub fn new(dir: &Path, command: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.into(),
            written: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn csv(
        &mut self,
        name: &str,
        table: &Table,
        cfg: &ExperimentConfig,
    ) -> Result<PathBuf, CliError> {
        self.put(name, &table.render(cfg, &self.command))
    }

    /// Writes `body` with `command`, `config` and `seed` fields added.
    pub fn json(
        &mut self,
        name: &str,
        body: Value,
        cfg: &ExperimentConfig,
    ) -> Result<PathBuf, CliError> {
        let mut obj = serde_json::Map::new();
        obj.insert("command".into(), Value::from(self.command.clone()));
        obj.insert(
            "config".into(),
            serde_json::to_value(cfg).map_err(|e| CliError::Io(e.to_string()))?,
        );
        obj.insert("seed".into(), Value::from(cfg.numerics.seed));
        if let Value::Object(m) = body {
            obj.extend(m);
        } else {
            obj.insert("result".into(), body);
        }
        let text = serde_json::to_string_pretty(&Value::Object(obj))
            .map_err(|e| CliError::Io(e.to_string()))?;
        self.put(name, &(text + "\n"))
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}
