//! The common output of every subcommand.
//!
//! JSON mode prints one [`ExperimentReport`]. With the same seed and config
//! the document is identical apart from `wall_clock_ms`.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Bumped together with the wire protocol version.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema_version: &'static str,
    pub experiment: String,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub metrics: Map<String, Value>,
    /// Column order for `rows` and for CSV output.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub checks: Vec<Check>,
    pub wall_clock_ms: u64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: Value, seed: Option<u64>) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            config,
            seed,
            metrics: Map::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            checks: Vec::new(),
            wall_clock_ms: 0,
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("metrics are plain data");
        self.metrics.insert(key.to_string(), v);
    }

    pub fn columns(&mut self, names: &[&str]) {
        self.columns = names.iter().map(|s| s.to_string()).collect();
    }

    pub fn row(&mut self, values: Vec<Value>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn print_json(&self, out: &mut dyn Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn print_text(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "{}", self.experiment)?;
        if let Some(seed) = self.seed {
            writeln!(out, "  seed: {seed}")?;
        }
        let width = self.metrics.keys().map(String::len).max().unwrap_or(0);
        for (k, v) in &self.metrics {
            writeln!(out, "  {k:<width$}  {}", cell(v))?;
        }
        if !self.rows.is_empty() {
            writeln!(out)?;
            if self.rows.len() <= 32 {
                print_table(out, &self.columns, &self.rows)?;
            } else {
                writeln!(out, "  {} detail rows (write them with --csv)", self.rows.len())?;
            }
        }
        writeln!(out)?;
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "  [{mark}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.10}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn print_table(out: &mut dyn Write, columns: &[String], rows: &[Vec<Value>]) -> Result<()> {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(cell).collect()).collect();
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let line = |vals: Vec<&str>| {
        vals.iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    writeln!(out, "  {}", line(columns.iter().map(String::as_str).collect()))?;
    for r in &cells {
        writeln!(out, "  {}", line(r.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}
