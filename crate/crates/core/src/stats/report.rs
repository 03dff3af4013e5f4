use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Rows of mixed numeric and label cells under named columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric cell, `None` for labels and non-finite values.
    pub fn number(&self, row: usize, column: &str) -> Option<f64> {
        self.rows.get(row)?.get(self.column(column)?)?.as_f64()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => "nan".to_string(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

/// A fitted quantity with its standard errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub name: String,
    pub value: f64,
    /// Monte Carlo standard error.
    pub stderr: f64,
    /// Regression-residual standard error, where meaningful.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_stderr: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    Below,
    Holds,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
            Comparison::Below => "<",
            Comparison::Holds => "==",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
}

impl Gate {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self::make(
            name,
            value,
            Comparison::AtMost,
            threshold,
            value <= threshold,
        )
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self::make(
            name,
            value,
            Comparison::AtLeast,
            threshold,
            value >= threshold,
        )
    }

    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self::make(name, value, Comparison::Below, threshold, value < threshold)
    }

    /// A yes/no property; `value` is 1 when it holds.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self::make(name, if ok { 1.0 } else { 0.0 }, Comparison::Holds, 1.0, ok)
    }

    fn make(name: &str, value: f64, comparison: Comparison, threshold: f64, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            value,
            comparison,
            threshold,
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Effective configuration after defaults.
    pub config: Value,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub summary: Table,
    pub fits: Vec<Fit>,
    pub gates: Vec<Gate>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(
        experiment: &str,
        config: Value,
        seed: u64,
        summary: Table,
        fits: Vec<Fit>,
        gates: Vec<Gate>,
    ) -> Self {
        let passed = gates.iter().all(|g| g.passed);
        Self {
            experiment: experiment.to_string(),
            config_hash: config_hash(&config),
            config,
            seed,
            summary,
            fits,
            gates,
            passed,
        }
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn fit(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// `<experiment>_<hash prefix>`.
    pub fn file_stem(&self) -> String {
        format!(
            "{}_{}",
            self.experiment.replace('-', "_"),
            &self.config_hash[..16]
        )
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let stem = self.file_stem();
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        fs::write(&json, self.to_json()?)?;
        fs::write(&csv, self.summary.to_csv())?;
        Ok((json, csv))
    }
}

/// Hex SHA-256 of the compact JSON serialization. Object keys serialize in
/// sorted order, so equal values hash equally.
pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
