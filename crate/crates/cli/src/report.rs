//! Check rows and the three output formats.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use coherlab::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Reported value without an expectation.
    Info,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub name: String,
    pub value: f64,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
}

impl Row {
    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected: None,
            tolerance: None,
            status: Status::Info,
        }
    }

    /// Passes iff `|value - expected| <= tolerance`.
    pub fn check(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let ok = (value - expected).abs() <= tolerance;
        Self {
            name: name.into(),
            value,
            expected: Some(expected),
            tolerance: Some(tolerance),
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    /// Passes iff `value <= bound`, reported as expected `bound` with zero
    /// tolerance.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected: Some(bound),
            tolerance: Some(0.0),
            status: if value <= bound { Status::Pass } else { Status::Fail },
        }
    }

    pub fn flag(name: impl Into<String>, value: bool, expected: bool) -> Self {
        Self::check(name, f64::from(u8::from(value)), f64::from(u8::from(expected)), 0.0)
    }
}

/// A command result: rows for CSV/pretty output and a JSON document.
#[derive(Clone, Debug)]
pub struct Report {
    pub title: String,
    pub rows: Vec<Row>,
    pub json: Value,
}

impl Report {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Fail).count()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).unwrap_or_else(|_| "null".into());
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::from("name,value,expected,tolerance,status\n");
                for r in &self.rows {
                    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        csv_field(&r.name),
                        r.value,
                        opt(r.expected),
                        opt(r.tolerance),
                        status_name(r.status)
                    );
                }
                s
            }
            Format::Pretty => {
                let width = self.rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(4).max(4);
                let mut s = format!("{}\n", self.title);
                let _ = writeln!(s, "{:<width$}  {:>22}  {:>22}  {:>9}  status", "name", "value", "expected", "tol");
                for r in &self.rows {
                    let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.15}"));
                    let tol = r.tolerance.map_or("-".to_string(), |t| format!("{t:.0e}"));
                    let _ = writeln!(
                        s,
                        "{:<width$}  {:>22.15}  {:>22}  {:>9}  {}",
                        r.name,
                        r.value,
                        opt(r.expected),
                        tol,
                        status_name(r.status)
                    );
                }
                let checked = self.rows.iter().filter(|r| r.status != Status::Info).count();
                if checked > 0 {
                    let _ = writeln!(s, "{} of {checked} checks passed", checked - self.failed());
                }
                s
            }
        }
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Info => "info",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

pub fn density_json(rho: &DensityMatrix) -> Value {
    let entries: Vec<[f64; 2]> = rho.matrix().as_slice().iter().map(|z| [z.re, z.im]).collect();
    json!({ "dims": rho.dims(), "matrix": entries })
}

pub fn rows_json(rows: &[Row]) -> Value {
    serde_json::to_value(rows).unwrap_or(Value::Null)
}
