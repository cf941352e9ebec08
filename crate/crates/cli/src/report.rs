//! Machine-readable run reports.
//!
//! A report echoes the exact configuration it ran under and lists every
//! check with its value, expected value and tolerance, so it can be audited
//! offline. Reports contain no clocks or environment data: identical
//! configuration and seed produce byte-identical output.

use serde::Serialize;
use serde_json::Value;

use plsim::report::{all_pass, Check};

/// Report schema version; bump on any structural change.
pub const SCHEMA_VERSION: u32 = 1;

/// Output formats. CSV is a flat projection of the check table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        }
    }
}

/// Echo of the effective run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub seed: Option<u64>,
    pub rounds: Option<usize>,
    pub trials: Option<u64>,
    pub tolerance: Option<f64>,
    pub format: String,
}

/// One command's full result.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: ConfigEcho,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Report {
    pub fn new(command: &str, config: ConfigEcho, checks: Vec<Check>, details: Value) -> Self {
        let passed = all_pass(&checks);
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            checks,
            passed,
            details,
        }
    }

    /// Renders the report in the requested format.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.render_csv(),
            Format::Text => self.render_text(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::from("name,value,expected,tolerance,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.name, c.value, c.expected, c.tolerance, c.pass
            ));
        }
        out.push_str(&format!("overall,,,,{}\n", self.passed));
        out
    }

    fn render_text(&self) -> String {
        let name_width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(4)
            .max(5);
        let mut out = String::new();
        out.push_str(&format!(
            "{} report (schema v{})\n",
            self.command, self.schema_version
        ));
        out.push_str(&config_line(&self.config));
        out.push('\n');
        out.push_str(&format!(
            "{:<name_width$}  {:>22}  {:>22}  {:>12}  result\n",
            "check", "value", "expected", "tolerance"
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<name_width$}  {:>22}  {:>22}  {:>12}  {}\n",
                c.name,
                trim_float(c.value),
                trim_float(c.expected),
                trim_float(c.tolerance),
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        if let Some(table) = self.details.get("table") {
            out.push('\n');
            if let Some(rows) = table.as_array() {
                for row in rows {
                    if let Some(line) = row.as_str() {
                        out.push_str(line);
                        out.push('\n');
                    }
                }
            }
        }
        if let Some(note) = self.details.get("note").and_then(Value::as_str) {
            out.push('\n');
            out.push_str(note);
            out.push('\n');
        }
        out.push('\n');
        out.push_str(&format!(
            "overall: {}\n",
            if self.passed { "PASS" } else { "FAIL" }
        ));
        out
    }
}

fn config_line(config: &ConfigEcho) -> String {
    let mut parts = Vec::new();
    if let Some(seed) = config.seed {
        parts.push(format!("seed={seed}"));
    }
    if let Some(rounds) = config.rounds {
        parts.push(format!("rounds={rounds}"));
    }
    if let Some(trials) = config.trials {
        parts.push(format!("trials={trials}"));
    }
    if let Some(tol) = config.tolerance {
        parts.push(format!("tol={tol}"));
    }
    parts.push(format!("format={}", config.format));
    format!("config: {}\n", parts.join(" "))
}

/// Deterministic float rendering: plain for ordinary magnitudes,
/// scientific for the extremes.
fn trim_float(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-4 && v.abs() < 1e7) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
