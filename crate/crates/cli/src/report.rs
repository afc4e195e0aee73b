use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Extra columns carried by Monte Carlo rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloDetail {
    pub x0_norm: f64,
    pub alpha: f64,
    pub mu_total: f64,
    pub stderr: f64,
    pub n_truncated: usize,
    /// Allowance for discretisation bias added to `3·stderr`.
    pub bias_budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloDetail>,
}

impl ReportRow {
    /// Row that passes iff `|expected - observed| <= tolerance`.
    pub fn compare(label: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            expected,
            observed,
            tolerance,
            pass: (expected - observed).abs() <= tolerance,
            monte_carlo: None,
        }
    }

    /// Row for a computation that did not complete; never passes.
    pub fn failed(label: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        Self {
            pass: false,
            ..Self::compare(label, expected, observed, tolerance)
        }
    }

    /// Monte Carlo row with tolerance `3·stderr + bias_budget`.
    pub fn monte_carlo(
        label: impl Into<String>,
        expected: f64,
        observed: f64,
        detail: MonteCarloDetail,
    ) -> Self {
        let tolerance = 3.0 * detail.stderr + detail.bias_budget;
        Self {
            monte_carlo: Some(detail),
            ..Self::compare(label, expected, observed, tolerance)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub inputs: serde_json::Value,
    pub rows: Vec<ReportRow>,
    /// Seconds; `None` when timing is suppressed for byte-stable output.
    pub wall_time: Option<f64>,
}

#[derive(Serialize)]
struct PlainCsvRow<'a> {
    label: &'a str,
    expected: f64,
    observed: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct EstimateCsvRow<'a> {
    x0_norm: f64,
    alpha: f64,
    mu_total: f64,
    expected: f64,
    observed: f64,
    stderr: f64,
    n_truncated: usize,
    pass: bool,
    label: &'a str,
}

impl ExperimentReport {
    pub fn new(
        command: impl Into<String>,
        inputs: serde_json::Value,
        rows: Vec<ReportRow>,
    ) -> Self {
        Self {
            command: command.into(),
            inputs,
            rows,
            wall_time: None,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    /// 0 when every row passes, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    /// CSV with the estimate columns when every row is a Monte Carlo row,
    /// and `label, expected, observed, tolerance, pass` otherwise.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let monte_carlo =
            !self.rows.is_empty() && self.rows.iter().all(|r| r.monte_carlo.is_some());
        for row in &self.rows {
            match (&row.monte_carlo, monte_carlo) {
                (Some(mc), true) => writer.serialize(EstimateCsvRow {
                    x0_norm: mc.x0_norm,
                    alpha: mc.alpha,
                    mu_total: mc.mu_total,
                    expected: row.expected,
                    observed: row.observed,
                    stderr: mc.stderr,
                    n_truncated: mc.n_truncated,
                    pass: row.pass,
                    label: &row.label,
                })?,
                _ => writer.serialize(PlainCsvRow {
                    label: &row.label,
                    expected: row.expected,
                    observed: row.observed,
                    tolerance: row.tolerance,
                    pass: row.pass,
                })?,
            }
        }
        writer.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}
