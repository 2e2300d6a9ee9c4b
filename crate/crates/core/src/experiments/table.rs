//! Sweep result tables and their CSV / JSON encodings.
//!
//! CSV is long format, one line per (axis value, strategy):
//!
//! ```text
//! axis,strategy,mean,std_error,trials,epsilon,seed
//! ```
//!
//! `axis` holds the axis value (`k`, `n` as integers, `c_squared` as the
//! shortest decimal that round-trips). Exact rows carry `trials = 0` and
//! `std_error = 0`. Floats use Rust's shortest round-trip formatting, so a
//! table written twice from the same inputs is byte-identical.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{EstimateWithError, ExperimentError};

pub const CSV_HEADER: [&str; 7] = ["axis", "strategy", "mean", "std_error", "trials", "epsilon", "seed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    K,
    CSquared,
    N,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::K => "k",
            Axis::CSquared => "c_squared",
            Axis::N => "n",
        }
    }

    fn format_value(&self, v: f64) -> String {
        match self {
            Axis::K | Axis::N => format!("{}", v as u64),
            Axis::CSquared => format!("{v}"),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One strategy's value at one axis point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub strategy: String,
    pub mean: f64,
    pub std_error: f64,
    /// Zero for exact values.
    pub trials: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl SweepEntry {
    pub fn exact(strategy: &str, value: f64) -> Self {
        SweepEntry {
            strategy: strategy.to_string(),
            mean: value,
            std_error: 0.0,
            trials: 0,
            epsilon: 0.0,
            seed: 0,
        }
    }

    pub fn from_estimate(est: &EstimateWithError) -> Self {
        SweepEntry {
            strategy: est.strategy.tag().to_string(),
            mean: est.mean,
            std_error: est.std_error,
            trials: est.trials,
            epsilon: est.epsilon,
            seed: est.seed,
        }
    }

    /// `a − b` with independent errors added in quadrature.
    pub fn difference(strategy: &str, a: &SweepEntry, b: &SweepEntry) -> Self {
        SweepEntry {
            strategy: strategy.to_string(),
            mean: a.mean - b.mean,
            std_error: a.std_error.hypot(b.std_error),
            trials: a.trials.max(b.trials),
            epsilon: a.epsilon,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub entries: Vec<SweepEntry>,
}

impl SweepRow {
    pub fn get(&self, strategy: &str) -> Option<&SweepEntry> {
        self.entries.iter().find(|e| e.strategy == strategy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: Axis,
    pub master_seed: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn row(&self, axis_value: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.axis_value == axis_value)
    }

    /// Strategy tags in first-seen order.
    pub fn strategies(&self) -> Vec<String> {
        let mut tags: Vec<String> = Vec::new();
        for e in self.rows.iter().flat_map(|r| &r.entries) {
            if !tags.contains(&e.strategy) {
                tags.push(e.strategy.clone());
            }
        }
        tags
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let axis = self.axis.format_value(row.axis_value);
            for e in &row.entries {
                w.write_record([
                    axis.as_str(),
                    e.strategy.as_str(),
                    &e.mean.to_string(),
                    &e.std_error.to_string(),
                    &e.trials.to_string(),
                    &e.epsilon.to_string(),
                    &e.seed.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, ExperimentError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Fixed-width summary for terminals: one column per strategy.
    pub fn summary(&self) -> String {
        let tags = self.strategies();
        let mut s = format!("{:>10}", self.axis.name());
        for t in &tags {
            s.push_str(&format!(" {t:>22}"));
        }
        s.push('\n');
        for row in &self.rows {
            s.push_str(&format!("{:>10}", self.axis.format_value(row.axis_value)));
            for t in &tags {
                match row.get(t) {
                    Some(e) if e.trials > 0 => {
                        s.push_str(&format!(" {:>13.5} ± {:<6.4}", e.mean, e.std_error))
                    }
                    Some(e) => s.push_str(&format!(" {:>13.5}{:9}", e.mean, "")),
                    None => s.push_str(&format!(" {:>22}", "-")),
                }
            }
            s.push('\n');
        }
        s
    }
}
