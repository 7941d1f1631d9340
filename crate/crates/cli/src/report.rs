//! Report envelopes and their JSON / CSV renderings.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use evida_core::harness::{AccuracySurface, ExperimentResult, OverfitPoint};
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub command: &'static str,
    pub seed: Option<u64>,
    /// The parsed command-line flags, minus those that cannot change results.
    pub flags: Value,
}

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub meta: Meta,
    pub experiments: Vec<T>,
}

impl Meta {
    pub fn new(command: &'static str, seed: Option<u64>, flags: impl Serialize) -> Meta {
        Meta {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            schema: SCHEMA_VERSION,
            command,
            seed,
            flags: serde_json::to_value(flags).unwrap_or(Value::Null),
        }
    }
}

/// Tables that flatten to one CSV row per record.
pub trait CsvRows {
    fn header() -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn joined(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

impl CsvRows for ExperimentResult {
    fn header() -> Vec<&'static str> {
        vec![
            "source",
            "case_id",
            "d",
            "variant",
            "realizations",
            "failed",
            "mean_error",
            "std_error",
            "mean_accuracy",
            "median_k",
            "median_r",
            "baseline_error",
            "seconds",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.source.clone(),
            opt(&self.case_id),
            self.d.to_string(),
            self.variant.to_string(),
            self.realizations.to_string(),
            self.failed.to_string(),
            self.mean_error.to_string(),
            self.std_error.to_string(),
            self.mean_accuracy.to_string(),
            joined(&self.median_k),
            joined(&self.median_r),
            opt(&self.baseline_error),
            opt(&self.seconds),
        ]]
    }
}

impl CsvRows for OverfitPoint {
    fn header() -> Vec<&'static str> {
        vec![
            "d",
            "variant",
            "realizations",
            "failed",
            "train_accuracy",
            "validation_accuracy",
            "random_guess",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.d.to_string(),
            self.variant.to_string(),
            self.realizations.to_string(),
            self.failed.to_string(),
            self.train_accuracy.to_string(),
            self.validation_accuracy.to_string(),
            self.random_guess.to_string(),
        ]]
    }
}

impl CsvRows for AccuracySurface {
    fn header() -> Vec<&'static str> {
        vec!["k1", "k2", "k1_fraction", "k2_fraction", "accuracy"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let (g1, g2) = (self.k1.len() as f64, self.k2.len() as f64);
        let mut rows = Vec::with_capacity(self.k1.len() * self.k2.len());
        for (a, row) in self.accuracy.iter().enumerate() {
            for (b, acc) in row.iter().enumerate() {
                rows.push(vec![
                    self.k1[a].to_string(),
                    self.k2[b].to_string(),
                    ((a + 1) as f64 / g1).to_string(),
                    ((b + 1) as f64 / g2).to_string(),
                    acc.to_string(),
                ]);
            }
        }
        rows
    }
}

pub fn render<T: Serialize + CsvRows>(
    report: &Report<T>,
    format: Format,
) -> anyhow::Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(T::header())?;
            for e in &report.experiments {
                for row in e.rows() {
                    w.write_record(&row)?;
                }
            }
            Ok(w.into_inner().map_err(|e| anyhow::anyhow!(e.to_string()))?)
        }
    }
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| anyhow::anyhow!("{}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
