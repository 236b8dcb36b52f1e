//! Output schemas and writers.

use crate::config::ExperimentConfig;
use anyhow::Result;
use serde::Serialize;
use std::path::Path;

/// One row of `results.csv`; the column order is fixed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub command: String,
    pub algorithm: String,
    pub eps: f64,
    pub gamma: Option<f64>,
    pub seed: u64,
    pub rep: usize,
    pub queries_grad: u64,
    pub queries_hvp: u64,
    pub queries_hess: u64,
    pub grad_norm_out: f64,
    pub lambda_min_out: f64,
    pub success: bool,
    pub wall_ms: u64,
}

pub const RESULT_COLUMNS: [&str; 13] = [
    "command",
    "algorithm",
    "eps",
    "gamma",
    "seed",
    "rep",
    "queries_grad",
    "queries_hvp",
    "queries_hess",
    "grad_norm_out",
    "lambda_min_out",
    "success",
    "wall_ms",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PassageRow {
    pub eps: f64,
    pub rep: usize,
    pub seed: u64,
    pub mode: String,
    pub iterations: u64,
    pub total_queries: u64,
    pub first_passage_iteration: Option<u64>,
    pub first_passage_queries: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarningRow {
    pub eps: f64,
    pub rep: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub run_id: usize,
    /// Queries made when the progress was reached.
    pub t: u64,
    pub prog: usize,
}

/// Everything needed to reproduce an output directory.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub summary: serde_json::Value,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig, seeds: Vec<u64>, summary: serde_json::Value) -> Self {
        Self { version: crate::VERSION, config: cfg.clone(), seeds, summary }
    }
}

/// Column names, needed to write a header for an empty table.
pub trait CsvRow: Serialize {
    const HEADER: &'static [&'static str];
}

impl CsvRow for ResultRow {
    const HEADER: &'static [&'static str] = &RESULT_COLUMNS;
}

impl CsvRow for PassageRow {
    const HEADER: &'static [&'static str] = &[
        "eps",
        "rep",
        "seed",
        "mode",
        "iterations",
        "total_queries",
        "first_passage_iteration",
        "first_passage_queries",
    ];
}

impl CsvRow for WarningRow {
    const HEADER: &'static [&'static str] = &["eps", "rep", "seed", "message"];
}

impl CsvRow for TrajectoryRow {
    const HEADER: &'static [&'static str] = &["run_id", "t", "prog"];
}

/// Writes rows with a header line even when `rows` is empty.
pub fn write_csv<R: CsvRow>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(R::HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
