//! Trace plumbing: per-iteration CSV records, aggregate sweep rows, and
//! per-run JSON summaries. Column order and names are frozen (schema v1)
//! so downstream plotting stays stable across releases.

use std::fmt;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const TRACE_SCHEMA_VERSION: &str = "v1";

/// Frozen column order for per-iteration traces.
pub const TRACE_HEADER: [&str; 15] = [
    "run_id",
    "algo",
    "k",
    "j",
    "f",
    "grad_norm",
    "delta",
    "theta",
    "h",
    "mu",
    "rho",
    "krylov_iters",
    "matvecs",
    "wall_ns",
    "status",
];

/// Frozen column order for aggregate sweep tables.
pub const AGGREGATE_HEADER: [&str; 7] = [
    "method",
    "param",
    "value",
    "samples",
    "avg_iters",
    "failures",
    "avg_matvecs",
];

/// One inner-iteration row. Optional columns serialize as empty cells when
/// an algorithm has no such quantity. `krylov_iters`, `matvecs`, and
/// `wall_ns` are increments attributable to this row, so summaries can sum
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub run_id: String,
    pub algo: String,
    pub k: usize,
    pub j: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub delta: Option<f64>,
    pub theta: Option<f64>,
    pub h: Option<f64>,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub krylov_iters: usize,
    pub matvecs: usize,
    pub wall_ns: u64,
    pub status: String,
}

/// Terminal state of a driver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Success,
    Budget,
    Stalled,
    Failed,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            RunStatus::Success => "success",
            RunStatus::Budget => "budget",
            RunStatus::Stalled => "stalled",
            RunStatus::Failed => "failed",
        };
        f.write_str(tag)
    }
}

/// One cell of a (method, parameter) sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub method: String,
    /// Name of the swept parameter ("shift", "gamma", ...).
    pub param: String,
    pub value: f64,
    pub samples: usize,
    pub avg_iters: f64,
    pub failures: usize,
    pub avg_matvecs: f64,
}

/// Totals for one run, derived from its trace rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub algo: String,
    pub outer_iters: usize,
    pub ghm_solves: usize,
    pub krylov_iters_total: usize,
    pub matvecs_total: usize,
    pub wall_ns_total: u64,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub status: String,
}

pub fn write_trace<W: io::Write>(w: W, records: &[TraceRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(io::Error::from)?;
    Ok(())
}

pub fn write_trace_csv(path: impl AsRef<Path>, records: &[TraceRecord]) -> Result<()> {
    write_trace(std::fs::File::create(path)?, records)
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_aggregate<W: io::Write>(w: W, records: &[AggregateRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(io::Error::from)?;
    Ok(())
}

pub fn write_aggregate_csv(path: impl AsRef<Path>, records: &[AggregateRecord]) -> Result<()> {
    write_aggregate(std::fs::File::create(path)?, records)
}

pub fn read_aggregate_csv(path: impl AsRef<Path>) -> Result<Vec<AggregateRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Folds trace rows into one summary per run, grouped by `run_id` in first
/// appearance order. The last row of a run supplies its final objective,
/// gradient norm, and status tag.
pub fn summarize(records: &[TraceRecord]) -> Vec<RunSummary> {
    let mut order: Vec<String> = Vec::new();
    let mut out: Vec<RunSummary> = Vec::new();
    for r in records {
        let idx = match order.iter().position(|id| *id == r.run_id) {
            Some(i) => i,
            None => {
                order.push(r.run_id.clone());
                out.push(RunSummary {
                    run_id: r.run_id.clone(),
                    algo: r.algo.clone(),
                    outer_iters: 0,
                    ghm_solves: 0,
                    krylov_iters_total: 0,
                    matvecs_total: 0,
                    wall_ns_total: 0,
                    final_f: r.f,
                    final_grad_norm: r.grad_norm,
                    status: r.status.clone(),
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        s.outer_iters = s.outer_iters.max(r.k + 1);
        s.ghm_solves += 1;
        s.krylov_iters_total += r.krylov_iters;
        s.matvecs_total += r.matvecs;
        s.wall_ns_total += r.wall_ns;
        s.final_f = r.f;
        s.final_grad_norm = r.grad_norm;
        s.status = r.status.clone();
    }
    out
}

/// Pretty JSON array of per-run summaries.
pub fn emit_summary(records: &[TraceRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&summarize(records))?)
}
