//! On-disk formats: one JSON document and one episode CSV per run, plus
//! `summary.csv`, `bounds.csv` and `aggregate.csv` per invocation.

use std::fs;
use std::path::{Path, PathBuf};

use odog_core::diagnostics::BoundReport;
use odog_core::engine::RunResult;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Column order of `summary.csv`.
pub const SUMMARY_COLUMNS: [&str; 13] = [
    "problem",
    "optimizer",
    "budget",
    "sigma",
    "seed",
    "radius",
    "episode_length",
    "episodes",
    "eta",
    "gamma",
    "mean_grad_norm",
    "output_grad_norm",
    "total_regret",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub problem: String,
    pub optimizer: String,
    pub budget: usize,
    pub sigma: f64,
    pub seed: u64,
    pub radius: f64,
    pub episode_length: usize,
    pub episodes: usize,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    /// `(1/K) Σₖ ‖∇F(w̄ᵏ)‖`
    pub mean_grad_norm: f64,
    /// `‖∇F(ŵ)‖` at the selected output.
    pub output_grad_norm: f64,
    pub total_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub k: usize,
    pub regret: f64,
    pub comparator_norm: f64,
    pub grad_norm_at_wbar: f64,
    pub f_end: f64,
    pub eta_start: f64,
    pub eta_min: f64,
    pub eta_mean: f64,
    pub eta_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub problem: String,
    pub optimizer: String,
    pub budget: usize,
    pub sigma: f64,
    /// Empty for checks over all seeds.
    pub seed: Option<u64>,
    pub name: String,
    pub episode: Option<usize>,
    pub iteration: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub satisfied: bool,
    pub note: String,
}

impl BoundRow {
    pub fn new(ctx: &SummaryRow, seed: Option<u64>, r: &BoundReport) -> Self {
        BoundRow {
            problem: ctx.problem.clone(),
            optimizer: ctx.optimizer.clone(),
            budget: ctx.budget,
            sigma: ctx.sigma,
            seed,
            name: r.name.clone(),
            episode: r.episode,
            iteration: r.iteration,
            lhs: r.lhs,
            rhs: r.rhs,
            slack: r.slack,
            satisfied: r.satisfied,
            note: r.note.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub axis: String,
    pub value: String,
    pub runs: usize,
    pub mean_grad_norm_mean: f64,
    pub mean_grad_norm_se: f64,
    pub output_grad_norm_mean: f64,
    pub output_grad_norm_se: f64,
    pub total_regret_mean: f64,
    pub total_regret_se: f64,
    /// Log-log slope of `mean_grad_norm_mean` against the budget, on budget
    /// sweeps.
    pub loglog_slope: Option<f64>,
}

pub fn episode_rows(r: &RunResult) -> Vec<EpisodeRow> {
    r.episodes
        .iter()
        .map(|e| EpisodeRow {
            k: e.k,
            regret: e.regret,
            comparator_norm: e.comparator.norm(),
            grad_norm_at_wbar: e.grad_norm_at_wbar,
            f_end: e.f_end,
            eta_start: e.eta_start,
            eta_min: e.eta_min,
            eta_mean: e.eta_mean,
            eta_max: e.eta_max,
        })
        .collect()
}

pub fn runs_dir(out: &Path) -> PathBuf {
    out.join("runs")
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `summary.csv` with its header even when there are no rows.
pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), CliError> {
    if rows.is_empty() {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(SUMMARY_COLUMNS)?;
        w.flush()?;
        return Ok(());
    }
    write_csv(path, rows)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text)?;
    Ok(())
}

pub fn read_run(path: &Path) -> Result<RunResult, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
