use std::collections::BTreeMap;
use std::path::Path;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::format::{csv_number, CsvTable, OutputEnvelope};
use super::{CliError, Format};
use crate::degree::{
    degree_coherent_closed_form, degree_of_state, degree_thermal_series, degree_twin_beam_exact,
    optimal_closed_form_is_exact, optimal_distribution, DegreeResult,
};
use crate::distributions::{mandel_q, twin_beam_squeezing_for_mean, PhotonDistribution, StateSpec};
use crate::qpsolve::{default_dim, solve_optimal, QpSolution};
use crate::Result;

pub fn cmd_degree(state: &StateSpec, purity: f64) -> Result<DegreeResult> {
    degree_of_state(state, purity)
}

pub(super) fn render_degree(
    result: &DegreeResult,
    params: BTreeMap<String, Value>,
    format: Format,
) -> String {
    match format {
        Format::Json => OutputEnvelope::new("degree", params, result).to_json(),
        Format::Csv => {
            let mut t =
                CsvTable::new(&["value", "method", "purity", "truncation_dim", "tail_bound"]);
            let method = serde_json::to_value(result.method)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            t.row(&[
                csv_number(result.value),
                method,
                csv_number(result.purity),
                result
                    .truncation_dim
                    .map(|d| d.to_string())
                    .unwrap_or_default(),
                csv_number(result.tail_bound),
            ]);
            t.finish()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimalMethod {
    /// Active-set QP solve.
    Qp,
    /// Parabolic closed form.
    Closed,
}

/// Parabolic closed form; `approximate` is set when `2 nbar` is not an
/// integer and the values were renormalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormOptimum {
    pub dist: PhotonDistribution,
    pub approximate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OptimalPayload {
    Qp { solution: QpSolution },
    Closed { optimum: ClosedFormOptimum },
}

impl OptimalPayload {
    pub fn probs(&self) -> &[f64] {
        match self {
            OptimalPayload::Qp { solution } => solution.dist.probs(),
            OptimalPayload::Closed { optimum } => optimum.dist.probs(),
        }
    }
}

pub fn cmd_optimal(nbar: f64, dim: Option<usize>, method: OptimalMethod) -> Result<OptimalPayload> {
    match method {
        OptimalMethod::Qp => {
            let dim = dim.unwrap_or_else(|| default_dim(nbar.max(0.0)));
            Ok(OptimalPayload::Qp {
                solution: solve_optimal(nbar, dim)?,
            })
        }
        OptimalMethod::Closed => Ok(OptimalPayload::Closed {
            optimum: ClosedFormOptimum {
                dist: optimal_distribution(nbar)?,
                approximate: !optimal_closed_form_is_exact(nbar),
            },
        }),
    }
}

pub(super) fn render_optimal(
    payload: &OptimalPayload,
    params: BTreeMap<String, Value>,
    format: Format,
) -> String {
    match format {
        Format::Json => OutputEnvelope::new("optimal", params, payload).to_json(),
        Format::Csv => {
            let mut t = CsvTable::new(&["N", "p"]);
            for (n, p) in payload.probs().iter().enumerate() {
                t.row(&[n.to_string(), csv_number(*p)]);
            }
            t.finish()
        }
    }
}

/// One grid point of a mean-photon-number sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub nbar: f64,
    pub degree_optimal: f64,
    pub degree_coherent: f64,
    pub degree_thermal: f64,
    pub degree_twin_exact: f64,
    /// Undefined (null) at `nbar = 0`.
    pub mandel_q_optimal: Option<f64>,
    pub support_size: usize,
}

const SWEEP_HEADER: [&str; 7] = [
    "nbar",
    "degree_optimal",
    "degree_coherent",
    "degree_thermal",
    "degree_twin_exact",
    "mandel_q_optimal",
    "support_size",
];

fn sweep_point(nbar: f64) -> Result<SweepRecord> {
    let solution = solve_optimal(nbar, default_dim(nbar))?;
    let mandel_q_optimal = if nbar > 0.0 {
        Some(mandel_q(&solution.dist)?)
    } else {
        None
    };
    Ok(SweepRecord {
        nbar,
        degree_optimal: solution.degree().value,
        degree_coherent: degree_coherent_closed_form(nbar)?.value,
        degree_thermal: degree_thermal_series(nbar)?.value,
        degree_twin_exact: degree_twin_beam_exact(twin_beam_squeezing_for_mean(nbar)?)?.value,
        mandel_q_optimal,
        support_size: solution.support_size(),
    })
}

/// Grid `start, start + step, ...` up to `end` inclusive (with a 1e-9
/// relative allowance on the last point).
pub fn sweep_grid(start: f64, end: f64, step: f64) -> std::result::Result<Vec<f64>, CliError> {
    if !(start.is_finite() && end.is_finite() && step.is_finite()) {
        return Err(CliError::Usage(
            "sweep bounds and step must be finite".into(),
        ));
    }
    if start < 0.0 || end < start || step <= 0.0 {
        return Err(CliError::Usage(format!(
            "need 0 <= start <= end and step > 0, got start={start} end={end} step={step}"
        )));
    }
    let count = ((end - start) / step * (1.0 + 1e-9)).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

pub fn cmd_sweep(
    start: f64,
    end: f64,
    step: f64,
) -> std::result::Result<Vec<SweepRecord>, CliError> {
    let grid = sweep_grid(start, end, step)?;
    let rows = grid
        .par_iter()
        .map(|&nbar| sweep_point(nbar))
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}

pub(super) fn render_sweep(
    rows: &[SweepRecord],
    params: BTreeMap<String, Value>,
    format: Format,
) -> String {
    match format {
        Format::Json => OutputEnvelope::new("sweep", params, rows).to_json(),
        Format::Csv => {
            let mut t = CsvTable::new(&SWEEP_HEADER);
            for r in rows {
                t.row(&[
                    csv_number(r.nbar),
                    csv_number(r.degree_optimal),
                    csv_number(r.degree_coherent),
                    csv_number(r.degree_thermal),
                    csv_number(r.degree_twin_exact),
                    r.mandel_q_optimal.map(csv_number).unwrap_or_default(),
                    r.support_size.to_string(),
                ]);
            }
            t.finish()
        }
    }
}

/// Truncation of the small-mean distribution table.
pub const FIG1_DIM: usize = 4;
/// Truncation of the integer-mean distribution table.
pub const FIG3_DIM: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiguresReport {
    pub files: Vec<FigureFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureFile {
    pub path: String,
    pub rows: usize,
}

/// `nbar = i/5` avoids accumulating the 0.2 step.
fn fifths(range: std::ops::RangeInclusive<u32>) -> Vec<f64> {
    range.map(|i| f64::from(i) / 5.0).collect()
}

fn distribution_table(grid: &[f64], dim: impl Fn(f64) -> usize + Sync) -> Result<(String, usize)> {
    let solutions = grid
        .par_iter()
        .map(|&nbar| solve_optimal(nbar, dim(nbar)))
        .collect::<Result<Vec<_>>>()?;
    let mut t = CsvTable::new(&["nbar", "N", "p"]);
    let mut rows = 0;
    for (nbar, s) in grid.iter().zip(&solutions) {
        for (n, p) in s.dist.probs().iter().enumerate() {
            t.row(&[csv_number(*nbar), n.to_string(), csv_number(*p)]);
            rows += 1;
        }
    }
    Ok((t.finish(), rows))
}

fn mandel_table(grid: &[f64]) -> Result<(String, usize)> {
    let qs = grid
        .par_iter()
        .map(|&nbar| mandel_q(&solve_optimal(nbar, default_dim(nbar))?.dist))
        .collect::<Result<Vec<_>>>()?;
    let mut t = CsvTable::new(&["nbar", "q"]);
    for (nbar, q) in grid.iter().zip(&qs) {
        t.row(&[csv_number(*nbar), csv_number(*q)]);
    }
    Ok((t.finish(), grid.len()))
}

/// Writes `fig1.csv` (nbar 0.2..1.0, D = 4), `fig2.csv` (Mandel Q for nbar
/// 0.2..9 step 0.2) and `fig3.csv` (integer nbar 1..9, D = 25) into `outdir`.
pub fn cmd_figures(outdir: &Path) -> std::result::Result<FiguresReport, CliError> {
    let tables = [
        (
            "fig1.csv",
            distribution_table(&fifths(1..=5), |_| FIG1_DIM)?,
        ),
        ("fig2.csv", mandel_table(&fifths(1..=45))?),
        (
            "fig3.csv",
            distribution_table(&(1..=9).map(f64::from).collect::<Vec<_>>(), |_| FIG3_DIM)?,
        ),
    ];
    let mut files = Vec::new();
    for (name, (text, rows)) in tables {
        let path = outdir.join(name);
        std::fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        files.push(FigureFile {
            path: path.display().to_string(),
            rows,
        });
    }
    Ok(FiguresReport { files })
}

pub(super) fn render_figures(
    report: &FiguresReport,
    params: BTreeMap<String, Value>,
    format: Format,
) -> String {
    match format {
        Format::Json => OutputEnvelope::new("figures", params, report).to_json(),
        Format::Csv => {
            let mut t = CsvTable::new(&["path", "rows"]);
            for f in &report.files {
                t.row(&[f.path.clone(), f.rows.to_string()]);
            }
            t.finish()
        }
    }
}
