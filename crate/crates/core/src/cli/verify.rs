//! Self-checks behind `polmax verify`.
//!
//! Each check compares the solver or a series evaluation against something
//! computed along a different path: a closed form, the Mandel Q line of the
//! parabolic optimum, or exhaustive search over a grid of the feasible set.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::format::{csv_number, CsvTable, OutputEnvelope};
use super::Format;
use crate::degree::{
    degree_coherent_closed_form, degree_optimal_closed_form, degree_thermal_series,
    degree_twin_beam_exact, hs_degree, optimal_distribution,
};
use crate::distributions::{
    certified_dim_poisson, certified_dim_thermal, certified_dim_twin_beam, mandel_q,
    poisson_distribution, thermal_distribution, twin_beam_distribution,
};
use crate::qpsolve::{default_dim, solve_optimal, KktReport, DEFAULT_TOL};

pub const DEFAULT_SEED: u64 = 20_070_322;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Largest observed deviation (or, for the support check, mismatches).
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktInstance {
    pub nbar: f64,
    pub dim: usize,
    /// `None` when the solver returned an error.
    pub residuals: Option<KktReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub kkt_instances: Vec<KktInstance>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failed_checks(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

fn outcome(name: &str, worst: f64, tolerance: f64, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed: worst <= tolerance,
        worst,
        tolerance,
        detail,
    }
}

/// Largest deviation over `items`, with a failure (infinite deviation) for
/// any item whose evaluation errors.
fn worst_of<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> crate::Result<f64>) -> f64 {
    items
        .into_iter()
        .map(|x| f(x).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// `count` random instances with `D` uniform on `2..=100` and `nbar`
/// uniform on `(0, D/2)`.
pub fn random_instances(seed: u64, count: usize) -> Vec<(f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dim: usize = rng.gen_range(2..=100);
            let mut nbar = 0.0;
            while nbar == 0.0 {
                nbar = rng.gen_range(0.0..dim as f64 / 2.0);
            }
            (nbar, dim)
        })
        .collect()
}

fn kkt_audit(seed: u64, count: usize) -> (Vec<CheckOutcome>, Vec<KktInstance>) {
    let instances: Vec<KktInstance> = random_instances(seed, count)
        .into_iter()
        .map(|(nbar, dim)| KktInstance {
            nbar,
            dim,
            residuals: solve_optimal(nbar, dim).ok().map(|s| s.kkt_residuals),
        })
        .collect();
    let field = |pick: fn(&KktReport) -> f64| {
        instances
            .iter()
            .map(|i| i.residuals.as_ref().map_or(f64::INFINITY, pick))
            .fold(0.0, f64::max)
    };
    let detail = format!("{count} random instances, seed {seed}");
    let checks = vec![
        outcome(
            "kkt_primal_eq",
            field(|r| r.primal_eq.max(r.nonnegativity)),
            DEFAULT_TOL,
            detail.clone(),
        ),
        outcome(
            "kkt_stationarity",
            field(|r| r.stationarity),
            DEFAULT_TOL,
            detail.clone(),
        ),
        outcome(
            "kkt_dual_feasibility",
            field(|r| r.dual_feasibility),
            DEFAULT_TOL,
            detail.clone(),
        ),
        outcome(
            "kkt_complementarity",
            field(|r| r.complementarity),
            DEFAULT_TOL,
            detail,
        ),
    ];
    (checks, instances)
}

/// Minimum of `sum p_N^2/(N+1)` over the feasible points of the grid
/// `p_N = k_N / steps` on `0..=4`; `None` if no grid point has mean `nbar`.
pub fn grid_minimum_d4(nbar: f64, steps: u32) -> Option<f64> {
    let target = nbar * f64::from(steps);
    let target_k = target.round() as i64;
    if (target - target_k as f64).abs() > 1e-9 {
        return None;
    }
    let steps = i64::from(steps);
    let mut best: Option<f64> = None;
    for k4 in 0..=steps {
        for k3 in 0..=steps - k4 {
            for k2 in 0..=steps - k4 - k3 {
                let k1 = target_k - 2 * k2 - 3 * k3 - 4 * k4;
                let k0 = steps - k1 - k2 - k3 - k4;
                if k1 < 0 || k0 < 0 {
                    continue;
                }
                let s = steps as f64;
                let obj = [k0, k1, k2, k3, k4]
                    .iter()
                    .enumerate()
                    .map(|(n, &k)| (k as f64 / s).powi(2) / (n + 1) as f64)
                    .sum::<f64>();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    }
    best
}

pub fn run_verify(seed: u64, instances: usize) -> VerifyReport {
    let (mut checks, kkt_instances) = kkt_audit(seed, instances);

    checks.push(outcome(
        "qp_matches_parabola",
        worst_of(1..=9, |m| {
            let qp = solve_optimal(f64::from(m), 25)?;
            let closed = optimal_distribution(f64::from(m))?;
            Ok((0..=25)
                .map(|n| (qp.dist.prob(n) - closed.prob(n)).abs())
                .fold(0.0, f64::max))
        }),
        1e-8,
        "integer nbar 1..9, D = 25".into(),
    ));

    checks.push(outcome(
        "qp_degree_closed_form",
        worst_of(0..=20, |m| {
            let m = f64::from(m);
            let qp = solve_optimal(m, default_dim(m))?;
            Ok((qp.degree().value - degree_optimal_closed_form(m)?.value).abs())
        }),
        1e-10,
        "integer nbar 0..20".into(),
    ));

    checks.push(outcome(
        "mandel_q_line",
        worst_of(1..=18, |i| {
            let nbar = f64::from(i) / 2.0;
            let q = mandel_q(&solve_optimal(nbar, default_dim(nbar))?.dist)?;
            Ok((q - (nbar - 3.0) / 5.0).abs())
        }),
        1e-9,
        "half-integer nbar 0.5..9, Q = (nbar - 3)/5".into(),
    ));

    let mismatches = (1..=9)
        .filter(|&m| {
            solve_optimal(f64::from(m), 25).map_or(true, |s| s.support_size() != 2 * m as usize + 1)
        })
        .count();
    checks.push(outcome(
        "support_size_law",
        mismatches as f64,
        0.0,
        "integer nbar 1..9: support = 2 nbar + 1".into(),
    ));

    checks.push(outcome(
        "coherent_series_vs_bessel",
        worst_of([0.5, 1.0, 5.0, 10.0], |nbar| {
            let d = poisson_distribution(nbar, certified_dim_poisson(nbar, 1e-12)?)?;
            Ok((hs_degree(&d, 1.0)?.value - degree_coherent_closed_form(nbar)?.value).abs())
        }),
        1e-10,
        "nbar in {0.5, 1, 5, 10}".into(),
    ));

    checks.push(outcome(
        "thermal_series_vs_closed_form",
        worst_of([0.5, 1.0, 5.0, 10.0], |nbar| {
            let d = thermal_distribution(nbar, certified_dim_thermal(nbar, 1e-12)?)?;
            Ok((hs_degree(&d, 1.0)?.value - degree_thermal_series(nbar)?.value).abs())
        }),
        1e-9,
        "nbar in {0.5, 1, 5, 10}".into(),
    ));

    checks.push(outcome(
        "twin_beam_series_vs_closed_form",
        worst_of([0.3, 0.8, 1.5, 2.2], |xi| {
            let d = twin_beam_distribution(xi, certified_dim_twin_beam(xi, 1e-12)?)?;
            Ok((hs_degree(&d, 1.0)?.value - degree_twin_beam_exact(xi)?.value).abs())
        }),
        1e-9,
        "xi in {0.3, 0.8, 1.5, 2.2}".into(),
    ));

    checks.push(outcome(
        "grid_search_optimality",
        worst_of([0.2, 0.5, 1.0], |nbar| {
            let qp = solve_optimal(nbar, 4)?;
            let grid = grid_minimum_d4(nbar, 100).unwrap_or(f64::NEG_INFINITY);
            Ok((qp.objective - grid).max(0.0))
        }),
        1e-12,
        "D = 4, step 0.01 simplex grid, nbar in {0.2, 0.5, 1}".into(),
    ));

    let passed = checks.iter().all(|c| c.passed);
    VerifyReport {
        seed,
        checks,
        kkt_instances,
        passed,
    }
}

pub(super) fn render(
    report: &VerifyReport,
    params: BTreeMap<String, Value>,
    format: Format,
) -> String {
    match format {
        Format::Json => OutputEnvelope::new("verify", params, report).to_json(),
        Format::Csv => {
            let mut t = CsvTable::new(&["check", "passed", "worst", "tolerance"]);
            for c in &report.checks {
                t.row(&[
                    c.name.clone(),
                    c.passed.to_string(),
                    csv_number(c.worst),
                    csv_number(c.tolerance),
                ]);
            }
            t.finish()
        }
    }
}
