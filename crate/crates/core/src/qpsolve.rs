//! Maximally polarized photon-number distribution at fixed mean.
//!
//! Maximizing the degree of polarization of a pure state with mean photon
//! number `nbar`, truncated to `N <= D`, is the convex quadratic program
//!
//! ```text
//! minimize    1/2 p^T H p,   H = 2 diag(1, 1/2, ..., 1/(D+1))
//! subject to  sum_N p_N = 1,  sum_N N p_N = nbar,  p >= 0.
//! ```
//!
//! With a diagonal Hessian and two equality rows, the equality-constrained
//! subproblem on any free set `F` has the closed-form solution
//! `p_N = (l0 + l1 N)(N + 1)/2` for `N` in `F`, where the multipliers solve a
//! 2x2 system. [`solve`] runs a primal active-set iteration over that
//! subproblem.

use serde::{Deserialize, Serialize};

use crate::degree::{DegreeMethod, DegreeResult};
use crate::distributions::{compensated_sum, PhotonDistribution};
use crate::error::{domain, Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QpProblem {
    nbar: f64,
    dim: usize,
    hessian_diag: Vec<f64>,
    constraint_matrix: [Vec<f64>; 2],
    rhs: [f64; 2],
}

impl QpProblem {
    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `h_N = 2/(N+1)`.
    pub fn hessian_diag(&self) -> &[f64] {
        &self.hessian_diag
    }

    /// Row 0 is all ones, row 1 is `N`.
    pub fn constraint_matrix(&self) -> &[Vec<f64>; 2] {
        &self.constraint_matrix
    }

    pub fn rhs(&self) -> [f64; 2] {
        self.rhs
    }
}

/// Builds the QP for mean `nbar` on photon numbers `0..=dim`.
pub fn build_problem(nbar: f64, dim: usize) -> Result<QpProblem> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(domain(format!(
            "nbar must be finite and non-negative, got {nbar}"
        )));
    }
    if nbar > dim as f64 {
        return Err(Error::Infeasible { nbar, dim });
    }
    Ok(QpProblem {
        nbar,
        dim,
        hessian_diag: (0..=dim).map(|n| 2.0 / (n + 1) as f64).collect(),
        constraint_matrix: [vec![1.0; dim + 1], (0..=dim).map(|n| n as f64).collect()],
        rhs: [1.0, nbar],
    })
}

/// Truncation used when the caller does not pick one: the optimum lives on
/// `0..=2 nbar + 1`, so a few extra levels leave it untouched.
pub fn default_dim(nbar: f64) -> usize {
    (2.0 * nbar).ceil() as usize + 4
}

/// Lagrange multipliers of the two equality constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    /// Multiplier of `sum p = 1`.
    pub normalization: f64,
    /// Multiplier of `sum N p = nbar`.
    pub mean: f64,
}

impl Multipliers {
    /// `l0 + l1 N`, the stationarity right-hand side `(A^T lambda)_N`.
    pub fn line(&self, n: usize) -> f64 {
        self.normalization + self.mean * n as f64
    }
}

/// Solves the equality-constrained subproblem with every index outside
/// `free_set` pinned at zero.
///
/// Returns `p` on the free set (in the order given, possibly with negative
/// entries) and the multipliers `lambda = (A H^-1 A^T)^-1 b` restricted to
/// the free set. Indices must be distinct and in range.
pub fn kkt_equality_solve(
    problem: &QpProblem,
    free_set: &[usize],
) -> Result<(Vec<f64>, Multipliers)> {
    if let Some(&bad) = free_set.iter().find(|&&n| n > problem.dim) {
        return Err(domain(format!(
            "free index {bad} exceeds dimension {}",
            problem.dim
        )));
    }
    let mut sorted = free_set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 2 || sorted.len() != free_set.len() {
        return Err(Error::DegenerateFreeSet { size: sorted.len() });
    }

    // Work in t = N - c to keep the 2x2 system well conditioned.
    let center = sorted.iter().sum::<usize>() as f64 / sorted.len() as f64;
    let weight = |n: usize| 0.5 * (n + 1) as f64;
    let s0 = compensated_sum(sorted.iter().map(|&n| weight(n)));
    let s1 = compensated_sum(sorted.iter().map(|&n| weight(n) * (n as f64 - center)));
    let s2 = compensated_sum(
        sorted
            .iter()
            .map(|&n| weight(n) * (n as f64 - center).powi(2)),
    );
    let det = s0 * s2 - s1 * s1;
    if det <= 1e-14 * s0 * s2 {
        return Err(Error::DegenerateFreeSet { size: sorted.len() });
    }
    let target = problem.nbar - center;
    let alpha = (s2 - s1 * target) / det;
    let beta = (s0 * target - s1) / det;

    let p = free_set
        .iter()
        .map(|&n| weight(n) * (alpha + beta * (n as f64 - center)))
        .collect();
    Ok((
        p,
        Multipliers {
            normalization: alpha - beta * center,
            mean: beta,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// Defaults to `10 (D + 1)`.
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: None,
        }
    }
}

/// KKT residuals of a candidate point, all as non-negative violations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `||A p - b||_inf`.
    pub primal_eq: f64,
    /// `max(0, -min_N p_N)`.
    pub nonnegativity: f64,
    /// `||H p - A^T lambda - mu||_inf` with `mu` zero on the free set.
    pub stationarity: f64,
    /// `max(0, -min mu_N)` over the active set.
    pub dual_feasibility: f64,
    /// `max |p_N mu_N|`.
    pub complementarity: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Recomputes the KKT residuals of `(probs, multipliers)`.
///
/// Indices with `p_N > tol` are treated as free (`mu_N = 0`); the rest are
/// active with bound multiplier `mu_N = -(l0 + l1 N)`.
pub fn verify_kkt(
    problem: &QpProblem,
    probs: &[f64],
    multipliers: Multipliers,
    tol: f64,
) -> KktReport {
    let p = |n: usize| probs.get(n).copied().unwrap_or(0.0);
    let range = 0..=problem.dim;
    let mass = compensated_sum(range.clone().map(p));
    let mean = compensated_sum(range.clone().map(|n| n as f64 * p(n)));
    let primal_eq = (mass - 1.0).abs().max((mean - problem.nbar).abs());
    let mut nonnegativity = 0.0_f64;
    let mut stationarity = 0.0_f64;
    let mut dual_feasibility = 0.0_f64;
    let mut complementarity = 0.0_f64;

    for n in range {
        let pn = p(n);
        let hp = problem.hessian_diag[n] * pn;
        let line = multipliers.line(n);
        nonnegativity = nonnegativity.max(-pn);
        if pn > tol {
            stationarity = stationarity.max((hp - line).abs());
        } else {
            let mu = -line;
            stationarity = stationarity.max(hp.abs());
            dual_feasibility = dual_feasibility.max(-mu);
            complementarity = complementarity.max((pn * mu).abs());
        }
    }
    // Indices beyond the problem dimension must carry no mass.
    if probs.len() > problem.dim + 1 {
        let stray = probs[problem.dim + 1..]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        nonnegativity = nonnegativity.max(stray);
    }

    let passed = [
        primal_eq,
        nonnegativity,
        stationarity,
        dual_feasibility,
        complementarity,
    ]
    .iter()
    .all(|r| *r <= tol);
    KktReport {
        primal_eq,
        nonnegativity,
        stationarity,
        dual_feasibility,
        complementarity,
        tol,
        passed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub dist: PhotonDistribution,
    pub multipliers: Multipliers,
    /// Indices pinned at `p_N = 0`, ascending.
    pub active_set: Vec<usize>,
    /// `1/2 p^T H p = sum p_N^2/(N+1)`.
    pub objective: f64,
    pub kkt_residuals: KktReport,
    pub iterations: usize,
    pub tol: f64,
}

impl QpSolution {
    /// Number of photon numbers carrying probability above the solver tolerance.
    pub fn support_size(&self) -> usize {
        support_size(self)
    }

    /// Degree of polarization of the optimum (a pure state): `1 - objective`.
    pub fn degree(&self) -> DegreeResult {
        DegreeResult {
            value: 1.0 - self.objective,
            method: DegreeMethod::FromQp,
            purity: 1.0,
            truncation_dim: Some(self.dist.truncation_dim()),
            tail_bound: 0.0,
        }
    }
}

pub fn support_size(solution: &QpSolution) -> usize {
    solution
        .dist
        .probs()
        .iter()
        .filter(|&&p| p > solution.tol)
        .count()
}

/// Index of the most negative value below `-tol`, smallest index on ties.
fn most_negative(values: impl Iterator<Item = (usize, f64)>, tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (n, v) in values {
        if v < -tol && best.is_none_or(|(_, b)| v < b) {
            best = Some((n, v));
        }
    }
    best.map(|(n, _)| n)
}

/// Solves the QP by a primal active-set method.
///
/// The free set starts as `0..=min(D, ceil(2 nbar) + 1)`. Each iteration
/// solves the equality subproblem on the free set; the most negative free
/// component is pinned to zero, or, if none is negative, the most negative
/// bound multiplier `mu_N = -(l0 + l1 N)` on the active set is released.
/// Ties go to the smallest index. Components within `tol` of zero are
/// clamped to exactly zero and the multipliers recomputed on the final
/// support.
pub fn solve(problem: &QpProblem, options: &SolverOptions) -> Result<QpSolution> {
    let tol = options.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let dim = problem.dim;
    let nbar = problem.nbar;

    // Single feasible point: the KKT system on one index is singular, so
    // return the vertex with multipliers that make it stationary and dual
    // feasible.
    if nbar == 0.0 || nbar == dim as f64 {
        let vertex = if nbar == 0.0 { 0 } else { dim };
        let multipliers = if vertex == 0 {
            Multipliers {
                normalization: 2.0,
                mean: -2.0,
            }
        } else {
            let slope = 2.0 / (dim + 1) as f64;
            Multipliers {
                normalization: -slope * (dim as f64 - 1.0),
                mean: slope,
            }
        };
        let mut probs = vec![0.0; dim + 1];
        probs[vertex] = 1.0;
        return finish(problem, probs, multipliers, 0, tol);
    }

    let max_iter = options.max_iter.unwrap_or(10 * (dim + 1));
    let window_top = dim.min((2.0 * nbar).ceil() as usize + 1);
    let mut free: Vec<bool> = (0..=dim).map(|n| n <= window_top).collect();
    let mut tried_full = window_top == dim;

    let mut iterations = 0;
    let (free_idx, p_free, multipliers) = loop {
        if iterations >= max_iter {
            return Err(Error::NonConvergence { iterations });
        }
        iterations += 1;

        let free_idx: Vec<usize> = (0..=dim).filter(|&n| free[n]).collect();
        let (p_free, multipliers) = match kkt_equality_solve(problem, &free_idx) {
            Ok(sol) => sol,
            Err(Error::DegenerateFreeSet { .. }) if !tried_full => {
                free.iter_mut().for_each(|f| *f = true);
                tried_full = true;
                continue;
            }
            Err(e) => return Err(e),
        };

        if let Some(n) = most_negative(free_idx.iter().copied().zip(p_free.iter().copied()), tol) {
            free[n] = false;
            continue;
        }
        let bound_mu = (0..=dim)
            .filter(|&n| !free[n])
            .map(|n| (n, -multipliers.line(n)));
        if let Some(n) = most_negative(bound_mu, tol) {
            free[n] = true;
            continue;
        }
        break (free_idx, p_free, multipliers);
    };

    // Drop components that are zero to within tol and re-solve on the
    // strict support, so the clamped point satisfies Ap = b exactly.
    let support: Vec<usize> = free_idx
        .iter()
        .zip(&p_free)
        .filter(|(_, &p)| p > tol)
        .map(|(&n, _)| n)
        .collect();
    let (values, multipliers) = if support.len() >= 2 && support.len() < free_idx.len() {
        let (p, m) = kkt_equality_solve(problem, &support)?;
        (support.iter().copied().zip(p).collect::<Vec<_>>(), m)
    } else {
        (free_idx.into_iter().zip(p_free).collect(), multipliers)
    };

    let mut probs = vec![0.0; dim + 1];
    for (n, p) in values {
        probs[n] = if p.abs() <= tol { 0.0 } else { p };
    }
    finish(problem, probs, multipliers, iterations, tol)
}

fn finish(
    problem: &QpProblem,
    probs: Vec<f64>,
    multipliers: Multipliers,
    iterations: usize,
    tol: f64,
) -> Result<QpSolution> {
    let objective = 0.5
        * compensated_sum(
            probs
                .iter()
                .zip(problem.hessian_diag())
                .map(|(p, h)| h * p * p),
        );
    let kkt_residuals = verify_kkt(problem, &probs, multipliers, tol);
    let active_set = (0..probs.len()).filter(|&n| probs[n] == 0.0).collect();
    let dist = PhotonDistribution::new(probs, problem.nbar, 0.0, 0.0)?;
    Ok(QpSolution {
        dist,
        multipliers,
        active_set,
        objective,
        kkt_residuals,
        iterations,
        tol,
    })
}

/// Builds and solves the problem for `nbar` on `0..=dim` with default options.
pub fn solve_optimal(nbar: f64, dim: usize) -> Result<QpSolution> {
    solve(&build_problem(nbar, dim)?, &SolverOptions::default())
}
