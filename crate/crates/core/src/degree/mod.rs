//! Hilbert-Schmidt degree of polarization.
//!
//! For a state with purity `Tr(rho^2)` and total-photon-number distribution
//! `p_N`, the squared Hilbert-Schmidt distance to the closest unpolarized
//! state is
//!
//! ```text
//! P = Tr(rho^2) - sum_N p_N^2 / (N + 1)
//! ```
//!
//! [`hs_degree`] evaluates the series directly. The remaining functions give
//! the closed forms for the catalog states and for the optimal (parabolic)
//! distribution.

mod bessel;

use serde::{Deserialize, Serialize};

use crate::distributions::{compensated_sum, PhotonDistribution, StateSpec};
use crate::error::{domain, Result};

pub use bessel::{scaled_bessel_i1, SERIES_LIMIT as BESSEL_SERIES_LIMIT};

/// How a [`DegreeResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeMethod {
    Series,
    ClosedForm,
    FromQp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeResult {
    pub value: f64,
    pub method: DegreeMethod,
    pub purity: f64,
    /// Truncation of the distribution summed over; `None` for closed forms.
    pub truncation_dim: Option<usize>,
    /// Bound on the contribution of discarded photon numbers.
    pub tail_bound: f64,
}

impl DegreeResult {
    fn closed_form(value: f64) -> Self {
        Self {
            value,
            method: DegreeMethod::ClosedForm,
            purity: 1.0,
            truncation_dim: None,
            tail_bound: 0.0,
        }
    }
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(domain(format!(
            "{name} must be finite and non-negative, got {x}"
        )));
    }
    Ok(())
}

/// `sum_N p_N^2 / (N + 1)`, the purity of the closest unpolarized state.
pub fn unpolarized_overlap(probs: &[f64]) -> f64 {
    compensated_sum(
        probs
            .iter()
            .enumerate()
            .map(|(n, p)| p * p / (n + 1) as f64),
    )
}

/// Degree of polarization from the series over the stored probabilities.
///
/// The omitted terms `sum_{N>D} p_N^2/(N+1)` are at most `tail_bound^2`,
/// which is what the result reports as its own tail bound.
pub fn hs_degree(dist: &PhotonDistribution, purity: f64) -> Result<DegreeResult> {
    if !(purity > 0.0 && purity <= 1.0) {
        return Err(domain(format!("purity must lie in (0, 1], got {purity}")));
    }
    let overlap = unpolarized_overlap(dist.probs());
    let value = purity - overlap;
    if value < -1e-12 {
        return Err(domain(format!(
            "purity {purity} is below the unpolarized bound {overlap} for this distribution"
        )));
    }
    Ok(DegreeResult {
        value: value.max(0.0),
        method: DegreeMethod::Series,
        purity,
        truncation_dim: Some(dist.truncation_dim()),
        tail_bound: dist.tail_bound().powi(2),
    })
}

/// Every pure state confined to the `N`-photon manifold has `P = N/(N+1)`.
pub fn degree_pure_n_photon(n: usize) -> DegreeResult {
    DegreeResult::closed_form(n as f64 / (n as f64 + 1.0))
}

/// Quadrature coherent state: `P = 1 - e^{-2 nbar} I_1(2 nbar) / nbar`.
pub fn degree_coherent_closed_form(nbar: f64) -> Result<DegreeResult> {
    check_nonneg("nbar", nbar)?;
    if nbar == 0.0 {
        return Ok(DegreeResult::closed_form(0.0));
    }
    let value = 1.0 - scaled_bessel_i1(2.0 * nbar)? / nbar;
    Ok(DegreeResult::closed_form(value))
}

/// True when the parabolic closed form is an exact optimum, i.e. when
/// `2 nbar` is an integer.
pub fn optimal_closed_form_is_exact(nbar: f64) -> bool {
    let twice = 2.0 * nbar;
    (twice - twice.round()).abs() <= 1e-12 * twice.max(1.0)
}

/// The parabolic optimum
/// `p_N = 3 (N + 1)(2 nbar + 1 - N) / ((2 nbar + 1)(nbar + 1)(2 nbar + 3))`
/// on `N = 0..=ceil(2 nbar)`.
///
/// When `2 nbar` is an integer this is the exact QP optimum with unit mass
/// and mean `nbar`. Otherwise the clipped parabola is renormalized and its
/// declared mean is the mean it actually has; use [`crate::qpsolve`] for the
/// exact optimum in that case (see [`optimal_closed_form_is_exact`]).
pub fn optimal_distribution(nbar: f64) -> Result<PhotonDistribution> {
    check_nonneg("nbar", nbar)?;
    let exact = optimal_closed_form_is_exact(nbar);
    let nbar = if exact {
        (2.0 * nbar).round() / 2.0
    } else {
        nbar
    };
    let top = (2.0 * nbar).ceil() as usize;
    let denom = (2.0 * nbar + 1.0) * (nbar + 1.0) * (2.0 * nbar + 3.0);
    // (nbar+1)^2 - (N-nbar)^2 factors as (N+1)(2 nbar + 1 - N), which keeps
    // the symmetry p_{nbar+k} = p_{nbar-k} exact for integer nbar.
    let probs: Vec<f64> = (0..=top)
        .map(|n| {
            let n = n as f64;
            (3.0 * (n + 1.0) * (2.0 * nbar + 1.0 - n) / denom).max(0.0)
        })
        .collect();
    if exact {
        return PhotonDistribution::new(probs, nbar, 0.0, 0.0);
    }
    PhotonDistribution::from_probs_renormalized(probs)
}

/// `P_opt = 1 - 3 / ((2 nbar + 1)(2 nbar + 3))`.
pub fn degree_optimal_closed_form(nbar: f64) -> Result<DegreeResult> {
    check_nonneg("nbar", nbar)?;
    let value = 1.0 - 3.0 / ((2.0 * nbar + 1.0) * (2.0 * nbar + 3.0));
    Ok(DegreeResult::closed_form(value))
}

/// Beta(2,2) continuum limit of the optimum: `p(x) = (3/nbar) x (1 - x)`
/// with `x = N / (2 nbar)`. Zero outside `[0, 1]`; `nbar` must be positive.
pub fn beta22_density(x: f64, nbar: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    3.0 / nbar * x * (1.0 - x)
}

/// Degree for the geometric law `p_N = (1 - mu) mu^N`, `mu = nbar/(nbar+1)`:
/// `P = 1 + ((1 - mu)^2 / mu^2) ln(1 - mu^2)`.
pub fn degree_thermal_series(nbar: f64) -> Result<DegreeResult> {
    check_nonneg("nbar", nbar)?;
    if nbar == 0.0 {
        return Ok(DegreeResult::closed_form(0.0));
    }
    // (1-mu)/mu = 1/nbar and 1 - mu^2 = 1/(1 + y) with y = nbar^2/(2 nbar + 1).
    let y = nbar * nbar / (2.0 * nbar + 1.0);
    let overlap = if y < 1e-8 {
        (1.0 - y / 2.0 + y * y / 3.0) / (2.0 * nbar + 1.0)
    } else {
        y.ln_1p() / (nbar * nbar)
    };
    Ok(DegreeResult::closed_form(1.0 - overlap))
}

/// Degree for the exact twin-beam law (even photon numbers only):
/// `P = 1 - ((1 - lambda)^2 / lambda) artanh(lambda)`, `lambda = tanh^2 xi`.
pub fn degree_twin_beam_exact(xi: f64) -> Result<DegreeResult> {
    check_nonneg("xi", xi)?;
    if xi == 0.0 {
        return Ok(DegreeResult::closed_form(0.0));
    }
    let lambda = xi.tanh().powi(2);
    let one_minus = xi.cosh().powi(2).recip();
    let atanh_over_lambda = if lambda < 1e-4 {
        let l2 = lambda * lambda;
        1.0 + l2 / 3.0 + l2 * l2 / 5.0
    } else {
        // artanh(lambda) = (ln(1 + lambda) - ln(1 - lambda)) / 2
        let ln_cosh = xi + (-2.0 * xi).exp().ln_1p() - std::f64::consts::LN_2;
        0.5 * (lambda.ln_1p() + 2.0 * ln_cosh) / lambda
    };
    Ok(DegreeResult::closed_form(
        1.0 - one_minus * one_minus * atanh_over_lambda,
    ))
}

/// A value quoted without a derivation this crate can check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotedReference {
    pub value: f64,
    pub verified: bool,
}

/// Bures-distance degree of the twin beam, `1 - 1/nbar^2`, as quoted.
/// The normalization behind it is not known, so it is reported unverified.
pub fn bures_degree_twin_reference(nbar: f64) -> Result<QuotedReference> {
    if !(nbar.is_finite() && nbar > 0.0) {
        return Err(domain(format!("nbar must be positive, got {nbar}")));
    }
    Ok(QuotedReference {
        value: 1.0 - 1.0 / (nbar * nbar),
        verified: false,
    })
}

/// Degree of a catalog state.
///
/// Catalog states other than `Custom` are pure, so `purity` must be 1 for
/// them; `Custom` goes through [`hs_degree`] with the given purity.
pub fn degree_of_state(state: &StateSpec, purity: f64) -> Result<DegreeResult> {
    state.validate()?;
    if !matches!(state, StateSpec::Custom { .. }) && purity != 1.0 {
        return Err(domain(format!(
            "catalog states are pure; purity {purity} only applies to custom distributions"
        )));
    }
    match state {
        StateSpec::NPhotonPure { n, .. } | StateSpec::Su2Coherent { n, .. } => {
            Ok(degree_pure_n_photon(*n))
        }
        StateSpec::QuadratureCoherent { nbar } => degree_coherent_closed_form(*nbar),
        StateSpec::TwinBeam { xi } => degree_twin_beam_exact(*xi),
        StateSpec::ThermalTotal { nbar } => degree_thermal_series(*nbar),
        StateSpec::Custom { dist } => hs_degree(dist, purity),
    }
}
