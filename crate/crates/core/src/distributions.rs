//! Truncated two-mode photon-number distributions.
//!
//! A [`PhotonDistribution`] stores `p_0..=p_D` for the *total* photon number
//! `N = n_H + n_V`, the mean the distribution is meant to have, and certified
//! upper bounds on the probability mass and first moment discarded beyond
//! `D`. Constructors never form raw factorials; probabilities come from
//! multiplicative recurrences anchored in log space so that they stay finite
//! for mean photon numbers up to `1e4` and beyond.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};

/// Floor on the normalization check when the tail bound is smaller.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Floor on the mean check when the tail bounds are smaller.
pub const MEAN_TOLERANCE: f64 = 1e-9;
/// Custom distributions further than this from unit mass are rejected.
pub const CUSTOM_RENORM_TOLERANCE: f64 = 1e-9;
/// Default discarded mass targeted by the `certified_dim_*` helpers.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

/// Inflates an exactly computed tail so it bounds the rounding error of the
/// retained sum as well.
fn certify(tail: f64, scale: f64) -> f64 {
    tail * (1.0 + 1e-12) + 8.0 * f64::EPSILON * scale.max(1.0)
}

/// Neumaier compensated summation.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(domain(format!(
            "{name} must be finite and non-negative, got {x}"
        )));
    }
    Ok(())
}

/// Truncated total-photon-number distribution `p_0..=p_D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    truncation_dim: usize,
    declared_mean: f64,
    /// Upper bound on `sum_{N > D} p_N`.
    tail_bound: f64,
    /// Upper bound on `sum_{N > D} N p_N`.
    tail_mean_bound: f64,
}

#[derive(Deserialize)]
struct RawDistribution {
    probs: Vec<f64>,
    truncation_dim: usize,
    declared_mean: f64,
    tail_bound: f64,
    tail_mean_bound: f64,
}

impl TryFrom<RawDistribution> for PhotonDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        if raw.probs.len() != raw.truncation_dim + 1 {
            return Err(Error::InvalidDistribution(format!(
                "truncation_dim {} does not match {} probabilities",
                raw.truncation_dim,
                raw.probs.len()
            )));
        }
        Self::new(
            raw.probs,
            raw.declared_mean,
            raw.tail_bound,
            raw.tail_mean_bound,
        )
    }
}

impl PhotonDistribution {
    /// Builds a distribution after checking every invariant:
    ///
    /// - each `p_N >= 0`,
    /// - `|sum p - 1| <= max(tail_bound, 1e-12)`,
    /// - `|sum N p - declared_mean| <= max(D * tail_bound, tail_mean_bound, 1e-9)`.
    pub fn new(
        probs: Vec<f64>,
        declared_mean: f64,
        tail_bound: f64,
        tail_mean_bound: f64,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidDistribution(msg));
        if probs.is_empty() {
            return invalid("empty probability vector".into());
        }
        if let Some((n, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return invalid(format!("p[{n}] = {p} is not a finite non-negative number"));
        }
        for (name, v) in [
            ("declared_mean", declared_mean),
            ("tail_bound", tail_bound),
            ("tail_mean_bound", tail_mean_bound),
        ] {
            if !v.is_finite() || v < 0.0 {
                return invalid(format!("{name} = {v} is not a finite non-negative number"));
            }
        }

        let dim = probs.len() - 1;
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > tail_bound.max(NORM_TOLERANCE) {
            return invalid(format!(
                "probabilities sum to {total}, outside the tail bound {tail_bound}"
            ));
        }
        let mean = compensated_sum(probs.iter().enumerate().map(|(n, p)| n as f64 * p));
        let mean_tol = (dim as f64 * tail_bound)
            .max(tail_mean_bound)
            .max(MEAN_TOLERANCE);
        if (mean - declared_mean).abs() > mean_tol {
            return invalid(format!(
                "mean {mean} differs from declared mean {declared_mean} by more than {mean_tol}"
            ));
        }

        Ok(Self {
            probs,
            truncation_dim: dim,
            declared_mean,
            tail_bound,
            tail_mean_bound,
        })
    }

    /// A caller-supplied distribution with no discarded tail.
    ///
    /// Inputs within `1e-9` of unit mass are renormalized; anything further
    /// off is rejected.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution(
                "empty probability vector".into(),
            ));
        }
        if let Some((n, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "p[{n}] = {p} is not a finite non-negative number"
            )));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > CUSTOM_RENORM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}; refusing to renormalize beyond {CUSTOM_RENORM_TOLERANCE}"
            )));
        }
        let probs: Vec<f64> = probs.into_iter().map(|p| p / total).collect();
        let mean = compensated_sum(probs.iter().enumerate().map(|(n, p)| n as f64 * p));
        Self::new(probs, mean, 0.0, 0.0)
    }

    /// Rescales to unit mass whatever the current total; the declared mean is
    /// the resulting mean.
    pub(crate) fn from_probs_renormalized(probs: Vec<f64>) -> Result<Self> {
        let total = compensated_sum(probs.iter().copied());
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidDistribution("no probability mass".into()));
        }
        Self::from_probs(probs.into_iter().map(|p| p / total).collect())
    }

    /// All probability on the `N`-photon manifold.
    pub fn delta(n: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        Self {
            probs,
            truncation_dim: n,
            declared_mean: n as f64,
            tail_bound: 0.0,
            tail_mean_bound: 0.0,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn truncation_dim(&self) -> usize {
        self.truncation_dim
    }

    pub fn declared_mean(&self) -> f64 {
        self.declared_mean
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn tail_mean_bound(&self) -> f64 {
        self.tail_mean_bound
    }

    /// `p_N`, zero beyond the truncation.
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

/// Catalog of two-mode states whose photon statistics are known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum StateSpec {
    /// Pure state in the `N`-photon manifold, e.g. `|N, k>`.
    NPhotonPure {
        n: usize,
        k: usize,
    },
    /// SU(2) coherent state `|N, theta, phi>`.
    Su2Coherent {
        n: usize,
        theta: f64,
        phi: f64,
    },
    /// Both modes in Glauber coherent states with total mean `nbar`.
    QuadratureCoherent {
        nbar: f64,
    },
    /// Two-mode squeezed vacuum with squeezing `xi`.
    TwinBeam {
        xi: f64,
    },
    /// Geometric law on the total photon number.
    ThermalTotal {
        nbar: f64,
    },
    Custom {
        dist: PhotonDistribution,
    },
}

impl StateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::NPhotonPure { n, k } if k > n => {
                Err(domain(format!("k = {k} must lie in 0..={n}")))
            }
            StateSpec::NPhotonPure { .. } => Ok(()),
            StateSpec::Su2Coherent { theta, phi, .. } => {
                check_theta(theta)?;
                if !phi.is_finite() || !(0.0..2.0 * std::f64::consts::PI).contains(&phi) {
                    return Err(domain(format!("phi = {phi} must lie in [0, 2pi)")));
                }
                Ok(())
            }
            StateSpec::QuadratureCoherent { nbar } | StateSpec::ThermalTotal { nbar } => {
                check_nonneg("nbar", nbar)
            }
            StateSpec::TwinBeam { xi } => check_nonneg("xi", xi),
            StateSpec::Custom { .. } => Ok(()),
        }
    }

    pub fn mean_photon_number(&self) -> f64 {
        match self {
            StateSpec::NPhotonPure { n, .. } | StateSpec::Su2Coherent { n, .. } => *n as f64,
            StateSpec::QuadratureCoherent { nbar } | StateSpec::ThermalTotal { nbar } => *nbar,
            StateSpec::TwinBeam { xi } => twin_beam_mean(*xi),
            StateSpec::Custom { dist } => dist.declared_mean(),
        }
    }

    /// Photon-number distribution, truncated so the discarded mass is below
    /// `tail_eps`.
    pub fn distribution(&self, tail_eps: f64) -> Result<PhotonDistribution> {
        self.validate()?;
        match self {
            StateSpec::NPhotonPure { n, .. } | StateSpec::Su2Coherent { n, .. } => {
                Ok(PhotonDistribution::delta(*n))
            }
            StateSpec::QuadratureCoherent { nbar } => {
                poisson_distribution(*nbar, certified_dim_poisson(*nbar, tail_eps)?)
            }
            StateSpec::ThermalTotal { nbar } => {
                thermal_distribution(*nbar, certified_dim_thermal(*nbar, tail_eps)?)
            }
            StateSpec::TwinBeam { xi } => {
                twin_beam_distribution(*xi, certified_dim_twin_beam(*xi, tail_eps)?)
            }
            StateSpec::Custom { dist } => Ok(dist.clone()),
        }
    }
}

fn vacuum(dim: usize) -> PhotonDistribution {
    let mut probs = vec![0.0; dim + 1];
    probs[0] = 1.0;
    PhotonDistribution {
        probs,
        truncation_dim: dim,
        declared_mean: 0.0,
        tail_bound: 0.0,
        tail_mean_bound: 0.0,
    }
}

/// Poisson law `e^{-nbar} nbar^N / N!` on `0..=dim`.
pub fn poisson_distribution(nbar: f64, dim: usize) -> Result<PhotonDistribution> {
    check_nonneg("nbar", nbar)?;
    if nbar == 0.0 {
        return Ok(vacuum(dim));
    }

    // Anchor at the mode (or at `dim` when the mode lies beyond it) and walk
    // outwards with the ratio p_{N+1}/p_N = nbar/(N+1).
    let mode = nbar.floor() as usize;
    let anchor = mode.min(dim);
    let ln_anchor = ln_poisson_pmf(nbar, anchor);
    let mut probs = vec![0.0; dim + 1];
    probs[anchor] = ln_anchor.exp();
    for n in (0..anchor).rev() {
        probs[n] = probs[n + 1] * (n + 1) as f64 / nbar;
    }
    for n in anchor + 1..=dim {
        probs[n] = probs[n - 1] * nbar / n as f64;
    }

    let (tail, tail_mean) = if (dim as f64) <= nbar {
        // Most of the mass is discarded; the complement is accurate here.
        let kept = compensated_sum(probs.iter().copied());
        let kept_mean = compensated_sum(probs.iter().enumerate().map(|(n, p)| n as f64 * p));
        ((1.0 - kept).max(0.0), (nbar - kept_mean).max(0.0))
    } else {
        poisson_forward_tail(nbar, dim, probs[dim])
    };

    PhotonDistribution::new(probs, nbar, certify(tail, 1.0), certify(tail_mean, nbar))
}

/// `ln(e^{-nbar} nbar^m / m!)` without the cancellation between
/// `m ln nbar` and `ln m!` that costs accuracy at large `m`.
fn ln_poisson_pmf(nbar: f64, m: usize) -> f64 {
    if m == 0 {
        return -nbar;
    }
    if m < 10 {
        return -nbar + m as f64 * nbar.ln() - ln_gamma(m as f64 + 1.0);
    }
    let mf = m as f64;
    let inv = mf.recip();
    let inv2 = inv * inv;
    // ln m! - (m ln m - m + ln(2 pi m)/2)
    let stirling = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2
                        * (1.0 / 1260.0
                            - inv2
                                * (1.0 / 1680.0
                                    - inv2
                                        * (1.0 / 1188.0
                                            - inv2 * (691.0 / 360360.0 - inv2 / 156.0))))));
    let excess = nbar - mf;
    -excess + mf * (excess / mf).ln_1p() - 0.5 * (2.0 * std::f64::consts::PI * mf).ln() - stirling
}

/// Sums `p_N` and `N p_N` for `N > dim`, starting from `p_dim`, with a
/// geometric bound on the remainder once the ratio drops below 1/2.
fn poisson_forward_tail(nbar: f64, dim: usize, p_dim: f64) -> (f64, f64) {
    let mut p = p_dim;
    let mut n = dim;
    let mut tail = Vec::new();
    let mut tail_mean = Vec::new();
    loop {
        n += 1;
        p *= nbar / n as f64;
        if p == 0.0 {
            break;
        }
        tail.push(p);
        tail_mean.push(n as f64 * p);
        let ratio = nbar / (n + 1) as f64;
        if ratio <= 0.5 {
            // Remaining terms are dominated by p r^j; N p_N by p (n+j) r^j.
            let rest = p * ratio / (1.0 - ratio);
            let rest_mean = p * ratio * ((n + 1) as f64 + ratio / (1.0 - ratio)) / (1.0 - ratio);
            let sum = compensated_sum(tail.iter().copied());
            if rest <= f64::EPSILON * sum || rest < f64::MIN_POSITIVE {
                tail.push(rest);
                tail_mean.push(rest_mean);
                break;
            }
        }
    }
    (compensated_sum(tail), compensated_sum(tail_mean))
}

/// Geometric (thermal) law `(1/(nbar+1)) (nbar/(nbar+1))^N` on `0..=dim`.
pub fn thermal_distribution(nbar: f64, dim: usize) -> Result<PhotonDistribution> {
    check_nonneg("nbar", nbar)?;
    if nbar == 0.0 {
        return Ok(vacuum(dim));
    }
    let ln_ratio = -(1.0 / nbar).ln_1p();
    let ln_first = -nbar.ln_1p();
    let probs: Vec<f64> = (0..=dim)
        .map(|n| (ln_first + n as f64 * ln_ratio).exp())
        .collect();
    let tail = ((dim + 1) as f64 * ln_ratio).exp();
    let tail_mean = tail * ((dim + 1) as f64 + nbar);
    PhotonDistribution::new(probs, nbar, certify(tail, 1.0), certify(tail_mean, nbar))
}

/// Mean total photon number `2 sinh^2(xi)` of the twin-beam state.
pub fn twin_beam_mean(xi: f64) -> f64 {
    2.0 * xi.sinh().powi(2)
}

/// Squeezing parameter giving a twin beam of mean `nbar`.
pub fn twin_beam_squeezing_for_mean(nbar: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    Ok((nbar / 2.0).sqrt().asinh())
}

/// `ln(tanh^2 xi)` and `ln(1 - tanh^2 xi)`, stable for large `xi`.
fn twin_beam_logs(xi: f64) -> (f64, f64) {
    let e = (-2.0 * xi).exp();
    let ln_lambda = 2.0 * ((-e).ln_1p() - e.ln_1p());
    let ln_cosh = xi + e.ln_1p() - std::f64::consts::LN_2;
    (ln_lambda, -2.0 * ln_cosh)
}

/// Exact total-photon law of the twin beam: `p_{2n} = (1 - lambda) lambda^n`
/// with `lambda = tanh^2 xi`, and zero on odd `N`.
pub fn twin_beam_distribution(xi: f64, dim: usize) -> Result<PhotonDistribution> {
    check_nonneg("xi", xi)?;
    if xi == 0.0 {
        return Ok(vacuum(dim));
    }
    let (ln_lambda, ln_one_minus) = twin_beam_logs(xi);
    let probs: Vec<f64> = (0..=dim)
        .map(|n| {
            if n % 2 == 1 {
                0.0
            } else {
                (ln_one_minus + (n / 2) as f64 * ln_lambda).exp()
            }
        })
        .collect();
    let nbar = twin_beam_mean(xi);
    if !nbar.is_finite() {
        return Err(domain(format!(
            "xi = {xi} gives an unrepresentable mean photon number"
        )));
    }
    let first_dropped = dim / 2 + 1;
    let tail = (first_dropped as f64 * ln_lambda).exp();
    let tail_mean = tail * (2.0 * first_dropped as f64 + nbar);
    PhotonDistribution::new(probs, nbar, certify(tail, 1.0), certify(tail_mean, nbar))
}

/// Smallest `D` whose Chernoff bound `e^{-nbar} (e nbar / k)^k` on
/// `P(N >= k = D + 1)` falls below `eps`.
pub fn certified_dim_poisson(nbar: f64, eps: f64) -> Result<usize> {
    check_nonneg("nbar", nbar)?;
    check_eps(eps)?;
    if nbar == 0.0 {
        return Ok(0);
    }
    let ln_eps = eps.ln();
    let mut k = nbar.floor() as usize + 1;
    loop {
        let kf = k as f64;
        if -nbar + kf * (1.0 + nbar.ln() - kf.ln()) < ln_eps {
            return Ok(k - 1);
        }
        k += 1;
    }
}

/// Smallest `D` with `mu^{D+1} < eps`, `mu = nbar/(nbar+1)`.
pub fn certified_dim_thermal(nbar: f64, eps: f64) -> Result<usize> {
    check_nonneg("nbar", nbar)?;
    check_eps(eps)?;
    if nbar == 0.0 {
        return Ok(0);
    }
    let ln_ratio = -(1.0 / nbar).ln_1p();
    let terms = (eps.ln() / ln_ratio).floor() as usize + 1;
    Ok(terms - 1)
}

/// Smallest odd `D` with `lambda^{D/2 + 1} < eps`.
pub fn certified_dim_twin_beam(xi: f64, eps: f64) -> Result<usize> {
    check_nonneg("xi", xi)?;
    check_eps(eps)?;
    if xi == 0.0 {
        return Ok(0);
    }
    let (ln_lambda, _) = twin_beam_logs(xi);
    let pairs = (eps.ln() / ln_lambda).floor() as usize + 1;
    Ok(2 * pairs - 1)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!(
            "tail tolerance must lie in (0, 1), got {eps}"
        )));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(domain(format!("theta = {theta} must lie in [0, pi]")));
    }
    Ok(())
}

/// Amplitudes `C_k = sqrt(binom(N,k)) sin^{N-k}(theta/2) cos^k(theta/2) e^{-i k phi}`
/// of the SU(2) coherent state on the `|N, k>` basis.
pub fn su2_coherent_coefficients(n: usize, theta: f64, phi: f64) -> Result<Vec<Complex64>> {
    check_theta(theta)?;
    if !phi.is_finite() {
        return Err(domain(format!("phi = {phi} must be finite")));
    }
    let (s, c) = (theta / 2.0).sin_cos();
    let magnitude = |k: usize| -> f64 {
        if n < 50 {
            let binom = (0..k).fold(1.0_f64, |acc, j| acc * (n - j) as f64 / (j + 1) as f64);
            binom.sqrt() * s.powi((n - k) as i32) * c.powi(k as i32)
        } else {
            let pow_log = |e: usize, base: f64| if e == 0 { 0.0 } else { e as f64 * base.ln() };
            (0.5 * ln_binomial(n as u64, k as u64) + pow_log(n - k, s) + pow_log(k, c)).exp()
        }
    };
    Ok((0..=n)
        .map(|k| Complex64::from_polar(magnitude(k), -(k as f64) * phi))
        .collect())
}

/// Mean and variance of `probs`, taken as given (no renormalization).
pub fn distribution_moments(dist: &PhotonDistribution) -> (f64, f64) {
    let probs = dist.probs();
    let mean = compensated_sum(probs.iter().enumerate().map(|(n, p)| n as f64 * p));
    let variance = compensated_sum(
        probs
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64 - mean).powi(2) * p),
    );
    (mean, variance)
}

/// Mandel `Q = Var(N)/<N> - 1` from the stored probabilities.
pub fn mandel_q(dist: &PhotonDistribution) -> Result<f64> {
    let (mean, variance) = distribution_moments(dist);
    if mean <= 0.0 {
        return Err(domain("Mandel Q is undefined for a zero-mean distribution"));
    }
    Ok(variance / mean - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn poisson_vacuum() {
        let d = poisson_distribution(0.0, 5).unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(d.tail_bound(), 0.0);
    }

    #[test]
    fn poisson_unit_mean_short_truncation() {
        let d = poisson_distribution(1.0, 2).unwrap();
        let e = (-1.0_f64).exp();
        for (got, want) in d.probs().iter().zip([e, e, e / 2.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(d.tail_bound(), 0.080301397071394, epsilon = 1e-9);
    }

    #[test]
    fn poisson_normalized_at_large_dim() {
        let d = poisson_distribution(4.0, 60).unwrap();
        let (mean, _) = distribution_moments(&d);
        assert_abs_diff_eq!(d.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mean, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn poisson_huge_mean_stays_finite() {
        let nbar = 1e4;
        let dim = certified_dim_poisson(nbar, DEFAULT_TAIL_EPS).unwrap();
        let d = poisson_distribution(nbar, dim).unwrap();
        assert!(d.probs().iter().all(|p| p.is_finite()));
        assert_abs_diff_eq!(mandel_q(&d).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn poisson_log_anchor_matches_direct_product() {
        // p_m for moderate m computed as a product of ratios from p_0
        for (nbar, m) in [(12.3_f64, 12), (30.0, 30), (40.0, 25), (25.0, 40)] {
            let direct = (1..=m).fold((-nbar).exp(), |p, k| p * nbar / k as f64);
            assert_relative_eq!(ln_poisson_pmf(nbar, m).exp(), direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn poisson_truncated_below_mode() {
        let d = poisson_distribution(50.0, 10).unwrap();
        assert!(d.tail_bound() > 0.99);
    }

    #[test]
    fn negative_inputs_rejected() {
        assert!(matches!(
            poisson_distribution(-1.0, 3),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            thermal_distribution(-0.1, 3),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            twin_beam_distribution(-0.1, 3),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            poisson_distribution(f64::NAN, 3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn thermal_examples() {
        assert_eq!(
            thermal_distribution(0.0, 3).unwrap().probs(),
            &[1.0, 0.0, 0.0, 0.0]
        );
        let d = thermal_distribution(1.0, 3).unwrap();
        for (got, want) in d.probs().iter().zip([0.5, 0.25, 0.125, 0.0625]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_relative_eq!(d.tail_bound(), 1.0 / 16.0, max_relative = 1e-11);
        let d = thermal_distribution(3.0, 200).unwrap();
        assert_abs_diff_eq!(mandel_q(&d).unwrap(), 3.0, epsilon = 1e-6);
    }

    #[test]
    fn twin_beam_examples() {
        assert_eq!(
            twin_beam_distribution(0.0, 4).unwrap().probs(),
            &[1.0, 0.0, 0.0, 0.0, 0.0]
        );
        // tanh^2 xi = 1/2
        let xi = FRAC_1_SQRT_2.atanh();
        let d = twin_beam_distribution(xi, 4).unwrap();
        for (got, want) in d.probs().iter().zip([0.5, 0.0, 0.25, 0.0, 0.125]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(d.declared_mean(), 2.0, epsilon = 1e-14);
        let d = twin_beam_distribution(1.3, 41).unwrap();
        assert!(d.probs().iter().skip(1).step_by(2).all(|&p| p == 0.0));
    }

    #[test]
    fn twin_beam_large_squeezing_is_finite() {
        let d = twin_beam_distribution(300.0, 10).unwrap();
        assert!(twin_beam_distribution(800.0, 10).is_err());
        assert!(d.probs().iter().all(|p| p.is_finite()));
    }

    #[test]
    fn su2_examples() {
        let c = su2_coherent_coefficients(1, PI / 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(c[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let c = su2_coherent_coefficients(3, 0.0, 0.0).unwrap();
        let mags: Vec<f64> = c.iter().map(|z| z.norm()).collect();
        assert_eq!(mags, vec![0.0, 0.0, 0.0, 1.0]);
        for n in [20, 80] {
            let c = su2_coherent_coefficients(n, 1.1, 2.3).unwrap();
            let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
        assert!(su2_coherent_coefficients(2, 4.0, 0.0).is_err());
        assert!(su2_coherent_coefficients(2, -0.1, 0.0).is_err());
    }

    #[test]
    fn su2_log_space_matches_direct_at_boundary() {
        // n = 50 takes the log-space route; compare with exact recursion.
        let c = su2_coherent_coefficients(50, 0.7, 0.0).unwrap();
        let (s, co) = (0.35_f64).sin_cos();
        let mut binom = 1.0_f64;
        for (k, z) in c.iter().enumerate() {
            if k > 0 {
                binom *= (51 - k) as f64 / k as f64;
            }
            let want = binom.sqrt() * s.powi(50 - k as i32) * co.powi(k as i32);
            assert!((z.norm() - want).abs() <= 1e-12 * want.max(1e-300));
        }
    }

    #[test]
    fn moments() {
        let (m, v) = distribution_moments(&PhotonDistribution::delta(5));
        assert_eq!((m, v), (5.0, 0.0));
        let (m, v) = distribution_moments(&thermal_distribution(1.0, 200).unwrap());
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn mandel_q_zero_mean_is_error() {
        assert!(matches!(
            mandel_q(&PhotonDistribution::delta(0)),
            Err(Error::Domain(_))
        ));
        let d = poisson_distribution(2.0, 60).unwrap();
        assert_abs_diff_eq!(mandel_q(&d).unwrap(), 0.0, epsilon = 1e-9);
        let d = thermal_distribution(2.0, 300).unwrap();
        assert_abs_diff_eq!(mandel_q(&d).unwrap(), 2.0, epsilon = 1e-6);
    }

    #[test]
    fn custom_renormalization_policy() {
        let d = PhotonDistribution::from_probs(vec![0.3, 0.4, 0.3 + 5e-10]).unwrap();
        assert_abs_diff_eq!(d.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.declared_mean(), 1.0, epsilon = 1e-9);
        assert!(PhotonDistribution::from_probs(vec![0.3, 0.4, 0.31]).is_err());
        assert!(PhotonDistribution::from_probs(vec![1.1, -0.1]).is_err());
        assert!(PhotonDistribution::from_probs(vec![]).is_err());
    }

    #[test]
    fn new_rejects_wrong_mean() {
        assert!(PhotonDistribution::new(vec![0.5, 0.5], 0.7, 0.0, 0.0).is_err());
    }

    #[test]
    fn certified_dims_meet_target() {
        for nbar in [0.5, 1.0, 5.0, 10.0, 300.0] {
            let d =
                poisson_distribution(nbar, certified_dim_poisson(nbar, 1e-12).unwrap()).unwrap();
            assert!(d.tail_bound() < 1e-12, "poisson {nbar}: {}", d.tail_bound());
            let d =
                thermal_distribution(nbar, certified_dim_thermal(nbar, 1e-12).unwrap()).unwrap();
            assert!(d.tail_bound() < 1e-12, "thermal {nbar}: {}", d.tail_bound());
        }
        for xi in [0.2, 1.0, 2.5] {
            let d =
                twin_beam_distribution(xi, certified_dim_twin_beam(xi, 1e-12).unwrap()).unwrap();
            assert!(d.tail_bound() < 1e-12, "twin {xi}: {}", d.tail_bound());
        }
    }

    #[test]
    fn state_spec_validation() {
        assert!(StateSpec::NPhotonPure { n: 2, k: 3 }.validate().is_err());
        assert!(StateSpec::Su2Coherent {
            n: 2,
            theta: 1.0,
            phi: 7.0
        }
        .validate()
        .is_err());
        assert!(StateSpec::TwinBeam { xi: -1.0 }
            .distribution(1e-12)
            .is_err());
        let d = StateSpec::Su2Coherent {
            n: 4,
            theta: 1.0,
            phi: 0.5,
        }
        .distribution(1e-12)
        .unwrap();
        assert_eq!(d.probs(), PhotonDistribution::delta(4).probs());
    }

    #[test]
    fn json_rejects_tampered_distribution() {
        let d = thermal_distribution(1.0, 3).unwrap();
        let mut v = serde_json::to_value(&d).unwrap();
        v["probs"][0] = serde_json::json!(0.9);
        assert!(serde_json::from_value::<PhotonDistribution>(v).is_err());
    }
}
