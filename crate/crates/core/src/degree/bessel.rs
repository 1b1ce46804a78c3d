//! Exponentially scaled modified Bessel function of the first kind, order one.

use crate::error::{domain, Result};

/// Below this argument the power series is used, above it the asymptotic
/// expansion.
pub const SERIES_LIMIT: f64 = 20.0;

/// `e^{-x} I_1(x)` for `x >= 0`, relative error below `1e-12`.
pub fn scaled_bessel_i1(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(domain(format!("scaled_bessel_i1 needs x >= 0, got {x}")));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(if x <= SERIES_LIMIT {
        scaled_i1_series(x)
    } else {
        scaled_i1_asymptotic(x)
    })
}

/// `e^{-x} sum_k (x/2)^{2k+1} / (k! (k+1)!)`; every term is positive.
pub(crate) fn scaled_i1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = half;
    let mut sum = half;
    let mut k = 0.0_f64;
    while term > f64::EPSILON * 0.25 * sum {
        k += 1.0;
        term *= q / (k * (k + 1.0));
        sum += term;
    }
    sum * (-x).exp()
}

/// Hankel expansion `(2 pi x)^{-1/2} sum_k (-1)^k a_k(1) / x^k`, truncated at
/// its smallest term.
pub(crate) fn scaled_i1_asymptotic(x: f64) -> f64 {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 1.0_f64;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = term * (odd * odd - 4.0) / (8.0 * k * x);
        if next.abs() >= term.abs() || next.abs() < 0.25 * f64::EPSILON * sum.abs() {
            if next.abs() < term.abs() {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}
