//! Scalar math shims and log-domain helpers.
//!
//! All transcendental functions go through `libm` so the crate builds
//! without `std` and produces the same bits on every platform.

use alloc::vec::Vec;

pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// log(sum_i exp(v_i)) without overflow; -inf for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        // All -inf (or empty): the sum is zero. +inf inputs are a bug
        // upstream; propagate the max so it stays visible.
        return max;
    }
    let sum: f64 = values.iter().map(|v| exp(v - max)).sum();
    max + ln(sum)
}

/// Turns log weights into normalized linear weights.
pub fn normalize_log_weights(log_weights: &[f64]) -> Vec<f64> {
    let norm = log_sum_exp(log_weights);
    log_weights.iter().map(|w| exp(w - norm)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct() {
        let values = [1.0, 2.0, 3.0];
        let direct = (1.0f64.exp() + 2.0f64.exp() + 3.0f64.exp()).ln();
        assert!((log_sum_exp(&values) - direct).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let shifted = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((shifted - (-1000.0 + 2.0f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn normalized_weights_sum_to_one() {
        let w = normalize_log_weights(&[-1.0, 0.0, 2.5]);
        let sum: f64 = w.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}
