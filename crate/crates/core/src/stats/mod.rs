//! Numerical primitives: least squares with intercept, distribution
//! functions, and two-sample tests for means, variances and distributions.

pub mod dist;
mod ols;
mod two_sample;

pub use dist::{f_cdf, f_sf, kolmogorov_sf, normal_cdf, normal_quantile, t_quantile};
pub use ols::{ols_fit, ols_with_design, OlsFit};
pub(crate) use two_sample::{ks_p_value, ks_statistic_sorted};
pub use two_sample::{ks_statistic, ks_two_sample, two_sample_t_test, variance_f_test};

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub(crate) fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}
