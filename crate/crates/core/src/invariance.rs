//! Tests of the invariance hypothesis for a single predictor set `S`: the
//! regression of the target on `X_S` has the same coefficients and the same
//! residual variance in every environment.
//!
//! * Method I ([`method1_test`]) fits on all environments but one, predicts
//!   the held-out environment and compares the prediction errors with their
//!   exact Gaussian distribution (a Chow-type F test).
//! * Method II ([`method2_test`]) fits once on the pooled data and compares
//!   residual means (Welch t) and variances (F) of each environment against
//!   the rest.
//!
//! Both combine the per-environment p-values with a Bonferroni correction.

use alloc::vec::Vec;

use rand::seq::index;

use crate::data::Dataset;
use crate::error::{IcpError, Result};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::seed::{derive_seed, rng_from_seed, set_key};
use crate::stats::dist::f_sf_real;
use crate::stats::{ols_with_design, two_sample_t_test, variance_f_test};

/// Which invariance test to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Exact leave-one-environment-out test on regression predictions.
    Chow,
    /// Approximate test on residuals of one pooled fit.
    Residuals,
}

impl Method {
    /// `1` for [`Method::Chow`], `2` for [`Method::Residuals`].
    pub fn number(self) -> u8 {
        match self {
            Method::Chow => 1,
            Method::Residuals => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Method::Chow),
            2 => Some(Method::Residuals),
            _ => None,
        }
    }
}

/// Outcome of testing one set.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceTestResult {
    pub set: Vec<usize>,
    /// Bonferroni-combined p-value.
    pub p_value: f64,
    /// Unadjusted p-value per environment index.
    pub per_env: Vec<(usize, f64)>,
    pub method: Method,
}

impl InvarianceTestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

fn bonferroni(ps: impl Iterator<Item = f64>, m: usize) -> f64 {
    let min = ps.fold(1.0f64, f64::min);
    (min * m as f64).min(1.0)
}

/// Default number of held-out rows used by Method I per environment.
pub const DEFAULT_SUBSAMPLE_CAP: usize = 500;

/// Method I for predictor set `s`.
///
/// When `subsample_cap` is set and an environment holds more rows, a random
/// subsample of that size (seeded from `rng_seed`, the set and the
/// environment) is used as the held-out block.
pub fn method1_test(
    d: &Dataset,
    s: &[usize],
    subsample_cap: Option<usize>,
    rng_seed: u64,
) -> Result<InvarianceTestResult> {
    let n_env = d.num_envs();
    if n_env < 2 {
        return Err(IcpError::EnvironmentTooSmall { env: 0 });
    }
    let k = s.len();
    let design = d.x().design_with_intercept(s);
    let y = d.y();
    let env_rows = d.env_rows();
    let mut per_env = Vec::with_capacity(n_env);
    for (e, rows_e) in env_rows.iter().enumerate() {
        let rows_rest: Vec<usize> = (0..d.n()).filter(|&i| d.env()[i] != e).collect();
        if rows_rest.len() < k + 2 {
            return Err(IcpError::EnvironmentTooSmall { env: e });
        }
        let held_out: Vec<usize> = match subsample_cap {
            Some(cap) if rows_e.len() > cap => {
                let mut rng = rng_from_seed(derive_seed(rng_seed ^ set_key(s), e as u64));
                let mut picked: Vec<usize> =
                    index::sample(&mut rng, rows_e.len(), cap).into_iter().map(|i| rows_e[i]).collect();
                picked.sort_unstable();
                picked
            }
            _ => rows_e.clone(),
        };
        let x_rest = design.select_rows(&rows_rest);
        let y_rest: Vec<f64> = rows_rest.iter().map(|&i| y[i]).collect();
        let fit = ols_with_design(&x_rest, &y_rest)?;
        let x_e = design.select_rows(&held_out);
        let pred = fit.predict_design(&x_e);
        let diff: Vec<f64> = held_out.iter().zip(&pred).map(|(&i, p)| y[i] - p).collect();
        let n_e = held_out.len();
        let df2 = fit.df_resid as f64;
        let quad = chow_quadratic_form(&x_rest, &x_e, &diff)?;
        let p = chow_p_value(quad, fit.sigma2_hat, n_e, df2, &diff, &y_rest)?;
        per_env.push((e, p));
    }
    let p_value = bonferroni(per_env.iter().map(|x| x.1), n_env);
    Ok(InvarianceTestResult { set: s.to_vec(), p_value, per_env, method: Method::Chow })
}

/// `Dᵀ Σ_D⁻¹ D` with `Σ_D = I + X_e (X_restᵀ X_rest)⁻¹ X_eᵀ`.
///
/// By the Woodbury identity this equals `DᵀD − uᵀ G⁻¹ u` where
/// `u = X_eᵀ D` and `G = X_restᵀ X_rest + X_eᵀ X_e`; `G` is small and is
/// handled by a Cholesky solve.
pub(crate) fn chow_quadratic_form(x_rest: &Matrix, x_e: &Matrix, diff: &[f64]) -> Result<f64> {
    let g = x_rest.gram().add(&x_e.gram())?;
    let chol = Cholesky::new(&g)?;
    let u = x_e.tr_mul_vec(diff);
    let q = dot(diff, diff) - chol.quad_form_inv(&u);
    Ok(q.max(0.0))
}

fn chow_p_value(quad: f64, sigma2: f64, n_e: usize, df2: f64, diff: &[f64], y_rest: &[f64]) -> Result<f64> {
    let scale = y_rest.iter().map(|v| v * v).sum::<f64>() / y_rest.len() as f64;
    let tiny = 1e-24 * scale.max(f64::MIN_POSITIVE);
    if sigma2 <= tiny {
        // Noiseless fit: invariant iff the held-out rows are predicted exactly.
        let max_dev = diff.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        return Ok(if max_dev * max_dev <= 1e-16 * scale.max(f64::MIN_POSITIVE) { 1.0 } else { 0.0 });
    }
    let stat = quad / (sigma2 * n_e as f64);
    f_sf_real(stat, n_e as f64, df2)
}

/// Method II for predictor set `s`.
pub fn method2_test(d: &Dataset, s: &[usize]) -> Result<InvarianceTestResult> {
    let n_env = d.num_envs();
    if n_env < 2 {
        return Err(IcpError::EnvironmentTooSmall { env: 0 });
    }
    let env_rows = d.env_rows();
    for (e, rows) in env_rows.iter().enumerate() {
        if rows.len() < 2 || d.n() - rows.len() < 2 {
            return Err(IcpError::EnvironmentTooSmall { env: e });
        }
    }
    let design = d.x().design_with_intercept(s);
    let fit = ols_with_design(&design, d.y())?;
    let resid = &fit.residuals;
    let y_scale = d.y().iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v))).max(1.0);
    let degenerate = resid.iter().all(|r| libm::fabs(*r) <= 1e-12 * y_scale);

    let mut p_mean = Vec::with_capacity(n_env);
    let mut p_var = Vec::with_capacity(n_env);
    for e in 0..n_env {
        if degenerate {
            p_mean.push(1.0);
            p_var.push(1.0);
            continue;
        }
        let (inside, outside): (Vec<f64>, Vec<f64>) = {
            let mut a = Vec::with_capacity(env_rows[e].len());
            let mut b = Vec::with_capacity(d.n() - env_rows[e].len());
            for (i, r) in resid.iter().enumerate() {
                if d.env()[i] == e {
                    a.push(*r);
                } else {
                    b.push(*r);
                }
            }
            (a, b)
        };
        p_mean.push(two_sample_t_test(&inside, &outside)?);
        p_var.push(variance_f_test(&inside, &outside)?);
    }
    let mean_bonf = bonferroni(p_mean.iter().copied(), n_env);
    let var_bonf = bonferroni(p_var.iter().copied(), n_env);
    let p_value = (2.0 * mean_bonf.min(var_bonf)).min(1.0);
    let per_env = (0..n_env).map(|e| (e, (2.0 * p_mean[e].min(p_var[e])).min(1.0))).collect();
    Ok(InvarianceTestResult { set: s.to_vec(), p_value, per_env, method: Method::Residuals })
}
