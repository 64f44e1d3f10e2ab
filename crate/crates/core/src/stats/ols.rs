use alloc::vec::Vec;

use crate::error::{IcpError, Result};
use crate::linalg::{least_squares, LeastSquares, Matrix};

/// Ordinary least squares fit with an intercept.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Intercept first, then one coefficient per predictor column.
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residual variance with denominator `df_resid`.
    pub sigma2_hat: f64,
    /// `(XᵀX)⁻¹` for the design including the intercept column.
    pub xtx_inv: Matrix,
    pub df_resid: usize,
    pub(crate) ls: LeastSquares,
}

impl OlsFit {
    /// Predictions for a design matrix that already carries the intercept column.
    pub fn predict_design(&self, design: &Matrix) -> Vec<f64> {
        design.mul_vec(&self.coef)
    }

    /// Standard errors of the coefficients, intercept first.
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.coef.len()).map(|i| libm::sqrt(self.sigma2_hat * self.xtx_inv.get(i, i))).collect()
    }

    /// `vᵀ (XᵀX)⁻¹ v` computed through the QR factor.
    pub fn quad_form_xtx_inv(&self, v: &[f64]) -> f64 {
        self.ls.quad_form_gram_inv(v)
    }
}

/// Regresses `y` on the columns of `x_s` plus an intercept.
///
/// Needs `n ≥ k + 2` so that the residual variance has at least one degree
/// of freedom. `k = 0` fits the mean.
pub fn ols_fit(x_s: &Matrix, y: &[f64]) -> Result<OlsFit> {
    let cols: Vec<usize> = (0..x_s.cols()).collect();
    ols_with_design(&x_s.design_with_intercept(&cols), y)
}

/// Same as [`ols_fit`] for a design whose first column is the intercept.
pub fn ols_with_design(design: &Matrix, y: &[f64]) -> Result<OlsFit> {
    let n = design.rows();
    let m = design.cols();
    if y.len() != n {
        return Err(IcpError::DimensionMismatch("response length"));
    }
    if n < m + 1 {
        return Err(IcpError::TooFewRows { needed: m + 1, got: n });
    }
    let ls = least_squares(design, y)?;
    let df_resid = n - m;
    let rss: f64 = ls.residuals.iter().map(|r| r * r).sum();
    Ok(OlsFit {
        coef: ls.coef.clone(),
        residuals: ls.residuals.clone(),
        sigma2_hat: rss / df_resid as f64,
        xtx_inv: ls.gram_inv.clone(),
        df_resid,
        ls,
    })
}
