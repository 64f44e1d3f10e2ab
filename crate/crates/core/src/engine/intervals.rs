use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{IcpError, Result};
use crate::stats::{ols_fit, t_quantile};

/// Axis-aligned confidence region over all `p` coefficients. Coordinates
/// outside the set are pinned to `[0, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Rectangle {
    pub fn zero(p: usize) -> Self {
        Rectangle { lo: vec![0.0; p], hi: vec![0.0; p] }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }
}

/// Per-variable summary of the union of accepted regions: its interval hull
/// and whether zero lies in the union itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefInterval {
    pub lo: f64,
    pub hi: f64,
    pub contains_zero: bool,
}

impl CoefInterval {
    pub const UNBOUNDED: CoefInterval = CoefInterval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, contains_zero: true };

    pub fn is_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }
}

/// Rectangular `(1 − α)` confidence region for the pooled regression on
/// `set`, Bonferroni-adjusted over the coordinates of the set:
/// `β̂_k ± t_{1−α/(2|S|), n−|S|−1} · σ̂ · sqrt(((X_SᵀX_S)⁻¹)_kk)`.
pub fn confidence_rectangle(d: &Dataset, set: &[usize], alpha: f64) -> Result<Rectangle> {
    let mut rect = Rectangle::zero(d.p());
    if set.is_empty() {
        return Ok(rect);
    }
    let fit = ols_fit(&d.x().select_cols(set), d.y())?;
    let q = t_quantile(1.0 - alpha / (2.0 * set.len() as f64), fit.df_resid as f64)?;
    let sigma = libm::sqrt(fit.sigma2_hat);
    for (slot, &k) in set.iter().enumerate() {
        let se = sigma * libm::sqrt(fit.xtx_inv.get(slot + 1, slot + 1));
        let c = fit.coef[slot + 1];
        rect.lo[k] = c - q * se;
        rect.hi[k] = c + q * se;
    }
    Ok(rect)
}

/// Union of regions, reported per variable.
pub fn union_intervals(p: usize, regions: &[Rectangle]) -> Vec<CoefInterval> {
    (0..p)
        .map(|k| {
            let mut iv = CoefInterval { lo: f64::INFINITY, hi: f64::NEG_INFINITY, contains_zero: false };
            for r in regions {
                iv.lo = iv.lo.min(r.lo[k]);
                iv.hi = iv.hi.max(r.hi[k]);
                iv.contains_zero |= r.lo[k] <= 0.0 && 0.0 <= r.hi[k];
            }
            iv
        })
        .collect()
}

/// Per-variable union of the confidence rectangles of the `accepted` sets.
pub fn confidence_intervals(d: &Dataset, accepted: &[Vec<usize>], alpha: f64) -> Result<Vec<CoefInterval>> {
    if accepted.is_empty() {
        return Err(IcpError::InfeasibleConfig("no accepted sets".into()));
    }
    let regions = accepted.iter().map(|s| confidence_rectangle(d, s, alpha)).collect::<Result<Vec<_>>>()?;
    Ok(union_intervals(d.p(), &regions))
}
