//! Invariance under hidden confounding.
//!
//! A set `S` is plausible when some `γ` supported on `S` makes the residual
//! `Y − Xγ` identically distributed across environments. The existence of
//! such a `γ` is tested by brute force over a rectangular grid, each grid
//! point with Kolmogorov–Smirnov tests of every environment against the
//! rest.
//!
//! Under confounding the pooled OLS estimate is biased by an amount that does
//! not shrink with `n`, so a grid centred on it alone tends to miss `γ*`. The
//! default grid therefore spans the OLS estimate and a moment estimate built
//! from between-environment differences of second moments (an instrumental
//! variables estimate when environments shift the predictors), padded by `c`
//! standard errors on both sides.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::engine::{assemble, preselect, search, IcpConfig, IcpResult, Rectangle};
use crate::error::{IcpError, Result};
use crate::linalg::{solve_square, Matrix};
use crate::stats::{ks_p_value, ks_statistic_sorted, ols_fit};

/// Largest number of grid points evaluated for a single set.
pub const GRID_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridCentering {
    /// Centre on pooled OLS, half-widths `c · se`.
    Ols,
    /// Cover both pooled OLS and the between-environment moment estimate.
    Bracketed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenConfig {
    /// Padding in standard errors.
    pub c: f64,
    /// Odd number of grid points per coordinate.
    pub points_per_axis: usize,
    pub centering: GridCentering,
}

impl Default for HiddenConfig {
    fn default() -> Self {
        HiddenConfig { c: 6.0, points_per_axis: 11, centering: GridCentering::Bracketed }
    }
}

/// Regular grid `center_k + i · step_k` for `i ∈ {−m, …, m}` with
/// `m = (points_per_axis − 1) / 2` and `step_k = half_widths_k / m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub center: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(center: Vec<f64>, half_widths: Vec<f64>, points_per_axis: usize) -> Result<Self> {
        if center.len() != half_widths.len() {
            return Err(IcpError::DimensionMismatch("grid center and half-widths differ in length"));
        }
        if points_per_axis.is_multiple_of(2) {
            return Err(IcpError::InfeasibleConfig("points_per_axis must be odd".into()));
        }
        if half_widths.iter().any(|h| !(*h > 0.0 && h.is_finite())) || center.iter().any(|c| !c.is_finite()) {
            return Err(IcpError::InfeasibleConfig("grid half-widths must be positive and finite".into()));
        }
        Ok(GridSpec { center, half_widths, points_per_axis })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Total number of grid points.
    pub fn size(&self) -> f64 {
        libm::pow(self.points_per_axis as f64, self.dim() as f64)
    }

    fn step(&self, k: usize) -> f64 {
        let m = (self.points_per_axis - 1) / 2;
        if m == 0 {
            self.half_widths[k]
        } else {
            self.half_widths[k] / m as f64
        }
    }

    /// Grid point number `index`, with the first coordinate varying slowest.
    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let n = self.points_per_axis;
        let m = ((n - 1) / 2) as f64;
        let mut out = vec![0.0; self.dim()];
        for k in (0..self.dim()).rev() {
            let i = (index % n) as f64;
            index /= n;
            out[k] = if n == 1 { self.center[k] } else { self.center[k] + (i - m) * self.step(k) };
        }
        out
    }

    /// Grid for `set`, following `cfg`.
    pub fn for_set(d: &Dataset, set: &[usize], cfg: &HiddenConfig) -> Result<GridSpec> {
        if set.is_empty() {
            return GridSpec::new(Vec::new(), Vec::new(), cfg.points_per_axis);
        }
        let fit = ols_fit(&d.x().select_cols(set), d.y())?;
        let ols: Vec<f64> = fit.coef[1..].to_vec();
        let se: Vec<f64> = fit.std_errors()[1..].iter().map(|s| s.max(1e-8)).collect();
        let contrast = match cfg.centering {
            GridCentering::Ols => None,
            GridCentering::Bracketed => moment_estimate(d, set),
        };
        let (center, half) = match contrast {
            None => (ols, se.iter().map(|s| cfg.c * s).collect()),
            Some(m) => {
                let center = ols.iter().zip(&m).map(|(a, b)| 0.5 * (a + b)).collect();
                let half = ols.iter().zip(&m).zip(&se).map(|((a, b), s)| 0.5 * libm::fabs(a - b) + cfg.c * s).collect();
                (center, half)
            }
        };
        GridSpec::new(center, half, cfg.points_per_axis)
    }
}

/// Least-squares solution of `(C_e − C̄) γ = c_e − c̄` stacked over
/// environments, where `C_e` is the covariance of `X_S` and `c_e` its
/// covariance with `Y` in environment `e`. `None` when the differences are
/// too small to identify `γ`.
fn moment_estimate(d: &Dataset, set: &[usize]) -> Option<Vec<f64>> {
    let k = set.len();
    let rows = d.env_rows();
    if rows.len() < 2 {
        return None;
    }
    let moments: Vec<(Matrix, Vec<f64>)> = rows
        .iter()
        .map(|r| {
            let n = r.len() as f64;
            let cols: Vec<Vec<f64>> = set.iter().map(|&j| r.iter().map(|&i| d.x().get(i, j)).collect()).collect();
            let yv: Vec<f64> = r.iter().map(|&i| d.y()[i]).collect();
            let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n).collect();
            let my = yv.iter().sum::<f64>() / n;
            let mut cxx = Matrix::zeros(k, k);
            let mut cxy = vec![0.0; k];
            for a in 0..k {
                for b in 0..=a {
                    let v = cols[a].iter().zip(&cols[b]).map(|(u, w)| (u - means[a]) * (w - means[b])).sum::<f64>() / n;
                    cxx.set(a, b, v);
                    cxx.set(b, a, v);
                }
                cxy[a] = cols[a].iter().zip(&yv).map(|(u, w)| (u - means[a]) * (w - my)).sum::<f64>() / n;
            }
            (cxx, cxy)
        })
        .collect();
    let ne = moments.len() as f64;
    let mut mean_xx = Matrix::zeros(k, k);
    let mut mean_xy = vec![0.0; k];
    for (cxx, cxy) in &moments {
        for a in 0..k {
            for b in 0..k {
                mean_xx.set(a, b, mean_xx.get(a, b) + cxx.get(a, b) / ne);
            }
            mean_xy[a] += cxy[a] / ne;
        }
    }
    let mut normal = Matrix::zeros(k, k);
    let mut rhs = vec![0.0; k];
    for (cxx, cxy) in &moments {
        for a in 0..k {
            for b in 0..k {
                let mut v = 0.0;
                for r in 0..k {
                    v += (cxx.get(r, a) - mean_xx.get(r, a)) * (cxx.get(r, b) - mean_xx.get(r, b));
                }
                normal.set(a, b, normal.get(a, b) + v);
            }
            rhs[a] += (0..k).map(|r| (cxx.get(r, a) - mean_xx.get(r, a)) * (cxy[r] - mean_xy[r])).sum::<f64>();
        }
    }
    // Require the shift to be a non-negligible fraction of the scale of X_S.
    let scale: f64 = (0..k).map(|a| mean_xx.get(a, a)).sum::<f64>() / k as f64;
    let trace: f64 = (0..k).map(|a| normal.get(a, a)).sum();
    if !(trace > 1e-6 * scale * scale) {
        return None;
    }
    let sol = solve_square(&normal, &rhs)?;
    sol.iter().all(|v| v.is_finite()).then_some(sol)
}

/// p-value for "the residuals `y − Xγ` have the same distribution in every
/// environment": each environment against the pooled rest with a two-sample
/// KS test, Bonferroni over environments. Coordinates of `gamma` outside `s`
/// must be zero; `gamma` has length `p`.
pub fn hidden_invariance_test(d: &Dataset, s: &[usize], gamma: &[f64]) -> Result<f64> {
    if gamma.len() != d.p() {
        return Err(IcpError::DimensionMismatch("gamma must have one entry per predictor"));
    }
    if gamma.iter().enumerate().any(|(j, g)| *g != 0.0 && !s.contains(&j)) {
        return Err(IcpError::InfeasibleConfig("gamma is not supported on the set".into()));
    }
    let coef: Vec<f64> = s.iter().map(|&j| gamma[j]).collect();
    residual_p(d, &d.env_rows(), s, &coef)
}

fn residual_p(d: &Dataset, rows: &[Vec<usize>], s: &[usize], coef: &[f64]) -> Result<f64> {
    Ok(residual_score(d, rows, s, coef)?.min(1.0))
}

/// `E · min_e p_e` before capping at 1; used to rank grid points, where the
/// capped value would tie across large parts of the grid.
fn residual_score(d: &Dataset, rows: &[Vec<usize>], s: &[usize], coef: &[f64]) -> Result<f64> {
    let e = rows.len();
    if e < 2 {
        return Ok(e as f64);
    }
    for r in rows {
        if r.len() < 8 || d.n() - r.len() < 8 {
            return Err(IcpError::TooFewSamples { needed: 8, got: r.len().min(d.n() - r.len()) });
        }
    }
    let mut resid = d.y().to_vec();
    for (&j, &g) in s.iter().zip(coef) {
        for (r, x) in resid.iter_mut().zip(d.x().col(j)) {
            *r -= g * x;
        }
    }
    // Sort once; per environment, split the sorted sequence by membership.
    let mut order: Vec<usize> = (0..d.n()).collect();
    order.sort_unstable_by(|&a, &b| resid[a].total_cmp(&resid[b]));
    let env = d.env();
    let mut min_p: f64 = 1.0;
    let mut inside = Vec::with_capacity(d.n());
    let mut outside = Vec::with_capacity(d.n());
    for k in 0..e {
        inside.clear();
        outside.clear();
        for &i in &order {
            if env[i] == k {
                inside.push(resid[i]);
            } else {
                outside.push(resid[i]);
            }
        }
        let stat = ks_statistic_sorted(&inside, &outside);
        min_p = min_p.min(ks_p_value(stat, inside.len(), outside.len()));
    }
    Ok(e as f64 * min_p)
}

/// Outcome of the grid search for one set.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenSetOutcome {
    pub accepted: bool,
    /// Grid point with the largest p-value, as a length-`p` vector. Points are
    /// ranked before the Bonferroni cap at 1; the first index wins ties.
    pub best_gamma: Vec<f64>,
    pub best_p: f64,
    /// Bounding box of the grid points that were not rejected, widened by
    /// half a grid step; `None` when the set is rejected. Length-`p`
    /// vectors, zero outside the set.
    pub plausible_box: Option<Rectangle>,
}

/// Evaluates the invariance test at every grid point and accepts the set
/// when at least one p-value reaches `alpha`.
pub fn hidden_set_test(d: &Dataset, s: &[usize], grid: &GridSpec, alpha: f64) -> Result<HiddenSetOutcome> {
    if grid.dim() != s.len() {
        return Err(IcpError::DimensionMismatch("grid dimension must equal the set size"));
    }
    let size = grid.size();
    if size > GRID_LIMIT {
        return Err(IcpError::GridTooLarge { points: size, limit: GRID_LIMIT });
    }
    let rows = d.env_rows();
    let mut best_score = -1.0f64;
    let mut best = Vec::new();
    let mut rect: Option<Rectangle> = None;
    for idx in 0..size as usize {
        let coef = grid.point(idx);
        let score = residual_score(d, &rows, s, &coef)?;
        if score > best_score {
            best_score = score;
            best = coef.clone();
        }
        if score.min(1.0) >= alpha {
            let r = rect.get_or_insert_with(|| Rectangle {
                lo: vec![f64::INFINITY; s.len()],
                hi: vec![f64::NEG_INFINITY; s.len()],
            });
            for (k, v) in coef.iter().enumerate() {
                r.lo[k] = r.lo[k].min(*v);
                r.hi[k] = r.hi[k].max(*v);
            }
        }
    }
    let best_p = best_score.min(1.0);
    let mut best_gamma = vec![0.0; d.p()];
    for (&j, v) in s.iter().zip(&best) {
        best_gamma[j] = *v;
    }
    let plausible_box = rect.map(|r| {
        let mut out = Rectangle::zero(d.p());
        for (k, &j) in s.iter().enumerate() {
            let half = 0.5 * grid.step(k);
            out.lo[j] = r.lo[k] - half;
            out.hi[j] = r.hi[k] + half;
        }
        out
    });
    Ok(HiddenSetOutcome { accepted: best_p >= alpha, best_gamma, best_p, plausible_box })
}

/// Search over sets using the grid test. The confidence region of an
/// accepted set is the box spanned by its non-rejected grid points, so the
/// reported intervals are only as fine as the grid.
pub fn run_hidden_icp(d: &Dataset, cfg: &IcpConfig, hidden: &HiddenConfig) -> Result<IcpResult> {
    cfg.validate(d)?;
    let pool: Vec<usize> = match cfg.preselect {
        Some(q) => preselect(d, q),
        None => (0..d.p()).collect(),
    };
    let max_size = cfg.max_set_size.unwrap_or(pool.len());
    if libm::pow(hidden.points_per_axis as f64, max_size.min(pool.len()) as f64) > GRID_LIMIT {
        return Err(IcpError::GridTooLarge {
            points: libm::pow(hidden.points_per_axis as f64, max_size.min(pool.len()) as f64),
            limit: GRID_LIMIT,
        });
    }
    let single_env = d.num_envs() < 2;
    let found = search(&pool, max_size, cfg.alpha, cfg.early_stopping, |s: &[usize]| {
        let grid = GridSpec::for_set(d, s, hidden)?;
        if single_env {
            // Nothing can be rejected: the whole grid is plausible.
            let mut r = Rectangle::zero(d.p());
            for (k, &j) in s.iter().enumerate() {
                let reach = grid.half_widths[k] + 0.5 * grid.step(k);
                r.lo[j] = grid.center[k] - reach;
                r.hi[j] = grid.center[k] + reach;
            }
            return Ok((1.0, Some(r)));
        }
        let out = hidden_set_test(d, s, &grid, cfg.alpha)?;
        Ok((out.best_p, out.plausible_box))
    })?;
    let mut tested = Vec::with_capacity(found.tested.len());
    let mut regions = Vec::new();
    for (s, pv, region) in found.tested {
        if let Some(r) = region {
            regions.push(r);
        }
        tested.push((s, pv));
    }
    Ok(assemble(d.p(), cfg.alpha, cfg.gof_cutoff, tested, regions, found.stopped_early))
}
