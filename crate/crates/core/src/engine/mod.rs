//! The subset search.
//!
//! Candidate sets are visited by increasing size, lexicographically within a
//! size. Every set whose invariance test is not rejected at level `α` is
//! accepted; the estimate `Ŝ` is the intersection of the accepted sets and
//! the coefficient intervals are the union of their confidence regions.
//!
//! With early stopping the search ends as soon as the empty set is accepted,
//! or once at least two sets have been accepted and their intersection is
//! empty. `Ŝ` is then known to be empty, but the union of regions is not, so
//! every variable reports [`CoefInterval::UNBOUNDED`].

mod intervals;
mod preselect;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use intervals::{confidence_intervals, confidence_rectangle, union_intervals, CoefInterval, Rectangle};
pub use preselect::preselect;

use crate::data::Dataset;
use crate::error::{IcpError, Result};
pub use crate::invariance::Method;
use crate::invariance::{method1_test, method2_test, DEFAULT_SUBSAMPLE_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct IcpConfig {
    pub alpha: f64,
    pub method: Method,
    /// Largest candidate set size; `None` searches all sizes.
    pub max_set_size: Option<usize>,
    /// Restrict the candidates to this many screened predictors.
    pub preselect: Option<usize>,
    /// Declare the model rejected when the best p-value falls below this.
    pub gof_cutoff: f64,
    /// Number of environments that may be ignored per set (robust variant).
    pub robust_v: usize,
    pub seed: u64,
    /// Held-out subsample size for Method I.
    pub subsample_cap: Option<usize>,
    pub early_stopping: bool,
}

impl Default for IcpConfig {
    fn default() -> Self {
        IcpConfig {
            alpha: 0.05,
            method: Method::Residuals,
            max_set_size: None,
            preselect: None,
            gof_cutoff: 0.0,
            robust_v: 0,
            seed: 0,
            subsample_cap: Some(DEFAULT_SUBSAMPLE_CAP),
            early_stopping: true,
        }
    }
}

impl IcpConfig {
    pub fn with_method(method: Method) -> Self {
        IcpConfig { method, ..Default::default() }
    }

    pub fn validate(&self, d: &Dataset) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(IcpError::InfeasibleConfig(format!("alpha = {} is not in (0, 1)", self.alpha)));
        }
        if let Some(m) = self.max_set_size {
            if m > d.p() {
                return Err(IcpError::InfeasibleConfig(format!("max_set_size = {m} exceeds p = {}", d.p())));
            }
        }
        if let Some(q) = self.preselect {
            if q == 0 || q > d.p() {
                return Err(IcpError::InfeasibleConfig(format!("preselect = {q} is not in 1..={}", d.p())));
            }
        }
        if !(0.0..1.0).contains(&self.gof_cutoff) {
            return Err(IcpError::InfeasibleConfig(format!("gof_cutoff = {} is not in [0, 1)", self.gof_cutoff)));
        }
        if self.robust_v >= d.num_envs() {
            return Err(IcpError::InfeasibleConfig(format!(
                "robust_v = {} must be below the number of environments ({})",
                self.robust_v,
                d.num_envs()
            )));
        }
        if self.subsample_cap == Some(0) {
            return Err(IcpError::InfeasibleConfig("subsample_cap must be positive".into()));
        }
        Ok(())
    }
}

/// A set whose invariance hypothesis was not rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedSet {
    pub set: Vec<usize>,
    pub p_value: f64,
    /// Confidence region over all `p` coefficients.
    pub region: Rectangle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpResult {
    /// Accepted sets in visiting order.
    pub accepted: Vec<AcceptedSet>,
    /// Intersection of the accepted sets (empty when none was accepted).
    pub s_hat: Vec<usize>,
    /// One entry per predictor; empty when the model is rejected.
    pub intervals: Vec<CoefInterval>,
    pub model_rejected: bool,
    /// Largest p-value over the tested sets.
    pub best_p: f64,
    pub tested_count: usize,
    pub stopped_early: bool,
    /// Every tested set with its p-value, in visiting order.
    pub tested: Vec<(Vec<usize>, f64)>,
}

impl IcpResult {
    /// Whether a coefficient vector lies in the union of accepted regions.
    pub fn covers(&self, gamma: &[f64]) -> bool {
        if self.stopped_early && !self.accepted.is_empty() {
            return true;
        }
        self.accepted.iter().any(|a| a.region.contains(gamma))
    }

    pub fn accepted_sets(&self) -> Vec<Vec<usize>> {
        self.accepted.iter().map(|a| a.set.clone()).collect()
    }
}

/// All `size`-subsets of `pool` in lexicographic order.
pub(crate) fn combinations(pool: &[usize], size: usize) -> Vec<Vec<usize>> {
    let n = pool.len();
    if size > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().map(|&i| pool[i]).collect());
        let Some(i) = (0..size).rev().find(|&i| idx[i] < i + n - size) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub(crate) fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|v| b.contains(v)).collect()
}

/// Result of the level-wise search, before confidence regions are attached.
pub(crate) struct Search<T> {
    /// Tested sets in visiting order with their p-value and test payload.
    pub tested: Vec<(Vec<usize>, f64, T)>,
    pub stopped_early: bool,
}

fn evaluate_level<T, F>(sets: &[Vec<usize>], test: &F) -> Vec<Result<(f64, T)>>
where
    T: Send,
    F: Fn(&[usize]) -> Result<(f64, T)> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        sets.par_iter().map(|s| test(s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        sets.iter().map(|s| test(s)).collect()
    }
}

/// Visits candidate sets level by level. All sets of one size are evaluated
/// (in parallel with the `parallel` feature) before the stopping rule is
/// applied in visiting order, so the outcome does not depend on scheduling.
pub(crate) fn search<T, F>(pool: &[usize], max_size: usize, alpha: f64, early: bool, test: F) -> Result<Search<T>>
where
    T: Send,
    F: Fn(&[usize]) -> Result<(f64, T)> + Sync,
{
    run_levels(pool, max_size, alpha, early, |sets| evaluate_level(sets, &test))
}

fn run_levels<T>(
    pool: &[usize],
    max_size: usize,
    alpha: f64,
    early: bool,
    mut eval: impl FnMut(&[Vec<usize>]) -> Vec<Result<(f64, T)>>,
) -> Result<Search<T>> {
    let mut tested = Vec::new();
    let mut accepted_count = 0usize;
    let mut running: Option<Vec<usize>> = None;
    for size in 0..=max_size.min(pool.len()) {
        let sets = combinations(pool, size);
        let results = eval(&sets);
        for (set, res) in sets.into_iter().zip(results) {
            let (p, payload) = res?;
            let accept = p >= alpha;
            if accept {
                accepted_count += 1;
                running = Some(match running {
                    None => set.clone(),
                    Some(r) => intersect(&r, &set),
                });
            }
            let empty_set = set.is_empty();
            tested.push((set, p, payload));
            if early && accept && empty_set {
                return Ok(Search { tested, stopped_early: true });
            }
            if early && accepted_count >= 2 && running.as_ref().is_some_and(|r| r.is_empty()) {
                return Ok(Search { tested, stopped_early: true });
            }
        }
    }
    Ok(Search { tested, stopped_early: false })
}

/// Builds the result from tested sets and the regions of the accepted ones.
pub(crate) fn assemble(
    p: usize,
    alpha: f64,
    gof_cutoff: f64,
    tested: Vec<(Vec<usize>, f64)>,
    regions: Vec<Rectangle>,
    stopped_early: bool,
) -> IcpResult {
    let accepted: Vec<AcceptedSet> = tested
        .iter()
        .filter(|(_, pv)| *pv >= alpha)
        .zip(regions)
        .map(|((s, pv), region)| AcceptedSet { set: s.clone(), p_value: *pv, region })
        .collect();
    let best_p = tested.iter().map(|t| t.1).fold(0.0f64, f64::max);
    let mut model_rejected = accepted.is_empty();
    let mut s_hat = match accepted.split_first() {
        None => Vec::new(),
        Some((first, rest)) => rest.iter().fold(first.set.clone(), |acc, a| intersect(&acc, &a.set)),
    };
    let mut intervals = if accepted.is_empty() {
        Vec::new()
    } else if stopped_early {
        vec![CoefInterval::UNBOUNDED; p]
    } else {
        let regions: Vec<Rectangle> = accepted.iter().map(|a| a.region.clone()).collect();
        union_intervals(p, &regions)
    };
    if best_p < gof_cutoff {
        model_rejected = true;
        intervals.clear();
        s_hat.clear();
    }
    IcpResult { tested_count: tested.len(), accepted, s_hat, intervals, model_rejected, best_p, stopped_early, tested }
}

/// Builds the per-set p-value function for the configured method, treating a
/// single environment as untestable (p = 1).
fn base_test(cfg: &IcpConfig) -> impl Fn(&Dataset, &[usize]) -> Result<f64> + Sync {
    let method = cfg.method;
    let cap = cfg.subsample_cap;
    let seed = cfg.seed;
    move |data: &Dataset, s: &[usize]| {
        if data.num_envs() < 2 {
            return Ok(1.0);
        }
        match method {
            Method::Chow => method1_test(data, s, cap, seed).map(|r| r.p_value),
            Method::Residuals => method2_test(data, s).map(|r| r.p_value),
        }
    }
}

fn candidate_pool(d: &Dataset, cfg: &IcpConfig) -> Vec<usize> {
    match cfg.preselect {
        Some(q) => preselect(d, q),
        None => (0..d.p()).collect(),
    }
}

fn regions_for(d: &Dataset, alpha: f64, tested: &[(Vec<usize>, f64)]) -> Result<Vec<Rectangle>> {
    tested.iter().filter(|(_, p)| *p >= alpha).map(|(s, _)| confidence_rectangle(d, s, alpha)).collect()
}

fn finish(d: &Dataset, cfg: &IcpConfig, search: Search<()>) -> Result<IcpResult> {
    let tested: Vec<(Vec<usize>, f64)> = search.tested.into_iter().map(|(s, p, _)| (s, p)).collect();
    let regions = regions_for(d, cfg.alpha, &tested)?;
    Ok(assemble(d.p(), cfg.alpha, cfg.gof_cutoff, tested, regions, search.stopped_early))
}

/// Runs invariant causal prediction on `d`. Dispatches to the robust variant
/// when `cfg.robust_v > 0`.
pub fn run_icp(d: &Dataset, cfg: &IcpConfig) -> Result<IcpResult> {
    cfg.validate(d)?;
    if cfg.robust_v > 0 {
        return run_icp_robust(d, cfg);
    }
    let pool = candidate_pool(d, cfg);
    let max_size = cfg.max_set_size.unwrap_or(pool.len());
    let test = base_test(cfg);
    let search = search(&pool, max_size, cfg.alpha, cfg.early_stopping, |s: &[usize]| test(d, s).map(|p| (p, ())))?;
    finish(d, cfg, search)
}

/// Environment subsets of size at least `min_size`, largest first.
fn env_subsets(num_envs: usize, min_size: usize) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..num_envs).collect();
    (min_size.max(1)..=num_envs).rev().flat_map(|k| combinations(&all, k)).collect()
}

/// Robust variant: a set counts as accepted when the test is not rejected on
/// at least one subset of environments that leaves out at most
/// `cfg.robust_v` of them. The reported p-value is the largest over those
/// subsets.
pub fn run_icp_robust(d: &Dataset, cfg: &IcpConfig) -> Result<IcpResult> {
    cfg.validate(d)?;
    let subsets = env_subsets(d.num_envs(), d.num_envs() - cfg.robust_v);
    let restricted: Vec<Dataset> = subsets.iter().map(|s| d.restrict_envs(s)).collect::<Result<_>>()?;
    let pool = candidate_pool(d, cfg);
    let max_size = cfg.max_set_size.unwrap_or(pool.len());
    let test = base_test(cfg);
    let search = search(&pool, max_size, cfg.alpha, cfg.early_stopping, |s: &[usize]| {
        let mut best = 0.0f64;
        for r in &restricted {
            best = best.max(test(r, s)?);
        }
        Ok((best, ()))
    })?;
    finish(d, cfg, search)
}

/// Largest predictor count accepted by [`brute_force_oracle`].
pub const ORACLE_MAX_P: usize = 12;

/// Reference implementation of [`run_icp`] (without preselection): tests all
/// subsets in a plain loop over bitmasks, then derives the reported result
/// from the complete list.
pub fn brute_force_oracle(d: &Dataset, cfg: &IcpConfig) -> Result<IcpResult> {
    cfg.validate(d)?;
    let p = d.p();
    if p > ORACLE_MAX_P {
        return Err(IcpError::TooManyVariables { got: p, limit: ORACLE_MAX_P });
    }
    let max_size = cfg.max_set_size.unwrap_or(p);
    let test = base_test(cfg);
    let restricted: Vec<Dataset> = if cfg.robust_v > 0 {
        env_subsets(d.num_envs(), d.num_envs() - cfg.robust_v)
            .iter()
            .map(|s| d.restrict_envs(s))
            .collect::<Result<_>>()?
    } else {
        vec![d.clone()]
    };
    let mut all: Vec<(Vec<usize>, f64)> = Vec::new();
    for mask in 0u32..(1u32 << p) {
        let set: Vec<usize> = (0..p).filter(|j| mask & (1 << j) != 0).collect();
        if set.len() > max_size {
            continue;
        }
        let mut pv = 0.0f64;
        for r in &restricted {
            pv = pv.max(test(r, &set)?);
        }
        all.push((set, pv));
    }
    all.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));

    // Apply the stopping rule to the complete, ordered list.
    let mut cut = all.len();
    let mut stopped = false;
    if cfg.early_stopping {
        let mut acc: Vec<&Vec<usize>> = Vec::new();
        for (i, (s, pv)) in all.iter().enumerate() {
            if *pv < cfg.alpha {
                continue;
            }
            acc.push(s);
            let inter = acc.iter().skip(1).fold(acc[0].clone(), |a, b| intersect(&a, b));
            if s.is_empty() || (acc.len() >= 2 && inter.is_empty()) {
                cut = i + 1;
                stopped = true;
                break;
            }
        }
    }
    all.truncate(cut);
    let regions = regions_for(d, cfg.alpha, &all)?;
    Ok(assemble(p, cfg.alpha, cfg.gof_cutoff, all, regions, stopped))
}
