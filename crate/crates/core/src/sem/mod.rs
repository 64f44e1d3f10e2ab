//! Linear Gaussian structural equation models with interventions.
//!
//! Node `j` follows `X_j = Σ_k beta[j][k] X_k + shift_j + scale_j · ε_j` with
//! `ε_j ~ N(0, sigma_j²)`, or takes a fixed value after a do-intervention.
//! Noise interventions multiply `ε_j` by a (possibly random) factor and add a
//! (possibly random) shift; random factors are drawn fresh for every sample.

mod fixtures;
mod hidden_iv;
mod scenario;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::{IcpError, Result};
use crate::linalg::Matrix;

pub use fixtures::{appendix_a_specs, remark_ii_multiplier, Fixture};
pub use hidden_iv::{hidden_iv_scenario, HiddenIvParams, HiddenScenario};
pub use scenario::{
    generate_scenario, random_sem, simultaneous_noise_scenario, Scenario, ScenarioParams, ScenarioSetup,
    SimultaneousNoise,
};

/// A scalar that is either fixed or drawn per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Draw {
    Fixed(f64),
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
}

impl Draw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Draw::Fixed(v) => v,
            Draw::Uniform { lo, hi } => {
                if hi > lo {
                    rng.random_range(lo..hi)
                } else {
                    lo
                }
            }
            Draw::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
        }
    }

    /// `E[D²]`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            Draw::Fixed(v) => v * v,
            Draw::Uniform { lo, hi } => {
                if hi > lo {
                    (hi * hi * hi - lo * lo * lo) / (3.0 * (hi - lo))
                } else {
                    lo * lo
                }
            }
            Draw::Normal { mean, sd } => mean * mean + sd * sd,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemSpec {
    pub names: Vec<String>,
    /// Topological order of the nodes.
    pub order: Vec<usize>,
    /// `beta[j][k]` is the coefficient of `X_k` in the equation of `X_j`.
    pub beta: Vec<Vec<f64>>,
    /// Noise standard deviations.
    pub sigma: Vec<f64>,
    /// Constant additive shifts.
    pub mu_shift: Vec<f64>,
    /// Do-intervened nodes and their values.
    pub fixed: Vec<Option<f64>>,
    /// Random per-sample noise multipliers.
    pub multipliers: Vec<Vec<Draw>>,
    /// Random per-sample additive shifts.
    pub shifts: Vec<Vec<Draw>>,
    pub target: usize,
}

impl SemSpec {
    pub fn new(
        names: Vec<String>,
        order: Vec<usize>,
        beta: Vec<Vec<f64>>,
        sigma: Vec<f64>,
        target: usize,
    ) -> Result<Self> {
        let m = names.len();
        let spec = SemSpec {
            names,
            order,
            beta,
            sigma,
            mu_shift: vec![0.0; m],
            fixed: vec![None; m],
            multipliers: vec![Vec::new(); m],
            shifts: vec![Vec::new(); m],
            target,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a model from weighted edges `(from, to, coefficient)`; the
    /// topological order is derived from the edges (ties by node index).
    pub fn from_edges(
        names: Vec<String>,
        edges: &[(usize, usize, f64)],
        sigma: Vec<f64>,
        target: usize,
    ) -> Result<Self> {
        let m = names.len();
        let mut beta = vec![vec![0.0; m]; m];
        let mut indeg = vec![0usize; m];
        for &(from, to, c) in edges {
            if from >= m || to >= m || from == to {
                return Err(IcpError::DimensionMismatch("edge endpoints"));
            }
            if beta[to][from] == 0.0 && c != 0.0 {
                indeg[to] += 1;
            }
            beta[to][from] = c;
        }
        let mut order = Vec::with_capacity(m);
        let mut done = vec![false; m];
        while order.len() < m {
            let next = (0..m)
                .find(|&j| !done[j] && indeg[j] == 0)
                .ok_or(IcpError::DimensionMismatch("edges contain a cycle"))?;
            done[next] = true;
            order.push(next);
            for j in 0..m {
                if beta[j][next] != 0.0 {
                    indeg[j] -= 1;
                }
            }
        }
        SemSpec::new(names, order, beta, sigma, target)
    }

    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }

    fn validate(&self) -> Result<()> {
        let m = self.names.len();
        if self.beta.len() != m || self.beta.iter().any(|r| r.len() != m) || self.sigma.len() != m || self.target >= m {
            return Err(IcpError::DimensionMismatch("sem specification"));
        }
        let mut pos = vec![usize::MAX; m];
        for (i, &j) in self.order.iter().enumerate() {
            if j >= m || pos[j] != usize::MAX {
                return Err(IcpError::DimensionMismatch("order is not a permutation"));
            }
            pos[j] = i;
        }
        if self.order.len() != m {
            return Err(IcpError::DimensionMismatch("order is not a permutation"));
        }
        for j in 0..m {
            for k in 0..m {
                if self.beta[j][k] != 0.0 && pos[k] >= pos[j] {
                    return Err(IcpError::DimensionMismatch("coefficients violate the topological order"));
                }
            }
            if self.fixed[j].is_none() && !(self.sigma[j] > 0.0) {
                return Err(IcpError::DomainError("noise standard deviations must be positive"));
            }
        }
        Ok(())
    }

    /// Support of the structural equation of node `j`.
    pub fn parents(&self, j: usize) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&k| self.beta[j][k] != 0.0).collect()
    }

    /// Parents of the target, as indices into [`SemSpec::predictor_nodes`].
    pub fn target_parents_as_predictors(&self) -> Vec<usize> {
        let preds = self.predictor_nodes();
        self.parents(self.target)
            .into_iter()
            .map(|k| preds.iter().position(|&q| q == k).expect("parent is a predictor"))
            .collect()
    }

    /// All nodes other than the target, in index order.
    pub fn predictor_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&j| j != self.target).collect()
    }

    /// Draws `n` samples; column `j` of the result is node `j`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Matrix {
        let m = self.num_nodes();
        let mut out = Matrix::zeros(n, m);
        let mut row = vec![0.0; m];
        for i in 0..n {
            for &j in &self.order {
                row[j] = match self.fixed[j] {
                    Some(v) => v,
                    None => {
                        let mut v = self.mu_shift[j];
                        for (k, b) in self.beta[j].iter().enumerate() {
                            if *b != 0.0 {
                                v += b * row[k];
                            }
                        }
                        for s in &self.shifts[j] {
                            v += s.sample(rng);
                        }
                        let mut scale = self.sigma[j];
                        for a in &self.multipliers[j] {
                            scale *= a.sample(rng);
                        }
                        let z: f64 = StandardNormal.sample(rng);
                        v + scale * z
                    }
                };
            }
            for j in 0..m {
                out.set(i, j, row[j]);
            }
        }
        out
    }

    /// Replaces the equations of the assigned nodes by constants.
    pub fn do_intervention(&self, assignments: &[(usize, f64)], allow_target: bool) -> Result<SemSpec> {
        let mut out = self.clone();
        for &(j, a) in assignments {
            if j >= self.num_nodes() {
                return Err(IcpError::DimensionMismatch("intervened node"));
            }
            if j == self.target && !allow_target {
                return Err(IcpError::TargetIntervened(j));
            }
            out.beta[j].iter_mut().for_each(|b| *b = 0.0);
            out.fixed[j] = Some(a);
            out.multipliers[j].clear();
            out.shifts[j].clear();
        }
        Ok(out)
    }

    /// Scales and shifts the noise of the listed nodes; coefficients are kept.
    pub fn noise_intervention(
        &self,
        scales: &[(usize, Draw)],
        shifts: &[(usize, Draw)],
        allow_target: bool,
    ) -> Result<SemSpec> {
        let mut out = self.clone();
        for &(j, _) in scales.iter().chain(shifts) {
            if j >= self.num_nodes() {
                return Err(IcpError::DimensionMismatch("intervened node"));
            }
            if j == self.target && !allow_target {
                return Err(IcpError::TargetIntervened(j));
            }
        }
        for &(j, a) in scales {
            match a {
                Draw::Fixed(v) => out.sigma[j] *= libm::fabs(v),
                other => out.multipliers[j].push(other),
            }
        }
        for &(j, c) in shifts {
            match c {
                Draw::Fixed(v) => out.mu_shift[j] += v,
                other => out.shifts[j].push(other),
            }
        }
        Ok(out)
    }
}

/// Samples each `(spec, n)` pair as one environment and splits the columns
/// into the target and the predictors. All specs must share names and target.
pub fn sample_environments<R: Rng + ?Sized>(envs: &[(&SemSpec, usize)], rng: &mut R) -> Result<Dataset> {
    let first = envs.first().ok_or(IcpError::DimensionMismatch("no environments"))?.0;
    let preds = first.predictor_nodes();
    let names = preds.iter().map(|&j| first.names[j].clone()).collect();
    let mut blocks = Vec::with_capacity(envs.len());
    for (spec, n) in envs {
        if spec.names != first.names || spec.target != first.target {
            return Err(IcpError::DimensionMismatch("environments disagree on nodes"));
        }
        let all = spec.sample(*n, rng);
        blocks.push((all.select_cols(&preds), all.col(first.target).to_vec()));
    }
    Dataset::from_environments(names, first.names[first.target].clone(), blocks)
}

pub(crate) fn node_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| alloc::format!("X{i}")).collect()
}
