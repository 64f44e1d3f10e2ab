//! Predictors confounded with the target by a hidden variable, where the
//! second environment adds an independent mean-zero perturbation to every
//! predictor:
//!
//! ```text
//! X = a·H + η + Z·1{I = 1}
//! Y = X γ* + b·H + ε
//! ```

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::{IcpError, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenIvParams {
    pub p: usize,
    pub n_per_env: usize,
    /// Standard deviation of each coordinate of `Z`; zero makes the
    /// environments identical.
    pub z_sd: f64,
    /// Magnitude range of the loadings `a`, `b` and of nonzero `γ*` entries.
    pub coef_lo: f64,
    pub coef_hi: f64,
}

impl Default for HiddenIvParams {
    fn default() -> Self {
        HiddenIvParams { p: 3, n_per_env: 2000, z_sd: 2.0, coef_lo: 0.5, coef_hi: 1.5 }
    }
}

#[derive(Debug, Clone)]
pub struct HiddenScenario {
    pub dataset: Dataset,
    pub gamma_star: Vec<f64>,
    /// Support of `γ*`.
    pub s_star: Vec<usize>,
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn signed<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let m = rng.random_range(lo..=hi);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Draws `γ*` (each coordinate nonzero with probability 1/2), loadings and
/// data for two environments of `n_per_env` rows each.
pub fn hidden_iv_scenario<R: Rng + ?Sized>(params: &HiddenIvParams, rng: &mut R) -> Result<HiddenScenario> {
    let p = params.p;
    if p < 2 {
        return Err(IcpError::InfeasibleConfig("hidden_iv_scenario needs p ≥ 2".into()));
    }
    let mut gamma = vec![0.0; p];
    for g in gamma.iter_mut() {
        if rng.random_bool(0.5) {
            *g = signed(rng, params.coef_lo, params.coef_hi);
        }
    }
    let loadings: Vec<f64> = (0..p).map(|_| signed(rng, params.coef_lo, params.coef_hi)).collect();
    let hidden_effect = signed(rng, params.coef_lo, params.coef_hi);
    let n = params.n_per_env;
    let mut blocks = Vec::with_capacity(2);
    for env in 0..2 {
        let mut x = Matrix::zeros(n, p);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let h = normal(rng);
            let mut yi = hidden_effect * h + normal(rng);
            for j in 0..p {
                let mut v = loadings[j] * h + normal(rng);
                if env == 1 {
                    v += params.z_sd * normal(rng);
                }
                x.set(i, j, v);
                yi += gamma[j] * v;
            }
            y.push(yi);
        }
        blocks.push((x, y));
    }
    let names = (1..=p).map(|i| format!("X{i}")).collect();
    let dataset = Dataset::from_environments(names, "Y".into(), blocks)?;
    let s_star = (0..p).filter(|&j| gamma[j] != 0.0).collect();
    Ok(HiddenScenario { dataset, gamma_star: gamma, s_star })
}
