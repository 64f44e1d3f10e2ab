//! Randomised two-environment benchmark scenarios: a random DAG observed
//! once without and once with simultaneous noise interventions.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::{node_names, sample_environments, Draw, SemSpec};
use crate::data::Dataset;
use crate::error::{IcpError, Result};

/// Parameters of one scenario. Grid values are multiples of 0.1.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub n_obs: usize,
    pub n_int: usize,
    /// Number of nodes, target included.
    pub p: usize,
    /// Expected degree of the DAG.
    pub k_avg: f64,
    pub lb1: f64,
    pub delta_b1: f64,
    pub sigma2_min: f64,
    pub sigma2_max: f64,
    pub a_min: f64,
    pub delta_a: f64,
    pub coef_change: bool,
    pub lb2: f64,
    pub ub2: f64,
    pub single_intervention: bool,
    /// Fraction of intervened nodes when `single_intervention` is false.
    pub theta: f64,
}

fn tenths<R: Rng + ?Sized>(rng: &mut R, lo: u32, hi: u32) -> f64 {
    rng.random_range(lo..=hi) as f64 / 10.0
}

impl ScenarioParams {
    /// Samples every parameter independently from its range.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let n_obs = 100 * rng.random_range(1..=5usize);
        let n_int = 100 * rng.random_range(1..=5usize);
        let p = rng.random_range(5..=40usize);
        let k_avg = rng.random_range(1..=4u32) as f64;
        let lb1 = tenths(rng, 1, 20);
        let delta_b1 = tenths(rng, 1, 10);
        let sigma2_min = tenths(rng, 1, 20);
        let sigma2_max = tenths(rng, libm::round(sigma2_min * 10.0) as u32, 20);
        let a_min = tenths(rng, 1, 40);
        let delta_a = if rng.random_bool(1.0 / 3.0) { 0.0 } else { tenths(rng, 1, 20) };
        let coef_change = !rng.random_bool(2.0 / 3.0);
        let (u1, u2) = (tenths(rng, 1, 20), tenths(rng, 1, 20));
        let (lb2, ub2) = (u1.min(u2), u1.max(u2));
        let single_intervention = rng.random_bool(1.0 / 6.0);
        let theta = 1.0 / tenths(rng, 11, 30);
        ScenarioParams {
            n_obs,
            n_int,
            p,
            k_avg,
            lb1,
            delta_b1,
            sigma2_min,
            sigma2_max,
            a_min,
            delta_a,
            coef_change,
            lb2,
            ub2,
            single_intervention,
            theta,
        }
    }

    pub fn simultaneous_noise(&self) -> SimultaneousNoise {
        SimultaneousNoise {
            a_min: self.a_min,
            delta_a: self.delta_a,
            coef_change: self.coef_change,
            lb2: self.lb2,
            ub2: self.ub2,
            single: self.single_intervention,
            theta: self.theta,
            per_sample: true,
        }
    }
}

fn signed_magnitude<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let mag = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Random DAG over `params.p` nodes: a random order, each ordered pair
/// connected with probability `k/(p−1)`, coefficients with random sign and
/// magnitude in `[lb1, lb1 + Δb1]`, noise variances in
/// `[σ²_min, σ²_max]`, and a uniformly chosen target.
pub fn random_sem<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> Result<SemSpec> {
    let p = params.p;
    if p < 2 || params.k_avg < 1.0 || params.k_avg > (p - 1) as f64 {
        return Err(IcpError::InfeasibleConfig("random_sem needs p ≥ 2 and 1 ≤ k ≤ p − 1".into()));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    let prob = (params.k_avg / (p - 1) as f64).min(1.0);
    let mut beta = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i + 1..p {
            if rng.random_bool(prob) {
                beta[order[j]][order[i]] = signed_magnitude(rng, params.lb1, params.lb1 + params.delta_b1);
            }
        }
    }
    let sigma = (0..p)
        .map(|_| {
            let v = if params.sigma2_max > params.sigma2_min {
                rng.random_range(params.sigma2_min..=params.sigma2_max)
            } else {
                params.sigma2_min
            };
            libm::sqrt(v)
        })
        .collect();
    let target = rng.random_range(0..p);
    SemSpec::new(node_names(p), order, beta, sigma, target)
}

/// Settings for simultaneous noise interventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimultaneousNoise {
    pub a_min: f64,
    pub delta_a: f64,
    pub coef_change: bool,
    pub lb2: f64,
    pub ub2: f64,
    /// Intervene on exactly one node.
    pub single: bool,
    pub theta: f64,
    /// Draw multipliers per sample; otherwise once per node.
    pub per_sample: bool,
}

/// Intervened copy of `spec` and the intervened nodes (sorted). The target
/// may be among them.
pub fn simultaneous_noise_scenario<R: Rng + ?Sized>(
    spec: &SemSpec,
    settings: &SimultaneousNoise,
    rng: &mut R,
) -> Result<(SemSpec, Vec<usize>)> {
    let m = spec.num_nodes();
    let count = if settings.single { 1 } else { (libm::round(settings.theta * m as f64) as usize).clamp(1, m) };
    let mut nodes: Vec<usize> = index::sample(rng, m, count).into_vec();
    nodes.sort_unstable();
    let hi = settings.a_min + settings.delta_a;
    let scales: Vec<(usize, Draw)> = nodes
        .iter()
        .map(|&j| {
            let draw = if settings.delta_a == 0.0 {
                Draw::Fixed(settings.a_min)
            } else if settings.per_sample {
                Draw::Uniform { lo: settings.a_min, hi }
            } else {
                Draw::Fixed(rng.random_range(settings.a_min..=hi))
            };
            (j, draw)
        })
        .collect();
    let mut out = spec.noise_intervention(&scales, &[], true)?;
    if settings.coef_change {
        for &j in &nodes {
            for k in 0..m {
                if out.beta[j][k] != 0.0 {
                    out.beta[j][k] = signed_magnitude(rng, settings.lb2, settings.ub2);
                }
            }
        }
    }
    Ok((out, nodes))
}

/// Structure of a scenario; data can be redrawn with
/// [`ScenarioSetup::sample_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSetup {
    pub params: ScenarioParams,
    pub observational: SemSpec,
    pub interventional: SemSpec,
    pub intervened: Vec<usize>,
}

impl ScenarioSetup {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Result<Self> {
        let params = ScenarioParams::sample(rng);
        Self::from_params(params, rng)
    }

    pub fn from_params<R: Rng + ?Sized>(params: ScenarioParams, rng: &mut R) -> Result<Self> {
        let observational = random_sem(&params, rng)?;
        let (interventional, intervened) =
            simultaneous_noise_scenario(&observational, &params.simultaneous_noise(), rng)?;
        Ok(ScenarioSetup { params, observational, interventional, intervened })
    }

    pub fn target_intervened(&self) -> bool {
        self.intervened.contains(&self.observational.target)
    }

    /// Parents of the target as predictor indices.
    pub fn true_parents(&self) -> Vec<usize> {
        self.observational.target_parents_as_predictors()
    }

    /// Environment 0 is observational, environment 1 interventional.
    pub fn sample_dataset<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Dataset> {
        sample_environments(&[(&self.observational, self.params.n_obs), (&self.interventional, self.params.n_int)], rng)
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub setup: ScenarioSetup,
    pub dataset: Dataset,
    /// Parents of the target, as predictor indices.
    pub parents: Vec<usize>,
}

/// Samples parameters, structure and one dataset.
pub fn generate_scenario<R: Rng + ?Sized>(rng: &mut R) -> Result<Scenario> {
    let setup = ScenarioSetup::sample(rng)?;
    let dataset = setup.sample_dataset(rng)?;
    let parents = setup.true_parents();
    Ok(Scenario { setup, dataset, parents })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn complete_dag_when_k_is_maximal() {
        let mut params = ScenarioParams::sample(&mut rng_from_seed(3));
        params.p = 6;
        params.k_avg = 5.0;
        let s = random_sem(&params, &mut rng_from_seed(11)).unwrap();
        let edges: usize = (0..6).map(|j| s.parents(j).len()).sum();
        assert_eq!(edges, 15);
        // Every node has all of its predecessors in the order as parents.
        for (i, &j) in s.order.iter().enumerate() {
            let mut expect: Vec<usize> = s.order[..i].to_vec();
            expect.sort_unstable();
            assert_eq!(s.parents(j), expect);
        }
    }

    #[test]
    fn fixed_multipliers_when_delta_is_zero() {
        let mut params = ScenarioParams::sample(&mut rng_from_seed(5));
        params.delta_a = 0.0;
        params.coef_change = false;
        let obs = random_sem(&params, &mut rng_from_seed(6)).unwrap();
        let (int, nodes) =
            simultaneous_noise_scenario(&obs, &params.simultaneous_noise(), &mut rng_from_seed(7)).unwrap();
        assert!(int.multipliers.iter().all(|m| m.is_empty()));
        for &j in &nodes {
            assert!((int.sigma[j] - obs.sigma[j] * params.a_min).abs() < 1e-12);
        }
        assert_eq!(int.beta, obs.beta);
    }

    #[test]
    fn theta_one_intervenes_everywhere() {
        let mut params = ScenarioParams::sample(&mut rng_from_seed(8));
        params.single_intervention = false;
        params.theta = 1.0;
        let obs = random_sem(&params, &mut rng_from_seed(9)).unwrap();
        let (_, nodes) =
            simultaneous_noise_scenario(&obs, &params.simultaneous_noise(), &mut rng_from_seed(10)).unwrap();
        assert_eq!(nodes.len(), params.p);
    }

    #[test]
    fn scenario_is_seed_deterministic() {
        let a = generate_scenario(&mut rng_from_seed(42)).unwrap();
        let b = generate_scenario(&mut rng_from_seed(42)).unwrap();
        assert_eq!(a.setup, b.setup);
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.dataset.num_envs(), 2);
        assert_eq!(a.parents, a.setup.observational.target_parents_as_predictors());
    }
}
