//! Serializable mirrors of simulator types. Coefficient matrices are stored
//! as sparse `(from, to, coefficient)` triplets.

use serde::{Deserialize, Serialize};

use icp_core::sem::{Draw, ScenarioParams, ScenarioSetup, SemSpec};

use crate::report::round12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub n_obs: usize,
    pub n_int: usize,
    pub p: usize,
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
    pub theta: f64,
}

impl From<&ScenarioParams> for ParamsRecord {
    fn from(s: &ScenarioParams) -> Self {
        ParamsRecord {
            n_obs: s.n_obs,
            n_int: s.n_int,
            p: s.p,
            k_avg: round12(s.k_avg),
            lb1: round12(s.lb1),
            delta_b1: round12(s.delta_b1),
            sigma2_min: round12(s.sigma2_min),
            sigma2_max: round12(s.sigma2_max),
            a_min: round12(s.a_min),
            delta_a: round12(s.delta_a),
            coef_change: s.coef_change,
            lb2: round12(s.lb2),
            ub2: round12(s.ub2),
            single_intervention: s.single_intervention,
            theta: round12(s.theta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DrawRecord {
    Fixed { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
}

impl From<&Draw> for DrawRecord {
    fn from(d: &Draw) -> Self {
        match *d {
            Draw::Fixed(v) => DrawRecord::Fixed { value: round12(v) },
            Draw::Uniform { lo, hi } => DrawRecord::Uniform { lo: round12(lo), hi: round12(hi) },
            Draw::Normal { mean, sd } => DrawRecord::Normal { mean: round12(mean), sd: round12(sd) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRecord {
    pub names: Vec<String>,
    pub target: usize,
    pub order: Vec<usize>,
    pub edges: Vec<(usize, usize, f64)>,
    pub sigma: Vec<f64>,
    pub mu_shift: Vec<f64>,
    pub fixed: Vec<Option<f64>>,
    /// `(node, draw)` pairs of random noise multipliers.
    pub multipliers: Vec<(usize, DrawRecord)>,
    pub shifts: Vec<(usize, DrawRecord)>,
}

impl From<&SemSpec> for SpecRecord {
    fn from(s: &SemSpec) -> Self {
        let m = s.num_nodes();
        let mut edges = Vec::new();
        for to in 0..m {
            for from in 0..m {
                let c = s.beta[to][from];
                if c != 0.0 {
                    edges.push((from, to, round12(c)));
                }
            }
        }
        let flat = |v: &Vec<Vec<Draw>>| {
            v.iter().enumerate().flat_map(|(j, ds)| ds.iter().map(move |d| (j, DrawRecord::from(d)))).collect()
        };
        SpecRecord {
            names: s.names.clone(),
            target: s.target,
            order: s.order.clone(),
            edges,
            sigma: s.sigma.iter().map(|v| round12(*v)).collect(),
            mu_shift: s.mu_shift.iter().map(|v| round12(*v)).collect(),
            fixed: s.fixed.iter().map(|v| v.map(round12)).collect(),
            multipliers: flat(&s.multipliers),
            shifts: flat(&s.shifts),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub scenario: usize,
    pub seed: u64,
    pub params: ParamsRecord,
    pub observational: SpecRecord,
    pub interventional: SpecRecord,
    pub intervened: Vec<usize>,
    pub target_intervened: bool,
}

impl ScenarioRecord {
    pub fn new(scenario: usize, seed: u64, setup: &ScenarioSetup) -> Self {
        ScenarioRecord {
            scenario,
            seed,
            params: (&setup.params).into(),
            observational: (&setup.observational).into(),
            interventional: (&setup.interventional).into(),
            intervened: setup.intervened.clone(),
            target_intervened: setup.target_intervened(),
        }
    }
}
