//! Benchmark sweep over randomly generated scenarios: each scenario is
//! sampled once, then `reps` datasets are drawn from it and analysed.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use icp_core::seed::{derive_seed, rng_from_seed};
use icp_core::sem::ScenarioSetup;
use icp_core::{run_icp, IcpConfig, Method};

use crate::error::Result;
use crate::records::{ParamsRecord, ScenarioRecord};
use crate::report::{round12, RateSummary, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub scenarios: usize,
    pub reps: usize,
    pub seed: u64,
    pub method: u8,
    pub alpha: f64,
    /// Caps applied per dataset (clamped to the number of predictors).
    pub max_set_size: Option<usize>,
    pub preselect: Option<usize>,
    pub subsample_cap: Option<usize>,
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            scenarios: 10,
            reps: 10,
            seed: 0,
            method: 2,
            alpha: 0.05,
            max_set_size: Some(3),
            preselect: Some(10),
            subsample_cap: Some(500),
            timing: false,
        }
    }
}

/// One analysed dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub scenario: usize,
    pub rep: usize,
    pub seed: u64,
    pub p: usize,
    pub n_obs: usize,
    pub n_int: usize,
    pub target_intervened: bool,
    pub parents: Vec<String>,
    pub s_hat: Vec<String>,
    /// `Ŝ = S*`.
    pub success: bool,
    /// `Ŝ ⊈ S*`.
    pub error: bool,
    pub engine_error: Option<String>,
    pub runtime_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: usize,
    pub seed: u64,
    pub params: ParamsRecord,
    pub parents: Vec<String>,
    pub target_intervened: bool,
    pub runs: usize,
    pub engine_errors: usize,
    pub success: RateSummary,
    pub fwer: RateSummary,
    pub runtime_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Runs that completed (engine errors excluded).
    pub runs: usize,
    pub engine_errors: usize,
    pub success: RateSummary,
    /// Mean of the error flags `Ŝ ⊈ S*`.
    pub fwer: RateSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub config: BenchConfig,
    pub scenarios: Vec<ScenarioSummary>,
    pub aggregate: Aggregate,
}

pub struct BenchOutput {
    pub rows: Vec<RunRow>,
    pub report: BenchmarkReport,
    pub scenarios: Vec<ScenarioRecord>,
}

pub fn scenario_seed(base: u64, scenario: usize) -> u64 {
    derive_seed(base, scenario as u64)
}

pub fn rep_seed(scenario_seed: u64, rep: usize) -> u64 {
    derive_seed(scenario_seed, rep as u64 + 1)
}

fn analyse(setup: &ScenarioSetup, cfg: &BenchConfig, scenario: usize, rep: usize, seed: u64) -> RunRow {
    let start = Instant::now();
    let names: Vec<String> =
        setup.observational.predictor_nodes().iter().map(|&j| setup.observational.names[j].clone()).collect();
    let parents: Vec<usize> = setup.true_parents();
    let label = |s: &[usize]| s.iter().map(|&j| names[j].clone()).collect::<Vec<_>>();
    let mut row = RunRow {
        scenario,
        rep,
        seed,
        p: setup.params.p,
        n_obs: setup.params.n_obs,
        n_int: setup.params.n_int,
        target_intervened: setup.target_intervened(),
        parents: label(&parents),
        s_hat: Vec::new(),
        success: false,
        error: false,
        engine_error: None,
        runtime_seconds: None,
    };
    let outcome = setup.sample_dataset(&mut rng_from_seed(seed)).and_then(|d| {
        let preselect = cfg.preselect.map(|q| q.min(d.p()));
        let pool = preselect.unwrap_or(d.p());
        let icp = IcpConfig {
            alpha: cfg.alpha,
            method: Method::from_number(cfg.method).unwrap_or(Method::Residuals),
            max_set_size: cfg.max_set_size.map(|m| m.min(pool)),
            preselect,
            seed,
            subsample_cap: cfg.subsample_cap,
            ..IcpConfig::default()
        };
        run_icp(&d, &icp)
    });
    match outcome {
        Ok(r) => {
            row.success = r.s_hat == parents;
            row.error = !r.s_hat.iter().all(|j| parents.contains(j));
            row.s_hat = label(&r.s_hat);
        }
        Err(e) => row.engine_error = Some(e.to_string()),
    }
    if cfg.timing {
        row.runtime_seconds = Some(round12(start.elapsed().as_secs_f64()));
    }
    row
}

/// Runs the sweep. Scenario `s` uses seed `derive(seed, s)`; its replicate
/// `r` draws data and subsamples with `derive(scenario seed, r + 1)`.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchOutput> {
    let setups: Vec<(u64, ScenarioSetup)> = (0..cfg.scenarios)
        .into_par_iter()
        .map(|s| {
            let seed = scenario_seed(cfg.seed, s);
            ScenarioSetup::sample(&mut rng_from_seed(seed)).map(|setup| (seed, setup))
        })
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.scenarios).flat_map(|s| (0..cfg.reps).map(move |r| (s, r))).collect();
    let mut rows: Vec<RunRow> = jobs
        .par_iter()
        .map(|&(s, r)| {
            let (sseed, setup) = &setups[s];
            analyse(setup, cfg, s, r, rep_seed(*sseed, r))
        })
        .collect();
    rows.sort_by_key(|r| (r.scenario, r.rep));

    let summarise = |rows: &[&RunRow]| {
        let done: Vec<&&RunRow> = rows.iter().filter(|r| r.engine_error.is_none()).collect();
        let successes = done.iter().filter(|r| r.success).count();
        let errors = done.iter().filter(|r| r.error).count();
        (
            done.len(),
            rows.len() - done.len(),
            RateSummary::new(successes, done.len()),
            RateSummary::new(errors, done.len()),
        )
    };
    let mut summaries = Vec::with_capacity(cfg.scenarios);
    let mut records = Vec::with_capacity(cfg.scenarios);
    for (s, (seed, setup)) in setups.iter().enumerate() {
        let mine: Vec<&RunRow> = rows.iter().filter(|r| r.scenario == s).collect();
        let (runs, engine_errors, success, fwer) = summarise(&mine);
        let runtime = cfg.timing.then(|| round12(mine.iter().filter_map(|r| r.runtime_seconds).sum()));
        let record = ScenarioRecord::new(s, *seed, setup);
        let names: Vec<String> =
            setup.observational.predictor_nodes().iter().map(|&j| setup.observational.names[j].clone()).collect();
        summaries.push(ScenarioSummary {
            scenario: s,
            seed: *seed,
            params: record.params.clone(),
            parents: setup.true_parents().iter().map(|&j| names[j].clone()).collect(),
            target_intervened: setup.target_intervened(),
            runs,
            engine_errors,
            success,
            fwer,
            runtime_seconds: runtime,
        });
        records.push(record);
    }
    let all: Vec<&RunRow> = rows.iter().collect();
    let (runs, engine_errors, success, fwer) = summarise(&all);
    let mut config = cfg.clone();
    config.alpha = round12(config.alpha);
    let report = BenchmarkReport {
        schema_version: SCHEMA_VERSION,
        config,
        scenarios: summaries,
        aggregate: Aggregate { runs, engine_errors, success, fwer },
    };
    Ok(BenchOutput { rows, report, scenarios: records })
}

/// Long-format table, one row per scenario and replicate. Sets are written
/// as `;`-separated variable names.
pub fn rows_table(rows: &[RunRow], timing: bool) -> icp_core::RawTable {
    let mut headers: Vec<String> = [
        "scenario",
        "rep",
        "seed",
        "p",
        "n_obs",
        "n_int",
        "target_intervened",
        "parents",
        "s_hat",
        "success",
        "error",
        "engine_error",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if timing {
        headers.push("runtime_seconds".into());
    }
    let body = rows
        .iter()
        .map(|r| {
            let mut v = vec![
                r.scenario.to_string(),
                r.rep.to_string(),
                r.seed.to_string(),
                r.p.to_string(),
                r.n_obs.to_string(),
                r.n_int.to_string(),
                r.target_intervened.to_string(),
                r.parents.join(";"),
                r.s_hat.join(";"),
                r.success.to_string(),
                r.error.to_string(),
                r.engine_error.clone().unwrap_or_default(),
            ];
            if timing {
                v.push(r.runtime_seconds.map(|t| t.to_string()).unwrap_or_default());
            }
            v
        })
        .collect();
    icp_core::RawTable::new(headers, body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_is_deterministic_and_consistent() {
        let cfg = BenchConfig { scenarios: 3, reps: 4, seed: 17, ..BenchConfig::default() };
        let a = run_benchmark(&cfg).unwrap();
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.report, b.report);
        assert_eq!(a.rows.len(), 12);
        let errors = a.rows.iter().filter(|r| r.engine_error.is_none() && r.error).count();
        let runs = a.report.aggregate.runs;
        assert_eq!(a.report.aggregate.fwer.rate, round12(errors as f64 / runs as f64));
        for r in &a.rows {
            assert!(!(r.success && r.error));
        }
    }
}
