//! JSON reports. Floats are rounded to 12 significant digits when a report
//! is built and objects are written with sorted keys, so equal inputs give
//! byte-identical output and a parsed report equals the original.

use serde::{Deserialize, Serialize};

use icp_core::{Dataset, IcpConfig, IcpResult};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Rounds to 12 significant digits; non-finite values pass through.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn bound(x: f64) -> Option<f64> {
    x.is_finite().then(|| round12(x))
}

/// Serializes with keys sorted at every level, followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub target: String,
    pub env_col: Option<String>,
    pub split_col: Option<String>,
    pub cutpoints: Option<Vec<f64>>,
    pub keep_split: bool,
    pub alpha: f64,
    pub method: u8,
    pub max_set_size: Option<usize>,
    pub preselect: Option<usize>,
    pub gof_cutoff: f64,
    pub robust_v: usize,
    pub hidden: bool,
    pub seed: u64,
    pub subsample_cap: Option<usize>,
    pub early_stopping: bool,
}

impl AnalysisConfig {
    pub fn icp_config(&self) -> IcpConfig {
        IcpConfig {
            alpha: self.alpha,
            method: icp_core::Method::from_number(self.method).unwrap_or(icp_core::Method::Residuals),
            max_set_size: self.max_set_size,
            preselect: self.preselect,
            gof_cutoff: self.gof_cutoff,
            robust_v: self.robust_v,
            seed: self.seed,
            subsample_cap: self.subsample_cap,
            early_stopping: self.early_stopping,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedReport {
    pub set: Vec<String>,
    pub p_value: f64,
}

/// `None` bounds are unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub variable: String,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub contains_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n: usize,
    pub predictors: Vec<String>,
    pub environments: Vec<String>,
    pub env_sizes: Vec<usize>,
    pub constant_predictors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub config: AnalysisConfig,
    pub data: DataSummary,
    pub accepted: Vec<AcceptedReport>,
    pub s_hat: Vec<String>,
    pub intervals: Vec<IntervalReport>,
    pub model_rejected: bool,
    pub best_p: f64,
    pub tested_count: usize,
    pub stopped_early: bool,
    pub notes: Vec<String>,
    /// Wall-clock seconds; only present when requested.
    pub runtime_seconds: Option<f64>,
}

impl AnalysisReport {
    pub fn new(config: AnalysisConfig, d: &Dataset, r: &IcpResult, notes: Vec<String>) -> Self {
        let names = |s: &[usize]| s.iter().map(|&j| d.names()[j].clone()).collect::<Vec<_>>();
        let mut config = config;
        config.alpha = round12(config.alpha);
        config.gof_cutoff = round12(config.gof_cutoff);
        if let Some(c) = config.cutpoints.as_mut() {
            c.iter_mut().for_each(|v| *v = round12(*v));
        }
        AnalysisReport {
            schema_version: SCHEMA_VERSION,
            config,
            data: DataSummary {
                n: d.n(),
                predictors: d.names().to_vec(),
                environments: d.env_labels().to_vec(),
                env_sizes: d.env_sizes(),
                constant_predictors: names(&d.constant_columns()),
            },
            accepted: r
                .accepted
                .iter()
                .map(|a| AcceptedReport { set: names(&a.set), p_value: round12(a.p_value) })
                .collect(),
            s_hat: names(&r.s_hat),
            intervals: r
                .intervals
                .iter()
                .enumerate()
                .map(|(j, iv)| IntervalReport {
                    variable: d.names()[j].clone(),
                    lo: bound(iv.lo),
                    hi: bound(iv.hi),
                    contains_zero: iv.contains_zero,
                })
                .collect(),
            model_rejected: r.model_rejected,
            best_p: round12(r.best_p),
            tested_count: r.tested_count,
            stopped_early: r.stopped_early,
            notes,
            runtime_seconds: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub rate: f64,
    /// 95% Wilson score interval.
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl RateSummary {
    pub fn new(hits: usize, n: usize) -> Self {
        if n == 0 {
            return RateSummary { rate: 0.0, ci_lo: 0.0, ci_hi: 1.0 };
        }
        let (lo, hi) = wilson(hits, n, 1.959_963_984_540_054);
        RateSummary { rate: round12(hits as f64 / n as f64), ci_lo: round12(lo), ci_hi: round12(hi) }
    }
}

/// Wilson score interval for `hits` out of `n` at normal quantile `z`.
pub fn wilson(hits: usize, n: usize, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use icp_core::seed::rng_from_seed;
    use icp_core::sem::Fixture;

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(1.234_567_890_123_456e-7), 1.234_567_890_12e-7);
        assert!(round12(f64::INFINITY).is_infinite());
    }

    #[test]
    fn wilson_known_value() {
        let (lo, hi) = wilson(5, 100, 1.96);
        assert!((lo - 0.021_543).abs() < 1e-5 && (hi - 0.111_750).abs() < 1e-5, "{lo} {hi}");
    }

    #[test]
    fn report_round_trips_and_sorts_keys() {
        let d = Fixture::AppendixA.generate(300, &mut rng_from_seed(1)).unwrap();
        let cfg = AnalysisConfig {
            target: "Y".into(),
            env_col: Some("env".into()),
            split_col: None,
            cutpoints: None,
            keep_split: false,
            alpha: 0.05,
            method: 2,
            max_set_size: None,
            preselect: None,
            gof_cutoff: 0.0,
            robust_v: 0,
            hidden: false,
            seed: 0,
            subsample_cap: Some(500),
            early_stopping: false,
        };
        let r = icp_core::run_icp(&d, &cfg.icp_config()).unwrap();
        let rep = AnalysisReport::new(cfg, &d, &r, vec![]);
        let s = to_json(&rep).unwrap();
        let back: AnalysisReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rep);
        assert_eq!(to_json(&back).unwrap(), s);
        let keys: Vec<&str> =
            s.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim().split('"').nth(1).unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
    }
}
