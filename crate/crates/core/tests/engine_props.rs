//! Property checks for the subset search.

use icp_core::linalg::Matrix;
use icp_core::seed::rng_from_seed;
use icp_core::{brute_force_oracle, run_icp, Dataset, IcpConfig, Method};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

/// Random instance: the first `k` predictors cause `Y`, the rest are
/// children of `Y`; environments shift predictor means and scales and, with
/// `target_shift`, the noise of `Y` itself.
fn instance(seed: u64, p: usize, envs: usize, n: usize, k: usize, target_shift: bool) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-1.5..1.5)).collect();
    let mut cols = vec![Vec::new(); p];
    let mut y = Vec::new();
    let mut env = Vec::new();
    for e in 0..envs {
        let shifts: Vec<f64> = (0..p).map(|_| if e == 0 { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
        let noise = if target_shift && e > 0 { 2.0 } else { 1.0 };
        for _ in 0..n {
            let mut yi = noise * rng.sample::<f64, _>(StandardNormal);
            for j in 0..k {
                let v = shifts[j] + rng.sample::<f64, _>(StandardNormal);
                cols[j].push(v);
                yi += beta[j] * v;
            }
            for j in k..p {
                let v = beta[j] * yi + shifts[j] + rng.sample::<f64, _>(StandardNormal);
                cols[j].push(v);
            }
            y.push(yi);
            env.push(e);
        }
    }
    let names = (1..=p).map(|i| format!("X{i}")).collect();
    Dataset::new(Matrix::from_columns(n * envs, &cols).unwrap(), y, env, names, "Y".into()).unwrap()
}

fn same_intervals(a: &icp_core::IcpResult, b: &icp_core::IcpResult) -> bool {
    a.intervals.len() == b.intervals.len()
        && a.intervals.iter().zip(&b.intervals).all(|(x, y)| {
            let close = |u: f64, v: f64| u == v || (u - v).abs() <= 1e-12 * u.abs().max(1.0);
            close(x.lo, y.lo) && close(x.hi, y.hi) && x.contains_zero == y.contains_zero
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn search_agrees_with_brute_force(
        seed in any::<u64>(),
        p in 1usize..6,
        envs in 2usize..4,
        n in 15usize..40,
        k_frac in 0.0f64..1.0,
        target_shift in any::<bool>(),
        early in any::<bool>(),
        method in prop_oneof![Just(Method::Chow), Just(Method::Residuals)],
    ) {
        let k = (k_frac * (p + 1) as f64) as usize;
        let d = instance(seed, p, envs, n, k.min(p), target_shift);
        let cfg = IcpConfig { method, early_stopping: early, seed, ..IcpConfig::default() };
        let fast = run_icp(&d, &cfg).unwrap();
        let slow = brute_force_oracle(&d, &cfg).unwrap();
        prop_assert_eq!(&fast.s_hat, &slow.s_hat);
        prop_assert_eq!(&fast.tested, &slow.tested);
        prop_assert_eq!(fast.model_rejected, slow.model_rejected);
        prop_assert!(same_intervals(&fast, &slow));
    }

    #[test]
    fn s_hat_is_inside_every_accepted_set(seed in any::<u64>(), p in 1usize..6, n in 20usize..60) {
        let d = instance(seed, p, 3, n, p / 2, false);
        let r = run_icp(&d, &IcpConfig { early_stopping: false, ..IcpConfig::default() }).unwrap();
        for a in &r.accepted {
            prop_assert!(a.p_value >= 0.05);
            prop_assert!(r.s_hat.iter().all(|j| a.set.contains(j)));
        }
        for (s, pv) in &r.tested {
            prop_assert!((0.0..=1.0).contains(pv));
            prop_assert_eq!(*pv >= 0.05, r.accepted.iter().any(|a| &a.set == s));
        }
        prop_assert_eq!(r.tested_count, 1usize << p);
    }

    #[test]
    fn residual_test_ignores_target_scale(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let d = instance(seed, 3, 2, 30, 1, false);
        let y: Vec<f64> = d.y().iter().map(|v| v * scale).collect();
        let scaled = Dataset::new(d.x().clone(), y, d.env().to_vec(), d.names().to_vec(), "Y".into()).unwrap();
        let cfg = IcpConfig { early_stopping: false, ..IcpConfig::default() };
        let a = run_icp(&d, &cfg).unwrap();
        let b = run_icp(&scaled, &cfg).unwrap();
        for ((sa, pa), (sb, pb)) in a.tested.iter().zip(&b.tested) {
            prop_assert_eq!(sa, sb);
            prop_assert!((pa - pb).abs() < 1e-9);
        }
    }

    #[test]
    fn environment_labels_do_not_matter(seed in any::<u64>()) {
        let d = instance(seed, 3, 3, 25, 2, true);
        let relabelled: Vec<usize> = d.env().iter().map(|e| [7, 2, 5][*e]).collect();
        let other = Dataset::new(d.x().clone(), d.y().to_vec(), relabelled, d.names().to_vec(), "Y".into()).unwrap();
        let cfg = IcpConfig::default();
        prop_assert_eq!(run_icp(&d, &cfg).unwrap().tested, run_icp(&other, &cfg).unwrap().tested);
    }
}

#[test]
fn single_environment_accepts_empty_set() {
    let d = instance(3, 3, 1, 40, 2, false);
    let r = run_icp(&d, &IcpConfig::default()).unwrap();
    assert!(r.s_hat.is_empty());
    assert!(!r.model_rejected);
    assert!(r.stopped_early);
    assert_eq!(r.tested, vec![(vec![], 1.0)]);
}

#[test]
fn robust_variant_can_ignore_a_broken_environment() {
    // Environment 2 shifts the target directly, so no set is invariant over
    // all three; leaving one environment out recovers the parents.
    let mut d = instance(11, 2, 3, 200, 2, false);
    let mut y = d.y().to_vec();
    for (i, e) in d.env().iter().enumerate() {
        if *e == 2 {
            y[i] += 3.0;
        }
    }
    d = Dataset::new(d.x().clone(), y, d.env().to_vec(), d.names().to_vec(), "Y".into()).unwrap();
    let plain = run_icp(&d, &IcpConfig::default()).unwrap();
    assert!(plain.model_rejected);
    let robust = run_icp(&d, &IcpConfig { robust_v: 1, ..IcpConfig::default() }).unwrap();
    assert!(!robust.model_rejected);
    assert_eq!(robust.s_hat, vec![0, 1]);
    assert_eq!(robust, brute_force_oracle(&d, &IcpConfig { robust_v: 1, ..IcpConfig::default() }).unwrap());
}

#[test]
fn preselection_limits_the_search() {
    let d = instance(5, 8, 2, 100, 3, false);
    let cfg = IcpConfig { preselect: Some(4), max_set_size: Some(2), early_stopping: false, ..IcpConfig::default() };
    let r = run_icp(&d, &cfg).unwrap();
    assert_eq!(r.tested_count, 1 + 4 + 6);
    assert!(r.tested.iter().all(|(s, _)| s.len() <= 2));
}
