//! Hidden-confounding extension: grid mechanics and recovery on the
//! confounded two-environment model.

use icp_core::hidden::{
    hidden_invariance_test, hidden_set_test, run_hidden_icp, GridCentering, GridSpec, HiddenConfig,
};
use icp_core::seed::rng_from_seed;
use icp_core::sem::{hidden_iv_scenario, Fixture, HiddenIvParams};
use icp_core::{method2_test, Dataset, IcpConfig};
use proptest::prelude::*;

fn scenario(seed: u64, n: usize) -> icp_core::sem::HiddenScenario {
    let params = HiddenIvParams { n_per_env: n, ..HiddenIvParams::default() };
    hidden_iv_scenario(&params, &mut rng_from_seed(seed)).unwrap()
}

#[test]
fn single_environment_is_untestable() {
    let sc = scenario(1, 200);
    let only_first = sc.dataset.restrict_envs(&[0]).unwrap();
    assert_eq!(hidden_invariance_test(&only_first, &[0], &[0.3, 0.0, 0.0]).unwrap(), 1.0);
    let r = run_hidden_icp(&only_first, &IcpConfig::default(), &HiddenConfig::default()).unwrap();
    assert!(r.s_hat.is_empty());
}

#[test]
fn gamma_outside_the_set_is_refused() {
    let sc = scenario(1, 200);
    assert!(hidden_invariance_test(&sc.dataset, &[0], &[0.3, 1.0, 0.0]).is_err());
}

#[test]
fn true_gamma_is_accepted_and_found_on_the_grid() {
    for seed in 0..10 {
        let sc = scenario(seed, 2000);
        let d = &sc.dataset;
        let p = hidden_invariance_test(d, &sc.s_star, &sc.gamma_star).unwrap();
        assert!(p > 0.001, "seed {seed}: p = {p}");
        let cfg = HiddenConfig::default();
        let grid = GridSpec::for_set(d, &sc.s_star, &cfg).unwrap();
        let out = hidden_set_test(d, &sc.s_star, &grid, 0.05).unwrap();
        assert!(out.accepted, "seed {seed}");
        // The grid brackets γ*; the best point is limited by the power of
        // the KS test rather than by the grid step.
        for (slot, &j) in sc.s_star.iter().enumerate() {
            assert!((grid.center[slot] - sc.gamma_star[j]).abs() <= grid.half_widths[slot], "seed {seed}");
            assert!((out.best_gamma[j] - sc.gamma_star[j]).abs() <= 0.3, "seed {seed}");
        }
    }
}

#[test]
fn identical_environments_give_empty_estimate() {
    let params = HiddenIvParams { z_sd: 0.0, n_per_env: 500, ..HiddenIvParams::default() };
    let sc = hidden_iv_scenario(&params, &mut rng_from_seed(4)).unwrap();
    let r = run_hidden_icp(&sc.dataset, &IcpConfig::default(), &HiddenConfig::default()).unwrap();
    assert!(r.s_hat.is_empty());
}

#[test]
fn recovers_parents_on_most_seeds() {
    let mut hits = 0;
    for seed in 0..20 {
        let sc = scenario(1000 + seed, 2000);
        let r = run_hidden_icp(&sc.dataset, &IcpConfig::default(), &HiddenConfig::default()).unwrap();
        assert!(r.s_hat.iter().all(|j| sc.s_star.contains(j)), "seed {seed}");
        hits += usize::from(r.s_hat == sc.s_star);
    }
    assert!(hits >= 14, "{hits} of 20");
}

#[test]
fn center_only_grid_tracks_residual_test() {
    // Without confounding the OLS fit of the parents is the right γ, so a
    // one-point grid at OLS and the residual test should agree.
    let cfg = HiddenConfig { points_per_axis: 1, centering: GridCentering::Ols, ..HiddenConfig::default() };
    let mut agree = 0;
    let mut total = 0;
    for seed in 0..10 {
        let d: Dataset = Fixture::AppendixA.generate(1000, &mut rng_from_seed(seed)).unwrap();
        for set in [vec![], vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]] {
            let grid = GridSpec::for_set(&d, &set, &cfg).unwrap();
            let hidden = hidden_set_test(&d, &set, &grid, 0.05).unwrap().accepted;
            let resid = method2_test(&d, &set).unwrap().p_value >= 0.05;
            agree += usize::from(hidden == resid);
            total += 1;
        }
    }
    assert!(agree as f64 >= 0.9 * total as f64, "{agree} of {total}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn refining_the_grid_never_lowers_the_best_p(seed in 0u64..1000, half in 0.05f64..1.0) {
        let sc = scenario(seed, 150);
        let d = &sc.dataset;
        let set = [0usize, 2];
        let coarse = GridSpec::new(vec![0.2, -0.1], vec![half, half], 3).unwrap();
        let fine = GridSpec::new(vec![0.2, -0.1], vec![half, half], 5).unwrap();
        let a = hidden_set_test(d, &set, &coarse, 0.05).unwrap();
        let b = hidden_set_test(d, &set, &fine, 0.05).unwrap();
        prop_assert!(b.best_p >= a.best_p);
        prop_assert!(b.accepted || !a.accepted);
    }
}

#[test]
fn plausible_box_contains_true_gamma() {
    let mut covered = 0;
    for seed in 0..10 {
        let sc = scenario(500 + seed, 2000);
        let grid = GridSpec::for_set(&sc.dataset, &sc.s_star, &HiddenConfig::default()).unwrap();
        let out = hidden_set_test(&sc.dataset, &sc.s_star, &grid, 0.05).unwrap();
        let b = out.plausible_box.expect("accepted");
        covered += usize::from(b.contains(&sc.gamma_star));
    }
    assert!(covered >= 9, "{covered} of 10");
}
