use parisian_core::sim::{
    estimate_occupation, estimate_value, estimate_value_with_threads, Barrier, Clock, Estimand, SimConfig,
    StrategySpec,
};
use parisian_core::{ModelParams, RestrictedValue, ValueFunction};

fn small(w0: f64, strategy: StrategySpec, mode: Estimand) -> SimConfig {
    SimConfig {
        paths: 4000,
        ..SimConfig::new(w0, strategy, mode, 2024)
    }
}

#[test]
fn absorbing_starts() {
    let p = ModelParams::reference(0.02);
    let e = estimate_value(&p, &small(25.0, StrategySpec::Optimal, Estimand::ParisianValue)).unwrap();
    assert_eq!((e.estimate, e.stderr, e.steps_total), (0.0, 0.0, 0));
    let e = estimate_value(&p, &small(-100.0, StrategySpec::Optimal, Estimand::ParisianValue)).unwrap();
    assert_eq!(e.estimate, p.cutoff_value());
    assert_eq!(e.absorbed_counts.hit_lower_cutoff, 4000);
    let occ = small(25.0, StrategySpec::OccupationLimit, Estimand::OccupationValue);
    assert_eq!(estimate_occupation(&p, &occ).unwrap().estimate, 0.0);
}

#[test]
fn worker_count_does_not_change_the_estimate() {
    let p = ModelParams::reference(0.02);
    let c = SimConfig {
        paths: 1000,
        ..small(-10.0, StrategySpec::Optimal, Estimand::ParisianValue)
    };
    let one = estimate_value_with_threads(&p, &c, 1).unwrap();
    let four = estimate_value_with_threads(&p, &c, 4).unwrap();
    assert_eq!(one.estimate.to_bits(), four.estimate.to_bits());
    assert_eq!(one, four);
    let again = estimate_value_with_threads(&p, &c, 2).unwrap();
    assert_eq!(one, again);
}

#[test]
fn small_run_brackets_the_closed_form() {
    let p = ModelParams::reference(0.02);
    let v = ValueFunction::new(p).unwrap();
    let e = estimate_value(&p, &small(5.0, StrategySpec::Optimal, Estimand::ParisianValue)).unwrap();
    let exact = v.psi(5.0).unwrap();
    assert!((e.estimate - exact).abs() <= 3.0 * e.stderr + 0.01, "{e:?} vs {exact}");
    assert_eq!(e.absorbed_counts.total(), e.paths_used);
    assert!(e.ci95[0] < e.estimate && e.estimate < e.ci95[1]);
}

#[test]
fn restricted_problem_uses_the_deep_cutoff() {
    let p = ModelParams::reference(0.02);
    let c = SimConfig {
        barrier: Barrier::Restricted,
        ..small(10.0, StrategySpec::LifetimeRuin, Estimand::ParisianValue)
    };
    let e = estimate_value(&p, &c).unwrap();
    let exact = RestrictedValue::new(p).unwrap().psi_restricted(10.0).unwrap();
    assert!((e.estimate - exact).abs() <= 3.0 * e.stderr + 0.01, "{e:?} vs {exact}");
}

#[test]
fn ruin_estimate_falls_with_initial_wealth() {
    let p = ModelParams::reference(0.02);
    let est: Vec<_> = [-50.0, -10.0, 0.0, 10.0]
        .iter()
        .map(|&w| estimate_value(&p, &small(w, StrategySpec::Optimal, Estimand::ParisianValue)).unwrap())
        .collect();
    for pair in est.windows(2) {
        let se = (pair[0].stderr.powi(2) + pair[1].stderr.powi(2)).sqrt();
        assert!(pair[1].estimate <= pair[0].estimate + 3.0 * se, "{pair:?}");
    }
}

#[test]
fn clocks_agree_on_a_small_run() {
    let p = ModelParams::reference(0.02);
    let a = estimate_value(&p, &small(-10.0, StrategySpec::Optimal, Estimand::ParisianValue)).unwrap();
    let b = estimate_value(
        &p,
        &SimConfig {
            clock: Clock::PerStepBernoulli,
            ..small(-10.0, StrategySpec::Optimal, Estimand::ParisianValue)
        },
    )
    .unwrap();
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.estimate - b.estimate).abs() <= 3.0 * se, "{a:?} vs {b:?}");
}

#[test]
fn halving_dt_moves_the_estimate_by_at_most_noise_plus_order_dt() {
    let p = ModelParams::reference(0.02);
    let base = small(-10.0, StrategySpec::Optimal, Estimand::ParisianValue);
    let a = estimate_value(&p, &SimConfig { dt: 0.02, ..base }).unwrap();
    let b = estimate_value(&p, &SimConfig { dt: 0.01, ..base }).unwrap();
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    // weak order one with a unit constant
    assert!((a.estimate - b.estimate).abs() <= 3.0 * se + 0.02, "{a:?} vs {b:?}");
}

#[test]
fn antithetic_pairs_keep_the_mean() {
    let p = ModelParams::reference(0.02);
    let v = ValueFunction::new(p).unwrap();
    let c = SimConfig {
        antithetic: true,
        ..small(5.0, StrategySpec::Optimal, Estimand::ParisianValue)
    };
    let e = estimate_value(&p, &c).unwrap();
    assert!((e.estimate - v.psi(5.0).unwrap()).abs() <= 3.0 * e.stderr + 0.01);
}

#[test]
fn estimate_serializes_with_expected_keys() {
    let p = ModelParams::reference(0.02);
    let e = estimate_value(&p, &small(25.0, StrategySpec::Optimal, Estimand::ParisianValue)).unwrap();
    let j = serde_json::to_value(e).unwrap();
    for k in ["estimate", "stderr", "ci95", "paths_used", "steps_total", "absorbed_counts"] {
        assert!(j.get(k).is_some(), "{k}");
    }
    for k in ["parisian_ruin", "death", "hit_safe_level", "hit_lower_cutoff", "time_cap"] {
        assert!(j["absorbed_counts"].get(k).is_some(), "{k}");
    }
}
