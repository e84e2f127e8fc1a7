//! Monte Carlo estimation of the ruin-probability and occupation-time functionals.
//!
//! Each path is an Euler–Maruyama discretisation of the wealth SDE under a feedback
//! strategy, with a presampled exponential death time and an exponential Parisian clock.
//! Barrier crossings are detected at grid times only.

mod path;
pub mod rng;
pub mod strategy;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

pub use path::{PathOutcome, PathState, Termination};
pub use rng::{path_rng, CompensatedSum};
pub use strategy::{SimStrategy, StrategySpec};

use path::{PathRng, Scheme};

/// Lower barrier of the restricted problem, which has no cutoff of its own.
pub const DEEP_CUTOFF: f64 = -1e4;

/// Maximum tolerated fraction of paths with non-finite wealth.
pub const BLOWUP_FRACTION: f64 = 1e-4;

const Z95: f64 = 1.959963984540054;

/// What a path pays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimand {
    /// 1 on Parisian ruin before death, ρ/(λ+ρ) at the lower barrier, else 0.
    ParisianValue,
    /// Time spent below zero until death, plus 1/λ if the lower barrier is hit.
    OccupationValue,
}

impl std::str::FromStr for Estimand {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "parisian_value" | "parisian" | "psi" => Ok(Self::ParisianValue),
            "occupation_value" | "occupation" | "m" => Ok(Self::OccupationValue),
            other => Err(format!(
                "unknown mode '{other}' (expected parisian_value or occupation_value)"
            )),
        }
    }
}

/// How the exponential Parisian deadline is drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clock {
    /// One Exp(ρ) budget per down-crossing of zero.
    #[default]
    ExcursionBudget,
    /// Ruin with probability `1 − e^{−ρ dt}` on every step spent below zero.
    PerStepBernoulli,
}

impl std::str::FromStr for Clock {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "excursion_budget" | "budget" => Ok(Self::ExcursionBudget),
            "per_step_bernoulli" | "bernoulli" => Ok(Self::PerStepBernoulli),
            other => Err(format!(
                "unknown clock '{other}' (expected excursion_budget or per_step_bernoulli)"
            )),
        }
    }
}

/// Where paths are absorbed from below.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Barrier {
    /// At `−L`.
    #[default]
    Truncated,
    /// At [`DEEP_CUTOFF`]; used for the restricted problem on `(−∞, c/r]`.
    Restricted,
}

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub w0: f64,
    pub paths: u64,
    pub dt: f64,
    pub seed: u64,
    pub strategy: StrategySpec,
    pub mode: Estimand,
    pub clock: Clock,
    pub barrier: Barrier,
    /// Per-path time cap in years; `None` means 20/λ.
    pub max_time: Option<f64>,
    /// Pair every path with one driven by the negated Brownian increments.
    pub antithetic: bool,
}

impl SimConfig {
    /// 200 000 paths, dt = 0.01, excursion-budget clock, cutoff at −L.
    pub fn new(w0: f64, strategy: StrategySpec, mode: Estimand, seed: u64) -> Self {
        Self {
            w0,
            paths: 200_000,
            dt: 0.01,
            seed,
            strategy,
            mode,
            clock: Clock::ExcursionBudget,
            barrier: Barrier::Truncated,
            max_time: None,
            antithetic: false,
        }
    }

    pub fn max_time_or_default(&self, params: &ModelParams) -> f64 {
        self.max_time.unwrap_or(20.0 / params.lambda)
    }

    pub fn lower_barrier(&self, params: &ModelParams) -> f64 {
        match self.barrier {
            Barrier::Truncated => -params.l,
            Barrier::Restricted => DEEP_CUTOFF,
        }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !self.w0.is_finite() {
            return bad(format!("w0 must be finite, got {}", self.w0));
        }
        if self.paths == 0 {
            return bad("paths must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        let cap = self.max_time_or_default(params);
        if !(cap > 0.0 && cap.is_finite()) {
            return bad(format!("max_time must be positive, got {cap}"));
        }
        if self.antithetic && self.paths % 2 != 0 {
            return bad(format!("antithetic sampling needs an even path count, got {}", self.paths));
        }
        if self.barrier == Barrier::Restricted && self.strategy != StrategySpec::LifetimeRuin {
            return bad(format!(
                "strategy {:?} is only defined above -L; use the truncated barrier",
                self.strategy
            ));
        }
        Ok(*self)
    }
}

/// Tally of how paths ended.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorbedCounts {
    pub parisian_ruin: u64,
    pub death: u64,
    pub hit_safe_level: u64,
    pub hit_lower_cutoff: u64,
    pub time_cap: u64,
}

impl AbsorbedCounts {
    fn record(&mut self, t: Termination) {
        match t {
            Termination::ParisianRuin => self.parisian_ruin += 1,
            Termination::Death => self.death += 1,
            Termination::SafeLevel => self.hit_safe_level += 1,
            Termination::LowerCutoff => self.hit_lower_cutoff += 1,
            Termination::TimeCap => self.time_cap += 1,
            Termination::BlowUp => {}
        }
    }

    pub fn total(&self) -> u64 {
        self.parisian_ruin + self.death + self.hit_safe_level + self.hit_lower_cutoff + self.time_cap
    }
}

/// Monte Carlo estimate with its accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub ci95: [f64; 2],
    pub paths_used: u64,
    pub steps_total: u64,
    pub absorbed_counts: AbsorbedCounts,
    pub blowups: u64,
}

/// Simulates the path with index `path` (for antithetic runs, odd indices are the mirrored partners).
pub fn simulate_path(params: &ModelParams, config: &SimConfig, strategy: &SimStrategy, path: u64) -> PathOutcome {
    let scheme = Scheme::new(params, config);
    run_one(&scheme, config, strategy, path)
}

fn run_one(scheme: &Scheme, config: &SimConfig, strategy: &SimStrategy, path: u64) -> PathOutcome {
    let mut rng = if config.antithetic {
        PathRng::new(config.seed, path / 2, path % 2 == 1)
    } else {
        PathRng::new(config.seed, path, false)
    };
    scheme.run(config.w0, strategy, &mut rng)
}

/// Mean payoff over `config.paths` paths, in parallel on the global rayon pool.
///
/// The result does not depend on the number of worker threads.
pub fn estimate_value(params: &ModelParams, config: &SimConfig) -> Result<SimEstimate> {
    let params = params.validate()?;
    let config = config.validate(&params)?;
    let strategy = SimStrategy::build(config.strategy, &params)?;
    let scheme = Scheme::new(&params, &config);
    let outcomes: Vec<(f64, Termination, u64)> = (0..config.paths)
        .into_par_iter()
        .map(|i| {
            let o = run_one(&scheme, &config, &strategy, i);
            (o.payoff, o.termination, o.state.steps)
        })
        .collect();
    summarize(&config, &outcomes)
}

/// Expected occupation time below zero under π_L; checks the mode and strategy first.
pub fn estimate_occupation(params: &ModelParams, config: &SimConfig) -> Result<SimEstimate> {
    if config.mode != Estimand::OccupationValue {
        return Err(Error::InvalidConfig("occupation estimate needs mode occupation_value".into()));
    }
    if config.strategy != StrategySpec::OccupationLimit {
        return Err(Error::InvalidConfig("occupation estimate needs strategy occupation_limit".into()));
    }
    estimate_value(params, config)
}

/// [`estimate_value`] on a dedicated pool with `threads` workers.
pub fn estimate_value_with_threads(params: &ModelParams, config: &SimConfig, threads: usize) -> Result<SimEstimate> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| estimate_value(params, config))
}

fn summarize(config: &SimConfig, outcomes: &[(f64, Termination, u64)]) -> Result<SimEstimate> {
    let paths = outcomes.len() as u64;
    let mut counts = AbsorbedCounts::default();
    let mut blowups = 0u64;
    let mut steps_total = 0u64;
    for &(_, t, steps) in outcomes {
        steps_total += steps;
        if t == Termination::BlowUp {
            blowups += 1;
        } else {
            counts.record(t);
        }
    }
    let budget = (BLOWUP_FRACTION * paths as f64).floor() as u64;
    if blowups > budget {
        return Err(Error::BlowUp { blowups, paths, budget });
    }
    // antithetic pairs are averaged first so the standard error sees one draw per pair
    let samples: Vec<f64> = if config.antithetic {
        outcomes
            .chunks(2)
            .filter(|p| p.iter().all(|o| o.1 != Termination::BlowUp))
            .map(|p| 0.5 * (p[0].0 + p[1].0))
            .collect()
    } else {
        outcomes
            .iter()
            .filter(|o| o.1 != Termination::BlowUp)
            .map(|o| o.0)
            .collect()
    };
    let n = samples.len();
    if n == 0 {
        return Err(Error::Internal("no usable paths".into()));
    }
    let mean = samples.iter().copied().collect::<CompensatedSum>().total() / n as f64;
    let ss = samples.iter().map(|x| (x - mean) * (x - mean)).collect::<CompensatedSum>().total();
    let stderr = if n > 1 { (ss / (n - 1) as f64 / n as f64).sqrt() } else { 0.0 };
    Ok(SimEstimate {
        estimate: mean,
        stderr,
        ci95: [mean - Z95 * stderr, mean + Z95 * stderr],
        paths_used: counts.total(),
        steps_total,
        absorbed_counts: counts,
        blowups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(w0: f64, paths: u64) -> SimConfig {
        SimConfig {
            paths,
            ..SimConfig::new(w0, StrategySpec::Optimal, Estimand::ParisianValue, 42)
        }
    }

    #[test]
    fn trivial_starts() {
        let p = ModelParams::reference(0.02);
        let e = estimate_value(&p, &cfg(25.0, 100)).unwrap();
        assert_eq!((e.estimate, e.stderr), (0.0, 0.0));
        assert_eq!(e.absorbed_counts.hit_safe_level, 100);
        let e = estimate_value(&p, &cfg(-100.0, 100)).unwrap();
        assert_eq!(e.estimate, p.cutoff_value());
        let occ = SimConfig {
            strategy: StrategySpec::OccupationLimit,
            mode: Estimand::OccupationValue,
            ..cfg(-100.0, 10)
        };
        assert!((estimate_occupation(&p, &occ).unwrap().estimate - 100.0).abs() < 1e-9);
    }

    #[test]
    fn payoff_support_and_state_invariants() {
        let p = ModelParams::reference(0.02);
        let c = cfg(-10.0, 50);
        let s = SimStrategy::build(c.strategy, &p).unwrap();
        for i in 0..50 {
            let o = simulate_path(&p, &c, &s, i);
            assert!([0.0, 1.0, p.cutoff_value()].contains(&o.payoff));
            assert!(o.state.min_wealth <= o.state.w.min(-10.0));
            assert!(o.state.occupation <= o.state.t + 1e-9);
            assert!(o.state.excursion_elapsed >= 0.0);
        }
    }

    #[test]
    fn counts_sum_and_thread_independence() {
        let p = ModelParams::reference(0.02);
        let c = SimConfig { max_time: Some(50.0), ..cfg(-10.0, 400) };
        let a = estimate_value_with_threads(&p, &c, 1).unwrap();
        let b = estimate_value_with_threads(&p, &c, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.absorbed_counts.total(), a.paths_used);
        assert_eq!(a.paths_used, 400);
        assert!((0.0..=1.0).contains(&a.estimate));
    }

    #[test]
    fn antithetic_pairs_share_events() {
        let p = ModelParams::reference(0.02);
        let c = SimConfig { antithetic: true, ..cfg(5.0, 4) };
        let s = SimStrategy::build(c.strategy, &p).unwrap();
        let a = simulate_path(&p, &c, &s, 0);
        let b = simulate_path(&p, &c, &s, 1);
        assert_eq!(a.state.death_time, b.state.death_time);
        assert!(estimate_value(&p, &SimConfig { paths: 3, ..c }).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let p = ModelParams::reference(0.02);
        assert!(cfg(0.0, 0).validate(&p).is_err());
        assert!(SimConfig { dt: 0.0, ..cfg(0.0, 1) }.validate(&p).is_err());
        assert!(SimConfig { barrier: Barrier::Restricted, ..cfg(0.0, 1) }.validate(&p).is_err());
        let occ = cfg(0.0, 1);
        assert!(estimate_occupation(&p, &occ).is_err());
    }
}
