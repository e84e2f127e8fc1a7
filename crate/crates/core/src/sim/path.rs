//! One Euler–Maruyama path of the controlled wealth process.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::path_rng;
use super::strategy::SimStrategy;
use super::{Clock, Estimand, SimConfig};
use crate::params::ModelParams;

/// Mutable state carried along a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathState {
    pub w: f64,
    pub t: f64,
    pub excursion_elapsed: f64,
    pub excursion_budget: f64,
    pub in_excursion: bool,
    pub death_time: f64,
    pub occupation: f64,
    pub min_wealth: f64,
    pub steps: u64,
}

/// Why a path stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ParisianRuin,
    Death,
    SafeLevel,
    LowerCutoff,
    TimeCap,
    BlowUp,
}

/// Payoff and final state of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub payoff: f64,
    pub termination: Termination,
    pub state: PathState,
}

/// Random sources of one path: Brownian increments and everything else come from
/// separate streams so an antithetic partner sees the same deaths and clocks.
pub(crate) struct PathRng {
    normals: ChaCha8Rng,
    events: ChaCha8Rng,
    sign: f64,
}

impl PathRng {
    pub(crate) fn new(seed: u64, pair: u64, negate: bool) -> Self {
        Self {
            normals: path_rng(seed, 2 * pair),
            events: path_rng(seed, 2 * pair + 1),
            sign: if negate { -1.0 } else { 1.0 },
        }
    }

    #[inline]
    fn normal(&mut self) -> f64 {
        let z: f64 = self.normals.sample(StandardNormal);
        self.sign * z
    }

    #[inline]
    fn exp(&mut self, rate: f64) -> f64 {
        let e: f64 = self.events.sample(Exp1);
        e / rate
    }

    #[inline]
    fn uniform(&mut self) -> f64 {
        self.events.random::<f64>()
    }
}

/// Constants of the Euler scheme, hoisted out of the step loop.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scheme {
    r: f64,
    excess: f64,
    sigma: f64,
    c: f64,
    lambda: f64,
    rho: f64,
    safe: f64,
    lower: f64,
    cutoff_value: f64,
    dt: f64,
    max_time: f64,
    estimand: Estimand,
    clock: Clock,
}

impl Scheme {
    pub(crate) fn new(params: &ModelParams, config: &SimConfig) -> Self {
        Self {
            r: params.r,
            excess: params.mu - params.r,
            sigma: params.sigma,
            c: params.c,
            lambda: params.lambda,
            rho: params.rho,
            safe: params.safe_level(),
            lower: config.lower_barrier(params),
            cutoff_value: params.cutoff_value(),
            dt: config.dt,
            max_time: config.max_time_or_default(params),
            estimand: config.mode,
            clock: config.clock,
        }
    }

    fn payoff(&self, term: Termination, s: &PathState) -> f64 {
        match self.estimand {
            Estimand::ParisianValue => match term {
                Termination::ParisianRuin => 1.0,
                Termination::LowerCutoff => self.cutoff_value,
                _ => 0.0,
            },
            Estimand::OccupationValue => match term {
                Termination::LowerCutoff => s.occupation + 1.0 / self.lambda,
                _ => s.occupation,
            },
        }
    }

    fn finish(&self, term: Termination, state: PathState) -> PathOutcome {
        let payoff = if term == Termination::BlowUp {
            f64::NAN
        } else {
            self.payoff(term, &state)
        };
        PathOutcome {
            payoff,
            termination: term,
            state,
        }
    }

    /// Runs one path from `w0` to absorption.
    pub(crate) fn run(&self, w0: f64, strategy: &SimStrategy, rng: &mut PathRng) -> PathOutcome {
        let parisian = self.estimand == Estimand::ParisianValue;
        let budget_clock = parisian && self.clock == Clock::ExcursionBudget;
        let mut s = PathState {
            w: w0,
            t: 0.0,
            excursion_elapsed: 0.0,
            excursion_budget: f64::INFINITY,
            in_excursion: false,
            death_time: rng.exp(self.lambda),
            occupation: 0.0,
            min_wealth: w0,
            steps: 0,
        };
        if w0 >= self.safe {
            return self.finish(Termination::SafeLevel, s);
        }
        if w0 <= self.lower {
            return self.finish(Termination::LowerCutoff, s);
        }
        if w0 < 0.0 {
            s.in_excursion = true;
            if budget_clock {
                s.excursion_budget = rng.exp(self.rho);
            }
        }
        let end = s.death_time.min(self.max_time);
        loop {
            let h = self.dt.min(end - s.t);
            if s.in_excursion {
                if parisian {
                    let rings = match self.clock {
                        Clock::ExcursionBudget => s.excursion_elapsed + h > s.excursion_budget,
                        Clock::PerStepBernoulli => rng.uniform() < -(-self.rho * h).exp_m1(),
                    };
                    if rings {
                        s.t += (s.excursion_budget - s.excursion_elapsed).clamp(0.0, h);
                        return self.finish(Termination::ParisianRuin, s);
                    }
                }
                s.excursion_elapsed += h;
                s.occupation += h;
            }
            let pi = strategy.amount(s.w);
            let dw = (self.r * s.w + self.excess * pi - self.c) * h + self.sigma * pi * h.sqrt() * rng.normal();
            s.w += dw;
            s.t += h;
            s.steps += 1;
            if !s.w.is_finite() {
                return self.finish(Termination::BlowUp, s);
            }
            s.min_wealth = s.min_wealth.min(s.w);
            if s.w >= self.safe {
                return self.finish(Termination::SafeLevel, s);
            }
            if s.w <= self.lower {
                return self.finish(Termination::LowerCutoff, s);
            }
            if s.w < 0.0 {
                if !s.in_excursion {
                    s.in_excursion = true;
                    s.excursion_elapsed = 0.0;
                    if budget_clock {
                        s.excursion_budget = rng.exp(self.rho);
                    }
                }
            } else if s.in_excursion {
                s.in_excursion = false;
                s.excursion_elapsed = 0.0;
            }
            if s.t >= end {
                let term = if s.death_time <= self.max_time {
                    Termination::Death
                } else {
                    Termination::TimeCap
                };
                return self.finish(term, s);
            }
        }
    }
}
