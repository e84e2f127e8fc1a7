//! Feedback strategies in a form cheap enough to evaluate once per Euler step.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{DerivedConstants, ModelParams};
use crate::value::{OccupationValue, ValueFunction};

/// Which feedback strategy a simulation follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategySpec {
    /// π*, optimal for the Parisian-ruin problem at the configured ρ.
    Optimal,
    /// π₀, optimal for plain lifetime ruin.
    LifetimeRuin,
    /// π_L = lim_{ρ→0} π*, optimal for expected occupation time.
    OccupationLimit,
}

impl std::str::FromStr for StrategySpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "optimal" | "pi_star" => Ok(Self::Optimal),
            "lifetime_ruin" | "ruin" | "pi_zero" | "pi_0" => Ok(Self::LifetimeRuin),
            "occupation_limit" | "occupation" | "pi_l" | "pi_L" => Ok(Self::OccupationLimit),
            other => Err(format!(
                "unknown strategy '{other}' (expected optimal, lifetime_ruin or occupation_limit)"
            )),
        }
    }
}

/// Number of intervals in the negative-wealth lookup table.
pub const TABLE_INTERVALS: usize = 1 << 15;

/// `((μ−r)/σ²)(c/r − w)/(q − 1)` above zero (all three strategies agree there).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Linear {
    slope: f64,
    safe: f64,
}

impl Linear {
    #[inline]
    fn eval(&self, w: f64) -> f64 {
        self.slope * (self.safe - w)
    }
}

/// Feedback strategy prepared for simulation.
///
/// Above zero all strategies share the closed form. Below zero π* and π_L are
/// piecewise-linear interpolants of the exact feedback on a uniform grid over `[−L, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStrategy {
    linear: Linear,
    lo: f64,
    inv_h: f64,
    table: Vec<f64>,
}

impl SimStrategy {
    pub fn build(spec: StrategySpec, params: &ModelParams) -> Result<Self> {
        let consts = DerivedConstants::new(&params.validate()?)?;
        let linear = Linear {
            slope: consts.merton_ratio / (consts.q - 1.0),
            safe: params.safe_level(),
        };
        let lo = -params.l;
        let n = TABLE_INTERVALS;
        let h = params.l / n as f64;
        let node = |i: usize| if i == n { 0.0 } else { lo + h * i as f64 };
        let table = match spec {
            StrategySpec::LifetimeRuin => Vec::new(),
            StrategySpec::Optimal => {
                let v = ValueFunction::new(*params)?;
                (0..=n)
                    .map(|i| match i {
                        0 => Ok(v.pi_star_at_cutoff()),
                        i if i == n => Ok(v.pi_star_left_of_zero()),
                        i => v.pi_star(node(i)),
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            StrategySpec::OccupationLimit => {
                let m = OccupationValue::new(*params)?;
                (0..=n)
                    .map(|i| match i {
                        0 => Ok(m.pi_occupation_at_cutoff()),
                        i if i == n => Ok(m.pi_occupation_left_of_zero()),
                        i => m.pi_occupation(node(i)),
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Self {
            linear,
            lo,
            inv_h: 1.0 / h,
            table,
        })
    }

    /// Amount invested at wealth `w`; zero at or above the safe level.
    #[inline]
    pub fn amount(&self, w: f64) -> f64 {
        if w >= self.linear.safe {
            return 0.0;
        }
        if w >= 0.0 || self.table.is_empty() {
            return self.linear.eval(w);
        }
        let x = ((w - self.lo) * self.inv_h).max(0.0);
        let i = (x as usize).min(self.table.len() - 2);
        let frac = x - i as f64;
        self.table[i] + frac * (self.table[i + 1] - self.table[i])
    }
}
