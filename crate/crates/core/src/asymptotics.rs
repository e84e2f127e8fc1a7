//! Small-ρ comparison bounds `ρ m − (ρ/λ)² < ψ < ρ m` and the shape of π* on negative wealth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DerivedConstants, ModelParams};
use crate::value::{OccupationValue, ValueFunction};

/// `(ρ m(w) − (ρ/λ)², ψ(w), ρ m(w))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub w: f64,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

/// ψ and m for one parameter set, evaluated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSandwich {
    pub psi: ValueFunction,
    pub occupation: OccupationValue,
}

impl AsymptoticSandwich {
    pub fn new(params: ModelParams) -> Result<Self> {
        Ok(Self {
            psi: ValueFunction::new(params)?,
            occupation: OccupationValue::new(params)?,
        })
    }

    /// Bounds at `w`; strict ordering is enforced for `w < c/r`.
    pub fn at(&self, w: f64) -> Result<Sandwich> {
        let p = &self.psi.params;
        let ratio = p.rho / p.lambda;
        let rho_m = p.rho * self.occupation.m(w)?;
        let s = Sandwich {
            w,
            lower: rho_m - ratio * ratio,
            value: self.psi.psi(w)?,
            upper: rho_m,
        };
        let strict = s.lower < s.value && s.value < s.upper;
        if w < p.safe_level() && !strict {
            return Err(Error::Ordering {
                w,
                lower: s.lower,
                value: s.value,
                upper: s.upper,
            });
        }
        Ok(s)
    }
}

/// Sandwich at a single wealth level for hazard rate `rho_small`.
pub fn asymptotic_sandwich(params: &ModelParams, w: f64, rho_small: f64) -> Result<Sandwich> {
    AsymptoticSandwich::new(params.with_rho(rho_small))?.at(w)
}

/// Shape of π* on `(−L, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyShape {
    Decreasing,
    Increasing,
    DecThenInc,
}

impl std::fmt::Display for StrategyShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StrategyShape::Decreasing => "decreasing",
            StrategyShape::Increasing => "increasing",
            StrategyShape::DecThenInc => "dec_then_inc",
        })
    }
}

/// Left side of the criterion `(c/r + L) f(B₃, B₄) (λ + ρ + δ − r)/δ ≤ c/r`
/// under which π* decreases on the whole negative region.
pub fn decreasing_criterion_lhs(params: &ModelParams, consts: &DerivedConstants) -> f64 {
    let (b3, b4) = (consts.b3, consts.b4);
    let span = b3 - b4;
    let f = (-b4 / (b3 - 1.0)).powf((b3 - 1.0) / span) * (b3 / (1.0 - b4)).powf((1.0 - b4) / span);
    (params.safe_level() + params.l) * f * (params.lambda + params.rho + consts.delta - params.r) / consts.delta
}

/// Classifies π* on `(−L, 0)` from the closed-form criteria, without evaluating π*.
pub fn pi_monotonicity_condition(params: &ModelParams) -> Result<StrategyShape> {
    let params = params.validate()?;
    let consts = DerivedConstants::new(&params)?;
    if decreasing_criterion_lhs(&params, &consts) <= params.safe_level() {
        Ok(StrategyShape::Decreasing)
    } else if params.r <= params.lambda + params.rho {
        Ok(StrategyShape::Increasing)
    } else {
        Ok(StrategyShape::DecThenInc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let p = ModelParams::reference(0.02);
        let s = asymptotic_sandwich(&p, 25.0, 0.001).unwrap();
        assert_eq!((s.value, s.upper), (0.0, 0.0));
        assert!((s.lower + 0.01).abs() < 1e-15);
        let s = asymptotic_sandwich(&p, -100.0, 0.001).unwrap();
        assert!((s.upper - 0.1).abs() < 1e-9);
        assert!((s.lower - 0.09).abs() < 1e-9);
        assert!((s.value - 0.001 / 0.011).abs() < 1e-12);
    }

    #[test]
    fn reference_regimes() {
        let p = ModelParams::reference(0.01);
        assert_eq!(pi_monotonicity_condition(&p).unwrap(), StrategyShape::Decreasing);
        assert_eq!(
            pi_monotonicity_condition(&p.with_rho(0.02)).unwrap(),
            StrategyShape::DecThenInc
        );
        assert_eq!(
            pi_monotonicity_condition(&p.with_rho(0.03)).unwrap(),
            StrategyShape::Increasing
        );
        assert_eq!(
            pi_monotonicity_condition(&p.with_rho(0.04)).unwrap(),
            StrategyShape::Increasing
        );
    }

    #[test]
    fn criterion_automatic_for_large_r() {
        // r ≥ λ + ρ + δ makes the left side non-positive
        let p = ModelParams {
            r: 0.05,
            mu: 0.09,
            ..ModelParams::reference(0.01)
        };
        let k = DerivedConstants::new(&p).unwrap();
        assert!(p.r >= p.lambda + p.rho + k.delta);
        assert!(decreasing_criterion_lhs(&p, &k) <= 0.0);
        assert_eq!(pi_monotonicity_condition(&p).unwrap(), StrategyShape::Decreasing);
    }
}
