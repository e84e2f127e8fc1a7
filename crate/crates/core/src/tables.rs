//! Grid evaluations backing the tabular outputs.

use serde::{Deserialize, Serialize};

use crate::dual::Side;
use crate::error::{Error, Result};
use crate::hjb::HjbOperator;
use crate::params::ModelParams;
use crate::restricted::RestrictedValue;
use crate::value::{OccupationValue, ValueFunction};

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + h * i as f64 })
                .collect()
        }
    }
}

/// One row of the `eval` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub w: f64,
    pub psi: f64,
    pub pi_star: f64,
    pub pi_zero: f64,
    pub psi_restricted: f64,
    pub m: f64,
    pub rho_times_m: f64,
    pub hjb_residual: f64,
}

impl EvalRow {
    pub const HEADER: [&'static str; 8] = [
        "w",
        "psi",
        "pi_star",
        "pi_zero",
        "psi_restricted",
        "m",
        "rho_times_m",
        "hjb_residual",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.w,
            self.psi,
            self.pi_star,
            self.pi_zero,
            self.psi_restricted,
            self.m,
            self.rho_times_m,
            self.hjb_residual,
        ]
    }
}

/// Everything needed to evaluate the `eval` columns for one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator {
    pub psi: ValueFunction,
    pub occupation: OccupationValue,
    pub restricted: RestrictedValue,
}

impl Evaluator {
    pub fn new(params: ModelParams) -> Result<Self> {
        Ok(Self {
            psi: ValueFunction::new(params)?,
            occupation: OccupationValue::new(params)?,
            restricted: RestrictedValue::new(params)?,
        })
    }

    /// Row at `w`. Outside `[−L, c/r]` the row is only produced when `clamp` is set;
    /// quantities with no meaning there are NaN.
    pub fn row(&self, w: f64, clamp: bool) -> Result<EvalRow> {
        let p = self.psi.params;
        let (lo, hi) = (-p.l, p.safe_level());
        let inside = w >= lo && w <= hi;
        if !inside && !clamp {
            return Err(Error::Domain {
                what: "w",
                value: w,
                lo,
                hi,
            });
        }
        if w > hi {
            return Ok(EvalRow {
                w,
                psi: 0.0,
                pi_star: 0.0,
                pi_zero: 0.0,
                psi_restricted: 0.0,
                m: 0.0,
                rho_times_m: 0.0,
                hjb_residual: 0.0,
            });
        }
        let pi_zero = self.restricted.pi_zero(w)?;
        let psi_restricted = self.restricted.psi_restricted(w)?;
        if w < lo {
            let m = 1.0 / p.lambda;
            return Ok(EvalRow {
                w,
                psi: p.cutoff_value(),
                pi_star: f64::NAN,
                pi_zero,
                psi_restricted,
                m,
                rho_times_m: p.rho * m,
                hjb_residual: f64::NAN,
            });
        }
        let m = self.occupation.m(w)?;
        let pi_star = if w == lo {
            self.psi.pi_star_at_cutoff()
        } else {
            self.psi.pi_star(w)?
        };
        let hjb_residual = HjbOperator::parisian(&p).residual(w, Side::Right, &self.psi)?;
        Ok(EvalRow {
            w,
            psi: self.psi.psi(w)?,
            pi_star,
            pi_zero,
            psi_restricted,
            m,
            rho_times_m: p.rho * m,
            hjb_residual,
        })
    }
}

/// Rows of the `eval` table on `grid`.
pub fn eval_table(params: ModelParams, grid: &[f64], clamp: bool) -> Result<Vec<EvalRow>> {
    let ev = Evaluator::new(params)?;
    grid.iter().map(|&w| ev.row(w, clamp)).collect()
}

/// π₀, π_L and π*(·; ρ) for several ρ on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyTable {
    pub rhos: Vec<f64>,
    pub w: Vec<f64>,
    pub pi_0: Vec<f64>,
    pub pi_l: Vec<f64>,
    /// `pi_rho[k][i]` is π*(w[i]; rhos[k]).
    pub pi_rho: Vec<Vec<f64>>,
}

impl StrategyTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["w".to_string(), "pi_0".to_string(), "pi_L".to_string()];
        h.extend(self.rhos.iter().map(|r| format!("pi_rho_{r}")));
        h
    }
}

/// Strategy curves; grid points must lie in `(−L, c/r]` (the cutoff itself uses the one-sided limit).
pub fn strategy_table(params: ModelParams, rhos: &[f64], grid: &[f64]) -> Result<StrategyTable> {
    let occupation = OccupationValue::new(params)?;
    let restricted = RestrictedValue::new(params)?;
    let lo = -params.l;
    let pi_l = grid
        .iter()
        .map(|&w| {
            if w == lo {
                Ok(occupation.pi_occupation_at_cutoff())
            } else {
                occupation.pi_occupation(w)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let pi_0 = grid
        .iter()
        .map(|&w| restricted.pi_zero(w))
        .collect::<Result<Vec<_>>>()?;
    let pi_rho = rhos
        .iter()
        .map(|&rho| {
            let v = ValueFunction::new(params.with_rho(rho))?;
            grid.iter()
                .map(|&w| if w == lo { Ok(v.pi_star_at_cutoff()) } else { v.pi_star(w) })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StrategyTable {
        rhos: rhos.to_vec(),
        w: grid.to_vec(),
        pi_0,
        pi_l,
        pi_rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = uniform_grid(-100.0, 25.0, 2048);
        assert_eq!(g.len(), 2048);
        assert_eq!(g[0], -100.0);
        assert_eq!(g[2047], 25.0);
        assert!(uniform_grid(0.0, 1.0, 0).is_empty());
        assert_eq!(uniform_grid(3.0, 4.0, 1), vec![3.0]);
    }

    #[test]
    fn eval_endpoints() {
        let p = ModelParams::reference(0.02);
        let rows = eval_table(p, &[-100.0, 0.0, 25.0], false).unwrap();
        assert!((rows[0].psi - 2.0 / 3.0).abs() < 1e-12);
        assert!((rows[1].psi - 0.074525111402855347).abs() < 1e-13);
        assert_eq!(rows[2].psi, 0.0);
        assert_eq!(rows[2].hjb_residual, 0.0);
        assert!(eval_table(p, &[-101.0], false).is_err());
        let r = eval_table(p, &[-101.0, 30.0], true).unwrap();
        assert_eq!(r[0].psi, p.cutoff_value());
        assert!(r[0].pi_star.is_nan());
        assert_eq!(r[1].psi, 0.0);
    }
}
