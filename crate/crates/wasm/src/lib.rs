//! Browser bindings. Each export takes plain numbers or a JSON parameter object and
//! returns a JSON string; the pure `*_json` functions do the work and are tested natively.

use parisian_core::asymptotics::pi_monotonicity_condition;
use parisian_core::sim::{estimate_value, Estimand, SimConfig, SimEstimate, StrategySpec};
use parisian_core::tables::{strategy_table, uniform_grid};
use parisian_core::{ModelParams, OccupationValue, RestrictedValue, StrategyShape, ValueFunction};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// The demo runs on the page's main thread, so runs are kept small.
pub const MAX_DEMO_PATHS: u64 = 20_000;
pub const MAX_POINTS: usize = 4096;

fn parse_params(json: &str) -> Result<ModelParams, String> {
    let p: ModelParams = serde_json::from_str(json).map_err(|e| format!("bad parameters: {e}"))?;
    p.validate().map_err(|e| e.to_string())
}

fn check_points(points: usize) -> Result<(), String> {
    if (2..=MAX_POINTS).contains(&points) {
        Ok(())
    } else {
        Err(format!("points must be in [2, {MAX_POINTS}], got {points}"))
    }
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curve {
    rho: f64,
    pi: Vec<f64>,
    predicted: StrategyShape,
}

#[derive(Serialize)]
struct Strategies {
    w: Vec<f64>,
    pi_0: Vec<f64>,
    pi_l: Vec<f64>,
    curves: Vec<Curve>,
}

/// π₀, π_L and π* for each ρ on `[−L, c/r]`, with the shape predicted for each ρ.
pub fn strategy_curves_json(params: &str, rhos: &[f64], points: usize) -> Result<String, String> {
    let p = parse_params(params)?;
    check_points(points)?;
    if rhos.is_empty() {
        return Err("need at least one rho".into());
    }
    let grid = uniform_grid(-p.l, p.safe_level(), points);
    let t = strategy_table(p, rhos, &grid).map_err(|e| e.to_string())?;
    let curves = rhos
        .iter()
        .zip(t.pi_rho)
        .map(|(&rho, pi)| {
            let predicted = pi_monotonicity_condition(&p.with_rho(rho)).map_err(|e| e.to_string())?;
            Ok(Curve { rho, pi, predicted })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&Strategies {
        w: t.w,
        pi_0: t.pi_0,
        pi_l: t.pi_l,
        curves,
    })
}

#[derive(Serialize)]
struct Values {
    w: Vec<f64>,
    psi: Vec<f64>,
    psi_restricted: Vec<f64>,
    rho_m: Vec<f64>,
    /// `ρm − (ρ/λ)²`, the lower edge of the small-ρ sandwich.
    lower: Vec<f64>,
    beta: f64,
    y0: f64,
}

/// ψ, ψ₀ and the sandwich `ρm − (ρ/λ)² < ψ < ρm` on `[−L, c/r]`.
pub fn value_curves_json(params: &str, points: usize) -> Result<String, String> {
    let p = parse_params(params)?;
    check_points(points)?;
    let v = ValueFunction::new(p).map_err(|e| e.to_string())?;
    let m = OccupationValue::new(p).map_err(|e| e.to_string())?;
    let r = RestrictedValue::new(p).map_err(|e| e.to_string())?;
    let w = uniform_grid(-p.l, p.safe_level(), points);
    let gap = (p.rho / p.lambda).powi(2);
    let rho_m: Vec<f64> = w.iter().map(|&x| p.rho * m.m_clamped(x)).collect();
    let out = Values {
        psi: w.iter().map(|&x| v.psi_clamped(x)).collect(),
        psi_restricted: w
            .iter()
            .map(|&x| r.psi_restricted(x))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?,
        lower: rho_m.iter().map(|x| x - gap).collect(),
        rho_m,
        beta: v.beta,
        y0: v.dual.y0,
        w,
    };
    to_json(&out)
}

#[derive(Serialize)]
struct SimDemo {
    #[serde(flatten)]
    estimate: SimEstimate,
    psi: f64,
}

/// Small Monte Carlo estimate of ψ(w0) under π*, next to the closed form.
pub fn simulate_json(params: &str, w0: f64, paths: u64, seed: u64) -> Result<String, String> {
    let p = parse_params(params)?;
    if paths == 0 || paths > MAX_DEMO_PATHS {
        return Err(format!("paths must be in [1, {MAX_DEMO_PATHS}], got {paths}"));
    }
    let config = SimConfig {
        paths,
        ..SimConfig::new(w0, StrategySpec::Optimal, Estimand::ParisianValue, seed)
    };
    let estimate = estimate_value(&p, &config).map_err(|e| e.to_string())?;
    let psi = ValueFunction::new(p).map_err(|e| e.to_string())?.psi_clamped(w0.min(p.safe_level()));
    to_json(&SimDemo { estimate, psi })
}

#[wasm_bindgen]
pub fn strategy_curves(params: &str, rhos: Vec<f64>, points: usize) -> Result<String, JsError> {
    strategy_curves_json(params, &rhos, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn value_curves(params: &str, points: usize) -> Result<String, JsError> {
    value_curves_json(params, points).map_err(|e| JsError::new(&e))
}

/// `seed` is a JS number; it is truncated to an integer.
#[wasm_bindgen]
pub fn simulate(params: &str, w0: f64, paths: u32, seed: f64) -> Result<String, JsError> {
    simulate_json(params, w0, paths as u64, seed as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: &str = r#"{"r":0.04,"mu":0.08,"sigma":0.2,"lambda":0.01,"rho":0.02,"c":1,"L":100}"#;

    #[test]
    fn rejects_bad_input() {
        assert!(value_curves_json(r#"{"r":0.04}"#, 10).is_err());
        let same_drift = P.replace("0.08", "0.04");
        assert!(value_curves_json(&same_drift, 10).unwrap_err().contains("μ > r"));
        assert!(value_curves_json(P, 1).is_err());
        assert!(simulate_json(P, 0.0, MAX_DEMO_PATHS + 1, 1).is_err());
    }
}
