//! Market and preference parameters, and the closed-form constants derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for algebraic identities between derived constants.
pub const IDENTITY_RTOL: f64 = 1e-12;

/// The seven parameters of the Black–Scholes consumption/investment model.
///
/// Rates are per year, `sigma` is per square-root year, `c` and `l` are in wealth units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Riskless rate.
    pub r: f64,
    /// Drift of the risky asset.
    pub mu: f64,
    /// Volatility of the risky asset.
    pub sigma: f64,
    /// Force of mortality.
    pub lambda: f64,
    /// Hazard rate of the exponential excursion clock.
    pub rho: f64,
    /// Net consumption rate.
    pub c: f64,
    /// Lower wealth cutoff; wealth is absorbed at `-l`.
    #[serde(rename = "L")]
    pub l: f64,
}

impl ModelParams {
    /// The numerical example used throughout the literature on this problem:
    /// r = 0.04, μ = 0.08, σ = 0.2, λ = 0.01, c = 1, L = 100.
    pub fn reference(rho: f64) -> Self {
        Self {
            r: 0.04,
            mu: 0.08,
            sigma: 0.2,
            lambda: 0.01,
            rho,
            c: 1.0,
            l: 100.0,
        }
    }

    /// Returns the parameters unchanged if every standing assumption holds.
    pub fn validate(self) -> Result<Self> {
        let fields = [
            ("r", self.r),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("lambda", self.lambda),
            ("rho", self.rho),
            ("c", self.c),
            ("L", self.l),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        let positive = [
            ("r > 0", self.r),
            ("σ > 0", self.sigma),
            ("λ > 0", self.lambda),
            ("ρ > 0", self.rho),
            ("c > 0", self.c),
            ("L > 0", self.l),
        ];
        for (assumption, v) in positive {
            if v <= 0.0 {
                return Err(Error::InvalidParams(format!("requires {assumption}, got {v}")));
            }
        }
        if self.mu <= self.r {
            return Err(Error::InvalidParams(format!(
                "requires μ > r, got μ = {} and r = {}",
                self.mu, self.r
            )));
        }
        let safe = self.c / self.r;
        if !(safe.is_finite() && safe > 0.0) {
            return Err(Error::InvalidParams(format!(
                "safe level c/r must be finite and positive, got {safe}"
            )));
        }
        Ok(self)
    }

    /// Copy with a different excursion-clock hazard rate.
    pub fn with_rho(self, rho: f64) -> Self {
        Self { rho, ..self }
    }

    /// Copy with a different lower cutoff.
    pub fn with_l(self, l: f64) -> Self {
        Self { l, ..self }
    }

    /// Copy with a different force of mortality.
    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    /// Wealth `c/r` at which the riskless asset funds consumption forever.
    pub fn safe_level(&self) -> f64 {
        self.c / self.r
    }

    /// Payoff on reaching the lower cutoff: probability that the excursion clock rings before death.
    pub fn cutoff_value(&self) -> f64 {
        self.rho / (self.lambda + self.rho)
    }

    /// Merton ratio (μ − r)/σ².
    pub fn merton_ratio(&self) -> f64 {
        (self.mu - self.r) / (self.sigma * self.sigma)
    }
}

/// Constants shared by every closed form in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Half the squared market price of risk.
    pub delta: f64,
    /// Dual exponents on the non-negative wealth region (`b1 > 1`, `b2 < 0`).
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    /// Dual exponents on the negative wealth region (`b3 > 1`, `b4 < 0`).
    #[serde(rename = "B3")]
    pub b3: f64,
    #[serde(rename = "B4")]
    pub b4: f64,
    /// Primal exponent `b1 / (b1 - 1)`.
    pub q: f64,
    /// Exponent of the restricted (π ≤ π₀) value function.
    pub alpha: f64,
    /// (μ − r)/σ².
    pub merton_ratio: f64,
    /// Whether `b1 > b3 > 1 > 0 > b2 > b4` held.
    pub ordering_ok: bool,
    /// Relative gap between `b1/(b1-1)` and the direct closed form of `q`.
    pub q_identity_gap: f64,
}

/// Roots of `δ B² − (r − k + δ) B − k = 0` ordered `(positive, negative)`.
///
/// The smaller-magnitude root is recovered from the product `−k/δ` to avoid cancellation.
pub fn dual_exponents(r: f64, delta: f64, k: f64) -> (f64, f64) {
    let a = r - k + delta;
    let disc = (a * a + 4.0 * delta * k).sqrt();
    if a >= 0.0 {
        let plus = (a + disc) / (2.0 * delta);
        (plus, -k / (delta * plus))
    } else {
        let minus = (a - disc) / (2.0 * delta);
        (-k / (delta * minus), minus)
    }
}

impl DerivedConstants {
    /// Evaluates every derived constant; `params` must already be validated.
    pub fn new(params: &ModelParams) -> Result<Self> {
        let ModelParams {
            r,
            lambda,
            rho,
            ..
        } = *params;
        let excess = (params.mu - r) / params.sigma;
        let delta = 0.5 * excess * excess;
        let (b1, b2) = dual_exponents(r, delta, lambda);
        let (b3, b4) = dual_exponents(r, delta, lambda + rho);
        let q = b1 / (b1 - 1.0);

        let s = r + lambda + delta;
        let q_direct = (s + (s * s - 4.0 * r * lambda).sqrt()) / (2.0 * r);
        let q_identity_gap = ((q - q_direct) / q).abs();

        let a = r - lambda + delta;
        let b = 4.0 * delta * (lambda + rho);
        let root_minus_a = if a > 0.0 {
            b / (a + (a * a + b).sqrt())
        } else {
            (a * a + b).sqrt() - a
        };
        let alpha = (q - 1.0) / (2.0 * delta) * root_minus_a;

        let ordering_ok = b1 > b3 && b3 > 1.0 && b2 < 0.0 && b2 > b4;
        let out = Self {
            delta,
            b1,
            b2,
            b3,
            b4,
            q,
            alpha,
            merton_ratio: params.merton_ratio(),
            ordering_ok,
            q_identity_gap,
        };
        if !ordering_ok {
            return Err(Error::Internal(format!(
                "exponent ordering B1 > B3 > 1 > 0 > B2 > B4 violated: {out:?}"
            )));
        }
        if q_identity_gap > IDENTITY_RTOL {
            return Err(Error::Internal(format!(
                "q = B1/(B1-1) identity off by {q_identity_gap:e}"
            )));
        }
        if !(alpha > 0.0) {
            return Err(Error::Internal(format!("alpha = {alpha} is not positive")));
        }
        Ok(out)
    }
}

/// Validates `params` and evaluates the derived constants.
pub fn derive_constants(params: &ModelParams) -> Result<DerivedConstants> {
    DerivedConstants::new(&params.validate()?)
}
