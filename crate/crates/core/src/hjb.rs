//! Pointwise residual of the HJB equation with the infimum over π taken in closed form.
//!
//! For a convex candidate `f` the infimum of `(μ − r) π f_w + ½ σ² π² f_ww`
//! is `−δ f_w² / f_ww`, attained at `π = −((μ − r)/σ²) f_w / f_ww`.

use crate::dual::Side;
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Value and first two derivatives of a candidate at one wealth level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// Something the HJB operator can be applied to.
///
/// `side` selects the one-sided second derivative at a kink (wealth zero).
pub trait CandidateFunction {
    fn jet(&self, w: f64, side: Side) -> Result<Jet>;
}

impl<T: CandidateFunction + ?Sized> CandidateFunction for &T {
    fn jet(&self, w: f64, side: Side) -> Result<Jet> {
        (**self).jet(w, side)
    }
}

/// `scale · f + shift`.
#[derive(Debug, Clone, Copy)]
pub struct Affine<F> {
    pub scale: f64,
    pub shift: f64,
    pub inner: F,
}

impl<F> Affine<F> {
    pub fn scaled(inner: F, scale: f64) -> Self {
        Self {
            scale,
            shift: 0.0,
            inner,
        }
    }
}

impl<F: CandidateFunction> CandidateFunction for Affine<F> {
    fn jet(&self, w: f64, side: Side) -> Result<Jet> {
        let j = self.inner.jet(w, side)?;
        Ok(Jet {
            value: self.scale * j.value + self.shift,
            first: self.scale * j.first,
            second: self.scale * j.second,
        })
    }
}

/// `k(w) f − s(w) − (r w − c) f_w + δ f_w² / f_ww` with
/// `k = λ + κ·1{w<0}` and `s = σ₀·1{w<0}`.
///
/// Parisian ruin uses `κ = σ₀ = ρ`; occupation time uses `κ = 0`, `σ₀ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HjbOperator {
    pub r: f64,
    pub c: f64,
    pub delta: f64,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub excursion_kill: f64,
    pub excursion_source: f64,
}

impl HjbOperator {
    fn base(p: &ModelParams, excursion_kill: f64, excursion_source: f64) -> Self {
        let excess = (p.mu - p.r) / p.sigma;
        Self {
            r: p.r,
            c: p.c,
            delta: 0.5 * excess * excess,
            mu: p.mu,
            sigma: p.sigma,
            lambda: p.lambda,
            excursion_kill,
            excursion_source,
        }
    }

    /// Operator whose zero is the minimum Parisian ruin probability ψ.
    pub fn parisian(p: &ModelParams) -> Self {
        Self::base(p, p.rho, p.rho)
    }

    /// Operator whose zero is the minimum expected occupation time m.
    pub fn occupation(p: &ModelParams) -> Self {
        Self::base(p, 0.0, 1.0)
    }

    fn negative(w: f64, side: Side) -> bool {
        w < 0.0 || (w == 0.0 && side == Side::Left)
    }

    fn zeroth_order(&self, w: f64, side: Side, value: f64) -> f64 {
        if Self::negative(w, side) {
            (self.lambda + self.excursion_kill) * value - self.excursion_source
        } else {
            self.lambda * value
        }
    }

    /// Residual with the infimum over π evaluated in closed form.
    pub fn residual(&self, w: f64, side: Side, f: &impl CandidateFunction) -> Result<f64> {
        let j = f.jet(w, side)?;
        let control = if j.first == 0.0 {
            if j.second < 0.0 || j.second.is_nan() {
                return Err(Error::Convexity { w, second: j.second });
            }
            0.0
        } else {
            if !(j.second > 0.0) {
                return Err(Error::Convexity { w, second: j.second });
            }
            self.delta * j.first * j.first / j.second
        };
        Ok(self.zeroth_order(w, side, j.value) - (self.r * w - self.c) * j.first + control)
    }

    /// Residual under a fixed investment amount `pi` instead of the infimum.
    pub fn residual_with_control(
        &self,
        w: f64,
        side: Side,
        f: &impl CandidateFunction,
        pi: f64,
    ) -> Result<f64> {
        let j = f.jet(w, side)?;
        let generator = (self.r * w - self.c + (self.mu - self.r) * pi) * j.first
            + 0.5 * self.sigma * self.sigma * pi * pi * j.second;
        Ok(self.zeroth_order(w, side, j.value) - generator)
    }
}

/// HJB residual of `f` at `w` for the Parisian-ruin problem.
pub fn hjb_residual(params: &ModelParams, w: f64, side: Side, f: &impl CandidateFunction) -> Result<f64> {
    HjbOperator::parisian(params).residual(w, side, f)
}
