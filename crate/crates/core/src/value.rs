//! Primal value functions recovered from the dual by Legendre inversion.
//!
//! On `[0, c/r]` the inversion is explicit and the value is `β (1 − r w / c)^q`.
//! On `[−L, 0)` the dual slope equals `−g(y / y_L)`, so inverting `w ↦ y` is a
//! bracketed root of `g(z) = −w` on `[ẑ, 1]`.

use crate::dual::{powr, DualFunction, DualProblem, DualSolution, Side};
use crate::error::{Error, Result};
use crate::hjb::{CandidateFunction, Jet};
use crate::params::{DerivedConstants, ModelParams};

const INVERSION_MAX_ITERS: usize = 200;

/// Convex conjugate of a solved [`DualFunction`], evaluated in wealth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LegendreValue {
    pub dual: DualFunction,
    pub q: f64,
    pub merton: f64,
}

impl LegendreValue {
    fn new(problem: DualProblem, q: f64, merton: f64) -> Result<Self> {
        Ok(Self {
            dual: DualFunction::new(problem)?,
            q,
            merton,
        })
    }

    fn safe(&self) -> f64 {
        self.dual.problem.c / self.dual.problem.r
    }

    fn l(&self) -> f64 {
        self.dual.problem.l
    }

    fn sol(&self) -> &DualSolution {
        &self.dual.solution
    }

    fn check(&self, what: &'static str, w: f64, lo: f64, hi: f64) -> Result<()> {
        if w >= lo && w <= hi {
            Ok(())
        } else {
            Err(Error::Domain {
                what,
                value: w,
                lo,
                hi,
            })
        }
    }

    /// `z = y / y_L ∈ [ẑ, 1]` with `ĥ_y(y) = w`; `w ∈ [−L, 0]`.
    pub fn ratio_at(&self, w: f64) -> f64 {
        let p = &self.dual.problem;
        let z_hat = self.sol().z_hat;
        if w == 0.0 {
            return z_hat;
        }
        if w == -p.l {
            return 1.0;
        }
        let (mut lo, mut hi) = (z_hat, 1.0);
        let mut z = 0.5 * (lo + hi);
        for _ in 0..INVERSION_MAX_ITERS {
            if p.g(z) + w < 0.0 {
                lo = z;
            } else {
                hi = z;
            }
            z = 0.5 * (lo + hi);
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let polished = z - (p.g(z) + w) / p.g_prime(z);
        if polished >= lo && polished <= hi && (p.g(polished) + w).abs() <= (p.g(z) + w).abs() {
            polished
        } else {
            z
        }
    }

    pub fn invert(&self, w: f64) -> Result<f64> {
        self.check("w", w, -self.l(), 0.0)?;
        Ok(self.ratio_at(w) * self.sol().y_l)
    }

    /// Coefficient of the non-negative wealth branch, `c y_0 / (r q)`.
    pub fn beta(&self) -> f64 {
        self.safe() * self.sol().y0 / self.q
    }

    fn positive_branch(w: f64, side: Side) -> bool {
        w > 0.0 || (w == 0.0 && side == Side::Right)
    }

    fn negative_value(&self, z: f64) -> f64 {
        let p = &self.dual.problem;
        p.terminal
            - (self.safe() + p.l)
                * self.sol().y_l
                * self.dual.curvature_factor()
                * (powr(z, p.lower) - powr(z, p.upper))
    }

    pub fn value(&self, w: f64) -> Result<f64> {
        self.check("w", w, -self.l(), self.safe())?;
        Ok(self.value_unchecked(w, Side::Right))
    }

    fn value_unchecked(&self, w: f64, side: Side) -> f64 {
        if Self::positive_branch(w, side) {
            let x = (1.0 - w / self.safe()).max(0.0);
            self.beta() * x.powf(self.q)
        } else {
            self.negative_value(self.ratio_at(w))
        }
    }

    pub fn jet(&self, w: f64, side: Side) -> Result<Jet> {
        self.check("w", w, -self.l(), self.safe())?;
        let y0 = self.sol().y0;
        if Self::positive_branch(w, side) {
            let x = (1.0 - w / self.safe()).max(0.0);
            Ok(Jet {
                value: self.beta() * x.powf(self.q),
                first: -y0 * x.powf(self.q - 1.0),
                second: y0 * (self.q - 1.0) / self.safe() * x.powf(self.q - 2.0),
            })
        } else {
            let z = self.ratio_at(w);
            let y = z * self.sol().y_l;
            Ok(Jet {
                value: self.negative_value(z),
                first: -y,
                second: -1.0 / self.dual.upper_curvature(z),
            })
        }
    }

    fn negative_feedback(&self, z: f64) -> f64 {
        let p = &self.dual.problem;
        self.merton
            * (self.safe() + p.l)
            * self.dual.curvature_factor()
            * (p.upper * powr(z, p.upper - 1.0) - p.lower * powr(z, p.lower - 1.0))
    }

    /// Optimal feedback `−((μ−r)/σ²) f_w / f_ww` on `(−L, c/r]`; the right limit at zero.
    pub fn feedback(&self, w: f64) -> Result<f64> {
        if !(w > -self.l() && w <= self.safe()) {
            return Err(Error::Domain {
                what: "w",
                value: w,
                lo: -self.l(),
                hi: self.safe(),
            });
        }
        if w >= 0.0 {
            Ok(self.merton * (self.safe() - w) / (self.q - 1.0))
        } else {
            Ok(self.negative_feedback(self.ratio_at(w)))
        }
    }

    /// Left limit of the feedback at zero wealth.
    pub fn feedback_left_of_zero(&self) -> f64 {
        self.negative_feedback(self.sol().z_hat)
    }

    /// One-sided limit of the feedback at `w = −L`.
    pub fn feedback_at_cutoff(&self) -> f64 {
        self.negative_feedback(1.0)
    }

    /// Left limit of the negative-wealth branch at zero (should equal `beta`).
    pub fn value_left_of_zero(&self) -> f64 {
        self.negative_value(self.sol().z_hat)
    }
}

/// Minimum probability of lifetime exponential Parisian ruin ψ and its optimal strategy π*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueFunction {
    pub params: ModelParams,
    pub consts: DerivedConstants,
    pub dual: DualSolution,
    /// `ψ(0) = c y_0 / (r q)`.
    pub beta: f64,
    inner: LegendreValue,
}

impl ValueFunction {
    pub fn new(params: ModelParams) -> Result<Self> {
        let params = params.validate()?;
        let consts = DerivedConstants::new(&params)?;
        let inner = LegendreValue::new(
            DualProblem::parisian(&params, &consts),
            consts.q,
            consts.merton_ratio,
        )?;
        let beta = inner.beta();
        if !(beta > 0.0 && beta < 1.0 && beta < params.cutoff_value()) {
            return Err(Error::Internal(format!(
                "psi(0) = {beta} not in (0, rho/(lambda+rho))"
            )));
        }
        Ok(Self {
            params,
            consts,
            dual: inner.dual.solution,
            beta,
            inner,
        })
    }

    pub fn dual_function(&self) -> &DualFunction {
        &self.inner.dual
    }

    /// Dual variable `y ∈ [y_0, y_L]` with `−ψ_w(w) = y`, for `w ∈ [−L, 0]`.
    pub fn invert_dual(&self, w: f64) -> Result<f64> {
        self.inner.invert(w)
    }

    /// ψ on `[−L, c/r]`.
    pub fn psi(&self, w: f64) -> Result<f64> {
        self.inner.value(w)
    }

    /// ψ extended by `ρ/(λ+ρ)` below `−L` and by 0 above `c/r`.
    pub fn psi_clamped(&self, w: f64) -> f64 {
        if w <= -self.params.l {
            self.params.cutoff_value()
        } else if w >= self.params.safe_level() {
            0.0
        } else {
            self.inner.value_unchecked(w, Side::Right)
        }
    }

    /// Optimal investment π* on `(−L, c/r]`. At zero the right limit is returned.
    pub fn pi_star(&self, w: f64) -> Result<f64> {
        self.inner.feedback(w)
    }

    /// `π*(−L+)`.
    pub fn pi_star_at_cutoff(&self) -> f64 {
        self.inner.feedback_at_cutoff()
    }

    /// `π*(0−)`.
    pub fn pi_star_left_of_zero(&self) -> f64 {
        self.inner.feedback_left_of_zero()
    }

    /// Limit of the negative-wealth branch of ψ at zero.
    pub fn psi_left_of_zero(&self) -> f64 {
        self.inner.value_left_of_zero()
    }
}

impl CandidateFunction for ValueFunction {
    fn jet(&self, w: f64, side: Side) -> Result<Jet> {
        self.inner.jet(w, side)
    }
}

/// Minimum expected occupation time below zero `m` and its optimal strategy `π_L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationValue {
    pub params: ModelParams,
    pub dual: DualSolution,
    inner: LegendreValue,
}

impl OccupationValue {
    /// ρ in `params` is ignored.
    pub fn new(params: ModelParams) -> Result<Self> {
        let params = params.validate()?;
        let consts = DerivedConstants::new(&params)?;
        let inner = LegendreValue::new(
            DualProblem::occupation(&params, &consts),
            consts.q,
            consts.merton_ratio,
        )?;
        Ok(Self {
            params,
            dual: inner.dual.solution,
            inner,
        })
    }

    pub fn dual_function(&self) -> &DualFunction {
        &self.inner.dual
    }

    /// `m` on `[−L, c/r]`, in years.
    pub fn m(&self, w: f64) -> Result<f64> {
        self.inner.value(w)
    }

    /// `m` extended by `1/λ` below `−L` and by 0 above `c/r`.
    pub fn m_clamped(&self, w: f64) -> f64 {
        if w <= -self.params.l {
            1.0 / self.params.lambda
        } else if w >= self.params.safe_level() {
            0.0
        } else {
            self.inner.value_unchecked(w, Side::Right)
        }
    }

    /// `π_L` on `(−L, c/r]`.
    pub fn pi_occupation(&self, w: f64) -> Result<f64> {
        self.inner.feedback(w)
    }

    /// `π_L(−L+)`.
    pub fn pi_occupation_at_cutoff(&self) -> f64 {
        self.inner.feedback_at_cutoff()
    }

    /// `π_L(0−)`.
    pub fn pi_occupation_left_of_zero(&self) -> f64 {
        self.inner.feedback_left_of_zero()
    }
}

impl CandidateFunction for OccupationValue {
    fn jet(&self, w: f64, side: Side) -> Result<Jet> {
        self.inner.jet(w, side)
    }
}
