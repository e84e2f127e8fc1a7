//! Concave dual of the value function: a linear free-boundary problem on `[0, y_L]`.
//!
//! With `y = -Ψ_w` and `ĥ(y) = Ψ(w) + w y`, the HJB equation becomes a linear
//! Euler-type ODE in `y` with one coefficient switch at `y_0` (the image of zero
//! wealth). Both the Parisian-ruin problem and the occupation-time problem share
//! this structure; they differ only in the killing rate on the negative-wealth
//! region and in the value imposed at the lower cutoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{dual_exponents, DerivedConstants, ModelParams};

/// Absolute root tolerance for `g`, scaled by `max(1, L)`.
pub const ROOT_TOL: f64 = 1e-12;
/// Relative agreement required between the two closed forms for `y_0`.
pub const CROSS_CHECK_RTOL: f64 = 1e-9;

const MAX_HALVINGS: usize = 200;

/// `z^e` computed as `exp(e ln z)`; `z > 0`.
#[inline]
pub(crate) fn powr(z: f64, e: f64) -> f64 {
    (e * z.ln()).exp()
}

/// One member of the free-boundary family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualProblem {
    pub r: f64,
    pub c: f64,
    pub delta: f64,
    pub l: f64,
    /// Exponent of the non-negative wealth branch.
    pub b1: f64,
    /// Killing rate on the non-negative wealth region (λ).
    pub kill_lower: f64,
    /// Killing rate on the negative wealth region (λ + ρ, or λ for occupation time).
    pub kill_upper: f64,
    /// Exponents of the homogeneous solutions on the negative wealth region.
    pub upper: f64,
    pub lower: f64,
    /// Value imposed at `w = -L`.
    pub terminal: f64,
}

impl DualProblem {
    /// The problem whose Legendre dual is the minimum Parisian ruin probability ψ.
    pub fn parisian(params: &ModelParams, consts: &DerivedConstants) -> Self {
        Self {
            r: params.r,
            c: params.c,
            delta: consts.delta,
            l: params.l,
            b1: consts.b1,
            kill_lower: params.lambda,
            kill_upper: params.lambda + params.rho,
            upper: consts.b3,
            lower: consts.b4,
            terminal: params.cutoff_value(),
        }
    }

    /// The ρ → 0 analogue whose dual is the minimum expected occupation time m.
    pub fn occupation(params: &ModelParams, consts: &DerivedConstants) -> Self {
        let (b1, b2) = dual_exponents(params.r, consts.delta, params.lambda);
        Self {
            r: params.r,
            c: params.c,
            delta: consts.delta,
            l: params.l,
            b1,
            kill_lower: params.lambda,
            kill_upper: params.lambda,
            upper: b1,
            lower: b2,
            terminal: 1.0 / params.lambda,
        }
    }

    fn safe(&self) -> f64 {
        self.c / self.r
    }

    /// Source term of the dual ODE on the negative wealth region (ρ, or 1 for occupation time).
    pub fn source(&self) -> f64 {
        self.terminal * self.kill_upper
    }

    /// `g(z)` without domain checks; `z > 0`.
    #[inline]
    pub fn g(&self, z: f64) -> f64 {
        let (bu, bd) = (self.upper, self.lower);
        let span = bu - bd;
        (self.safe() + self.l)
            * (bu * (1.0 - bd) / span * powr(z, bu - 1.0) + bd * (bu - 1.0) / span * powr(z, bd - 1.0))
            - self.safe()
    }

    /// Derivative of `g`; strictly positive on `(0, 1]`.
    #[inline]
    pub fn g_prime(&self, z: f64) -> f64 {
        let (bu, bd) = (self.upper, self.lower);
        let span = bu - bd;
        (self.safe() + self.l)
            * (bu * (bu - 1.0) * (1.0 - bd) / span * powr(z, bu - 2.0)
                - bd * (1.0 - bd) * (bu - 1.0) / span * powr(z, bd - 2.0))
    }

    /// `g(z)` for `0 < z ≤ 1`.
    pub fn eval_g(&self, z: f64) -> Result<f64> {
        if !(z > 0.0 && z <= 1.0) {
            return Err(Error::Domain {
                what: "z",
                value: z,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(self.g(z))
    }

    /// Unique zero of `g` in `(0, 1)`: bisection, then Newton polish.
    pub fn solve_boundary_ratio(&self) -> Result<f64> {
        let tol = ROOT_TOL * self.l.max(1.0);
        let mut lo = 0.5;
        let mut halvings = 0;
        while self.g(lo) >= 0.0 {
            lo *= 0.5;
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::Internal(
                    "no sign change of g found below z = 0.5".to_string(),
                ));
            }
        }
        let mut hi = 1.0;
        let mut z = 0.5 * (lo + hi);
        loop {
            let gz = self.g(z);
            if gz.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * z {
                break;
            }
            if gz < 0.0 {
                lo = z;
            } else {
                hi = z;
            }
            z = 0.5 * (lo + hi);
        }
        for _ in 0..2 {
            let step = self.g(z) / self.g_prime(z);
            let next = z - step;
            if next > lo && next < hi && self.g(next).abs() <= self.g(z).abs() {
                z = next;
            }
        }
        if !(z > 0.0 && z < 1.0) {
            return Err(Error::Internal(format!("boundary ratio {z} outside (0, 1)")));
        }
        Ok(z)
    }

    /// `y_0` isolated from the `D_4` matching (primary).
    fn y0_primary(&self, z: f64) -> f64 {
        let (bu, bd, b1) = (self.upper, self.lower, self.b1);
        let denom = (bu - 1.0) / bu * (self.safe() + self.l) * powr(z, bd - 1.0)
            + (b1 - bu) / (b1 * bu) * self.safe();
        self.terminal / denom
    }

    /// `y_0` isolated from the `D_3` matching (cross-check).
    fn y0_secondary(&self, z: f64) -> f64 {
        let (bu, bd, b1) = (self.upper, self.lower, self.b1);
        let denom = -(1.0 - bd) / bd * (self.safe() + self.l) * powr(z, bu - 1.0)
            + (b1 - bd) / (b1 * bd) * self.safe();
        self.terminal / denom
    }

    /// Free boundaries and coefficients.
    pub fn solve(&self) -> Result<DualSolution> {
        let z_hat = self.solve_boundary_ratio()?;
        let y0 = self.y0_primary(z_hat);
        let y0_check = self.y0_secondary(z_hat);
        let cross = ((y0 - y0_check) / y0).abs();
        if !(y0 > 0.0) || !(cross <= CROSS_CHECK_RTOL) {
            return Err(Error::BoundaryMismatch {
                primary: y0,
                secondary: y0_check,
            });
        }
        let y_l = y0 / z_hat;
        let (bu, bd, b1) = (self.upper, self.lower, self.b1);
        let span = bu - bd;
        let reach = self.safe() + self.l;
        let d1 = -self.safe() / b1 * powr(y0, 1.0 - b1);
        let d3 = -(1.0 - bd) / span * reach * powr(y_l, 1.0 - bu);
        let d4 = -(bu - 1.0) / span * reach * powr(y_l, 1.0 - bd);
        let mut sol = DualSolution {
            z_hat,
            y0,
            y_l,
            d1,
            d3,
            d4,
            residuals: DualResiduals {
                g_at_root: self.g(z_hat).abs(),
                y0_cross_gap: cross,
                matching: [0.0; 4],
            },
        };
        sol.residuals.matching = self.matching_residuals(&sol);
        // the coefficients may under- or overflow for extreme exponents; only their sign is checked
        if !(d1 <= 0.0 && d3 <= 0.0 && d4 <= 0.0) {
            return Err(Error::Internal(format!(
                "dual coefficients must be negative: D1 = {d1}, D3 = {d3}, D4 = {d4}"
            )));
        }
        Ok(sol)
    }

    /// Relative residuals of value matching / smooth pasting at `y_0` and the two
    /// cutoff conditions at `y_L`, substituting the coefficients back in.
    pub fn matching_residuals(&self, s: &DualSolution) -> [f64; 4] {
        let (bu, bd, b1) = (self.upper, self.lower, self.b1);
        let k = self.terminal;
        let cr = self.safe();
        let rel = |terms: &[f64]| {
            let sum: f64 = terms.iter().sum();
            let scale: f64 = terms.iter().map(|t| t.abs()).sum();
            sum.abs() / scale
        };
        // D₃ y^{B_u} and D₄ y^{B_d} in the normalised form, which stays finite when D does not
        let span = bu - bd;
        let reach = self.safe() + self.l;
        let (al, bl) = (-(1.0 - bd) / span * reach * s.y_l, -(bu - 1.0) / span * reach * s.y_l);
        let (a0, b0) = (al * powr(s.z_hat, bu), bl * powr(s.z_hat, bd));
        [
            rel(&[a0, b0, cr * s.y0, k, -cr * (b1 - 1.0) / b1 * s.y0]),
            rel(&[bu * a0, bd * b0, cr * s.y0]),
            rel(&[al, bl, cr * s.y_l, k, -k, self.l * s.y_l]),
            rel(&[bu * al, bd * bl, cr * s.y_l, self.l * s.y_l]),
        ]
    }
}

/// Residual diagnostics attached to a [`DualSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualResiduals {
    /// `|g(ẑ)|`.
    pub g_at_root: f64,
    /// Relative gap between the two closed forms for `y_0`.
    pub y0_cross_gap: f64,
    /// Relative residuals of the four matching conditions.
    pub matching: [f64; 4],
}

/// Free boundaries and coefficients of the dual function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    /// `y_0 / y_L`.
    pub z_hat: f64,
    /// Dual variable at zero wealth.
    pub y0: f64,
    /// Dual variable at the lower cutoff.
    #[serde(rename = "yL")]
    pub y_l: f64,
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D3")]
    pub d3: f64,
    #[serde(rename = "D4")]
    pub d4: f64,
    pub residuals: DualResiduals,
}

/// Which one-sided branch to use at a switch point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Solved dual function `ĥ` on `[0, y_L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualFunction {
    pub problem: DualProblem,
    pub solution: DualSolution,
}

impl DualFunction {
    pub fn new(problem: DualProblem) -> Result<Self> {
        let solution = problem.solve()?;
        Ok(Self { problem, solution })
    }

    /// `(B_u − 1)(1 − B_d)/(B_u − B_d)`.
    pub(crate) fn curvature_factor(&self) -> f64 {
        let (bu, bd) = (self.problem.upper, self.problem.lower);
        (bu - 1.0) * (1.0 - bd) / (bu - bd)
    }

    /// At `y = y_0`, `side` picks the branch: `Left` is `[0, y_0]`, `Right` is `(y_0, y_L]`.
    fn on_upper(&self, y: f64, side: Side) -> bool {
        y > self.solution.y0 || (y == self.solution.y0 && side == Side::Right)
    }

    /// `ĥ(y)`.
    pub fn value(&self, y: f64, side: Side) -> f64 {
        let p = &self.problem;
        let s = &self.solution;
        let cr = p.c / p.r;
        if self.on_upper(y, side) {
            let (bu, bd) = (p.upper, p.lower);
            let z = y / s.y_l;
            p.terminal
                - ((cr + p.l) * s.y_l
                    * ((1.0 - bd) / (bu - bd) * powr(z, bu) + (bu - 1.0) / (bu - bd) * powr(z, bd))
                    - cr * y)
        } else if y == 0.0 {
            0.0
        } else {
            cr * (y - s.y0 / p.b1 * powr(y / s.y0, p.b1))
        }
    }

    /// `ĥ_y(y)`; equals the primal wealth `w` at which `-Ψ_w = y`.
    pub fn slope(&self, y: f64, side: Side) -> f64 {
        let p = &self.problem;
        let s = &self.solution;
        if self.on_upper(y, side) {
            -p.g(y / s.y_l)
        } else if y == 0.0 {
            p.c / p.r
        } else {
            p.c / p.r * (1.0 - powr(y / s.y0, p.b1 - 1.0))
        }
    }

    /// `ĥ_yy(y)`, strictly negative on `(0, y_L]`.
    pub fn curvature(&self, y: f64, side: Side) -> f64 {
        let p = &self.problem;
        let s = &self.solution;
        if self.on_upper(y, side) {
            self.upper_curvature(y / s.y_l)
        } else {
            -(p.c / p.r) * (p.b1 - 1.0) / s.y0 * powr(y / s.y0, p.b1 - 2.0)
        }
    }

    /// `ĥ_yy` on the negative-wealth branch at `y = z y_L`.
    pub(crate) fn upper_curvature(&self, z: f64) -> f64 {
        let p = &self.problem;
        let (bu, bd) = (p.upper, p.lower);
        -(p.c / p.r + p.l) / self.solution.y_l
            * self.curvature_factor()
            * (bu * powr(z, bu - 2.0) - bd * powr(z, bd - 2.0))
    }

    /// Residual of the dual ODE
    /// `k ĥ = −(r − k) y ĥ_y + δ y² ĥ_yy + c y + s`, with `(k, s)` switching at `y_0`.
    pub fn ode_residual(&self, y: f64, side: Side) -> f64 {
        let p = &self.problem;
        let (k, src) = if self.on_upper(y, side) {
            (p.kill_upper, p.source())
        } else {
            (p.kill_lower, 0.0)
        };
        let h = self.value(y, side);
        let hy = self.slope(y, side);
        let hyy = self.curvature(y, side);
        k * h - (-(p.r - k) * y * hy + p.delta * y * y * hyy + p.c * y + src)
    }
}

/// `g(z)` for the Parisian-ruin problem.
pub fn eval_g(z: f64, consts: &DerivedConstants, params: &ModelParams) -> Result<f64> {
    DualProblem::parisian(params, consts).eval_g(z)
}

/// Unique zero of `g` in `(0, 1)` for the Parisian-ruin problem.
pub fn solve_boundary_ratio(consts: &DerivedConstants, params: &ModelParams) -> Result<f64> {
    DualProblem::parisian(params, consts).solve_boundary_ratio()
}

/// Free boundaries and coefficients for the Parisian-ruin problem.
pub fn solve_boundaries(consts: &DerivedConstants, params: &ModelParams) -> Result<DualSolution> {
    DualProblem::parisian(params, consts).solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_constants;

    fn reference() -> (ModelParams, DerivedConstants) {
        let p = ModelParams::reference(0.02);
        (p, derive_constants(&p).unwrap())
    }

    #[test]
    fn g_at_one_is_l() {
        let (p, k) = reference();
        let g1 = eval_g(1.0, &k, &p).unwrap();
        assert!((g1 - 100.0).abs() < 1e-12, "{g1}");
    }

    #[test]
    fn g_diverges_at_zero_and_rejects_nonpositive() {
        let (p, k) = reference();
        assert!(eval_g(1e-8, &k, &p).unwrap() < -1e6);
        assert!(eval_g(0.0, &k, &p).is_err());
        assert!(eval_g(-0.1, &k, &p).is_err());
    }

    #[test]
    fn root_brackets_sign_change() {
        let (p, k) = reference();
        let z = solve_boundary_ratio(&k, &p).unwrap();
        assert!(z > 0.0 && z < 1.0);
        assert!(eval_g(z - 1e-6, &k, &p).unwrap() < 0.0);
        assert!(eval_g(z + 1e-6, &k, &p).unwrap() > 0.0);
        assert!(eval_g(z, &k, &p).unwrap().abs() <= 1e-12 * 100.0);
        // 50-digit bisection of the same g
        assert!((z - 0.65547934341612505).abs() < 1e-13);
    }

    #[test]
    fn single_sign_change_on_fine_scan() {
        let (p, k) = reference();
        let n = 100_000;
        let changes = (1..n)
            .map(|i| eval_g(i as f64 / n as f64, &k, &p).unwrap())
            .collect::<Vec<_>>()
            .windows(2)
            .filter(|w| (w[0] < 0.0) != (w[1] < 0.0))
            .count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn boundaries_match_high_precision() {
        let (p, k) = reference();
        let s = solve_boundaries(&k, &p).unwrap();
        assert!((s.y0 / 0.0047489497550695778 - 1.0).abs() < 1e-12);
        assert!((s.y_l / 0.0072450029169794152 - 1.0).abs() < 1e-12);
        assert!(s.y0 > 0.0 && s.y0 < s.y_l);
        assert!(s.d1 < 0.0 && s.d3 < 0.0 && s.d4 < 0.0);
        assert!(s.residuals.y0_cross_gap <= 1e-9);
        for m in s.residuals.matching {
            assert!(m <= 1e-9, "{:?}", s.residuals);
        }
    }

    #[test]
    fn ratio_is_continuous_in_l() {
        let (p, k) = reference();
        let a = solve_boundary_ratio(&k, &p).unwrap();
        let b = solve_boundary_ratio(&k, &p.with_l(100.01)).unwrap();
        assert!((a - b).abs() < 1e-3);
    }

    #[test]
    fn dual_function_boundary_conditions() {
        let (p, k) = reference();
        let f = DualFunction::new(DualProblem::parisian(&p, &k)).unwrap();
        let s = f.solution;
        assert_eq!(f.value(0.0, Side::Left), 0.0);
        assert!(f.slope(s.y0, Side::Left).abs() < 1e-12);
        assert!(f.slope(s.y0, Side::Right).abs() < 1e-10);
        let target = p.cutoff_value() - p.l * s.y_l;
        assert!((f.value(s.y_l, Side::Right) - target).abs() < 1e-12);
        assert!((f.slope(s.y_l, Side::Right) + p.l).abs() < 1e-10);
        let (lv, rv) = (f.value(s.y0, Side::Left), f.value(s.y0, Side::Right));
        assert!((lv - rv).abs() <= 1e-10 * lv.abs());
    }

    #[test]
    fn dual_is_strictly_concave_and_solves_its_ode() {
        let (p, k) = reference();
        for problem in [DualProblem::parisian(&p, &k), DualProblem::occupation(&p, &k)] {
            let f = DualFunction::new(problem).unwrap();
            let yl = f.solution.y_l;
            for i in 1..=1000 {
                let y = yl * i as f64 / 1000.0;
                assert!(f.curvature(y, Side::Left) < 0.0);
                let res = f.ode_residual(y, Side::Left);
                let scale = problem.kill_upper * f.value(y, Side::Left).abs() + problem.c * y + problem.source();
                assert!(res.abs() <= 1e-9 * scale, "y = {y}, res = {res}");
            }
        }
    }

    #[test]
    fn occupation_boundaries_match_high_precision() {
        let (p, k) = reference();
        let s = DualProblem::occupation(&p, &k).solve().unwrap();
        assert!((s.z_hat - 0.56003915991891014).abs() < 1e-12);
        assert!((s.y0 / 0.64073218147515098 - 1.0).abs() < 1e-11);
        assert!((s.y_l / 1.1440846057406497 - 1.0).abs() < 1e-11);
    }
}
