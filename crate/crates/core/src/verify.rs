//! Property suites: executable checks of the structural results about ψ, π* and m.
//!
//! Every check reports the measured quantity next to its threshold so a failure says by
//! how much it failed.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{pi_monotonicity_condition, StrategyShape};
use crate::dual::Side;
use crate::error::Result;
use crate::hjb::{Affine, CandidateFunction, HjbOperator};
use crate::params::{DerivedConstants, ModelParams};
use crate::restricted::RestrictedValue;
use crate::tables::uniform_grid;
use crate::value::{OccupationValue, ValueFunction};

/// Points in the property grid on `[−L, c/r]`.
pub const GRID_POINTS: usize = 2048;
/// Points in the sandwich grid.
pub const SANDWICH_POINTS: usize = 512;
/// Points in the shape-classification grid on `(−L, 0)`.
pub const SHAPE_POINTS: usize = 1000;
/// Half-width of the band around zero skipped by two-sided checks.
pub const ZERO_BAND: f64 = 1e-6;

/// A named group of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Boundaries,
    Convexity,
    Hjb,
    Monotonicity,
    Figure1,
    Asymptotic,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::Boundaries,
        Suite::Convexity,
        Suite::Hjb,
        Suite::Monotonicity,
        Suite::Figure1,
        Suite::Asymptotic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Boundaries => "boundaries",
            Suite::Convexity => "convexity",
            Suite::Hjb => "hjb",
            Suite::Monotonicity => "monotonicity",
            Suite::Figure1 => "figure1",
            Suite::Asymptotic => "asymptotic",
            Suite::All => "all",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Suite::EACH
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| {
                format!("unknown suite '{s}' (expected boundaries, convexity, hjb, monotonicity, figure1, asymptotic or all)")
            })
    }
}

/// How a measurement is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "==")]
    Matches,
}

impl Relation {
    fn symbol(&self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
            Relation::Matches => "==",
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

impl CheckResult {
    fn compare(suite: Suite, name: &str, measured: f64, relation: Relation, threshold: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => measured <= threshold,
            Relation::AtLeast => measured >= threshold,
            Relation::Above => measured > threshold,
            Relation::Matches => measured == threshold,
        };
        Self {
            suite: suite.name().into(),
            name: name.into(),
            passed,
            measured,
            relation,
            threshold,
            detail: String::new(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn errored(suite: Suite, name: &str, err: impl std::fmt::Display) -> Self {
        Self {
            suite: suite.name().into(),
            name: name.into(),
            passed: false,
            measured: f64::NAN,
            relation: Relation::AtMost,
            threshold: f64::NAN,
            detail: err.to_string(),
        }
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}/{}: {:e} {} {:e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.measured,
            self.relation.symbol(),
            self.threshold
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// All checks run for one request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn find(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "suite {}: {} checks, {} failed",
            self.suite.name(),
            self.checks.len(),
            failed
        )
    }
}

/// Knobs for the suites; `None` fields are derived from the parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Hazard rates compared pointwise by the monotonicity suite (default ρ/4, ρ, 5ρ).
    pub rho_ladder: Option<Vec<f64>>,
    /// Hazard rates whose shapes the figure1 suite classifies (default 0.01 to 0.04).
    pub figure_rhos: Option<Vec<f64>>,
    /// Hazard rates for the sandwich (default the configured ρ).
    pub sandwich_rhos: Option<Vec<f64>>,
}

/// Runs `suite` (or every suite for [`Suite::All`]).
pub fn run_suite(params: &ModelParams, suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let params = params.validate()?;
    DerivedConstants::new(&params)?;
    let mut checks = Vec::new();
    let suites: Vec<Suite> = if suite == Suite::All {
        Suite::EACH.to_vec()
    } else {
        vec![suite]
    };
    for s in suites {
        match s {
            Suite::Boundaries => boundaries(&params, &mut checks),
            Suite::Convexity => convexity(&params, &mut checks),
            Suite::Hjb => hjb(&params, &mut checks),
            Suite::Monotonicity => monotonicity(&params, opts, &mut checks),
            Suite::Figure1 => figure1(&params, opts, &mut checks),
            Suite::Asymptotic => asymptotic(&params, opts, &mut checks),
            Suite::All => unreachable!(),
        }
    }
    Ok(VerifyReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Runs `body`, turning an evaluation error into a failed check.
fn guarded(
    suite: Suite,
    name: &str,
    out: &mut Vec<CheckResult>,
    body: impl FnOnce(&mut Vec<CheckResult>) -> Result<CheckResult>,
) {
    let r = body(out);
    out.push(r.unwrap_or_else(|e| CheckResult::errored(suite, name, e)));
}

fn property_grid(p: &ModelParams) -> Vec<f64> {
    uniform_grid(-p.l, p.safe_level(), GRID_POINTS)
}

/// Interior points of `(lo, hi)`: cell midpoints of `n` equal cells.
fn open_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| lo + h * (i as f64 + 0.5)).collect()
}

fn boundaries(p: &ModelParams, out: &mut Vec<CheckResult>) {
    const S: Suite = Suite::Boundaries;
    let (lo, hi) = (-p.l, p.safe_level());
    guarded(S, "psi_at_cutoff", out, |_| {
        let v = ValueFunction::new(*p)?;
        Ok(CheckResult::compare(S, "psi_at_cutoff", (v.psi(lo)? - p.cutoff_value()).abs(), Relation::AtMost, 1e-10))
    });
    guarded(S, "psi_at_safe_level", out, |_| {
        let v = ValueFunction::new(*p)?;
        Ok(CheckResult::compare(S, "psi_at_safe_level", v.psi(hi)?.abs(), Relation::AtMost, 1e-10))
    });
    guarded(S, "m_at_cutoff", out, |_| {
        let m = OccupationValue::new(*p)?;
        Ok(CheckResult::compare(S, "m_at_cutoff", rel(m.m(lo)?, 1.0 / p.lambda), Relation::AtMost, 1e-8))
    });
    guarded(S, "m_at_safe_level", out, |_| {
        let m = OccupationValue::new(*p)?;
        Ok(CheckResult::compare(S, "m_at_safe_level", (m.m(hi)? * p.lambda).abs(), Relation::AtMost, 1e-8))
    });
    guarded(S, "beta_in_range", out, |_| {
        let v = ValueFunction::new(*p)?;
        let b = v.beta;
        Ok(CheckResult::compare(S, "beta_in_range", b, Relation::AtMost, p.cutoff_value())
            .with_detail(format!("beta must lie in (0, {})", p.cutoff_value())))
        .map(|mut c| {
            c.passed &= b > 0.0 && b < p.cutoff_value();
            c
        })
    });
    let root_tol = 1e-12 * p.l.max(1.0);
    for (tag, occupation) in [("psi", false), ("m", true)] {
        let name = |s: &str| format!("{tag}_{s}");
        let res = if occupation {
            OccupationValue::new(*p).map(|m| m.dual_function().solution)
        } else {
            ValueFunction::new(*p).map(|v| v.dual_function().solution)
        };
        match res {
            Ok(sol) => {
                let r = sol.residuals;
                out.push(CheckResult::compare(S, &name("g_at_root"), r.g_at_root.abs(), Relation::AtMost, root_tol));
                out.push(CheckResult::compare(S, &name("y0_cross_check"), r.y0_cross_gap, Relation::AtMost, 1e-9));
                let worst = r.matching.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
                out.push(CheckResult::compare(S, &name("matching_conditions"), worst, Relation::AtMost, 1e-9));
            }
            Err(e) => out.push(CheckResult::errored(S, &name("dual_solve"), e)),
        }
    }
}

/// Largest violation of convexity and of monotonicity for `f` sampled on `grid`.
fn shape_violations(values: &[f64]) -> (f64, f64) {
    let rise = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let bend = values
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .fold(f64::INFINITY, f64::min);
    (rise, bend)
}

fn convexity(p: &ModelParams, out: &mut Vec<CheckResult>) {
    const S: Suite = Suite::Convexity;
    let grid = property_grid(p);
    guarded(S, "psi_non_increasing", out, |out| {
        let v = ValueFunction::new(*p)?;
        let vals = grid.iter().map(|&w| v.psi(w)).collect::<Result<Vec<_>>>()?;
        let (rise, bend) = shape_violations(&vals);
        out.push(CheckResult::compare(S, "psi_convex", bend, Relation::AtLeast, -1e-10));
        Ok(CheckResult::compare(S, "psi_non_increasing", rise, Relation::AtMost, 0.0))
    });
    guarded(S, "m_non_increasing", out, |out| {
        let m = OccupationValue::new(*p)?;
        let vals = grid.iter().map(|&w| m.m(w)).collect::<Result<Vec<_>>>()?;
        let (rise, bend) = shape_violations(&vals);
        out.push(CheckResult::compare(S, "m_convex", bend, Relation::AtLeast, -1e-10 / p.lambda));
        Ok(CheckResult::compare(S, "m_non_increasing", rise, Relation::AtMost, 0.0))
    });
    guarded(S, "psi_c1_at_zero", out, |out| {
        let v = ValueFunction::new(*p)?;
        let left = v.jet(0.0, Side::Left)?;
        let right = v.jet(0.0, Side::Right)?;
        let y0 = v.dual_function().solution.y0;
        out.push(CheckResult::compare(S, "psi_slope_is_minus_y0", rel(right.first, -y0), Relation::AtMost, 1e-8));
        let finite = left.second.is_finite() && right.second.is_finite() && left.second > 0.0 && right.second > 0.0;
        out.push(
            CheckResult::compare(S, "psi_one_sided_curvatures", left.second.min(right.second), Relation::Above, 0.0)
                .with_detail(format!("left {:e}, right {:e}", left.second, right.second))
                .tap(|c| c.passed &= finite),
        );
        Ok(CheckResult::compare(S, "psi_c1_at_zero", rel(left.first, right.first), Relation::AtMost, 1e-8))
    });
    guarded(S, "psi_restricted_dominates", out, |_| {
        let v = ValueFunction::new(*p)?;
        let r = RestrictedValue::new(*p)?;
        // near −L the truncated problem pays ρ/(λ+ρ), which ψ₀ never reaches, so compare on [0, c/r]
        let gap = grid
            .iter()
            .filter(|&&w| w >= 0.0)
            .map(|&w| Ok(r.psi_restricted(w)? - v.psi(w)?))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        Ok(CheckResult::compare(S, "psi_restricted_dominates", gap, Relation::AtLeast, -1e-15).with_detail("on [0, c/r]"))
    });
}

trait Tap: Sized {
    fn tap(mut self, f: impl FnOnce(&mut Self)) -> Self {
        f(&mut self);
        self
    }
}

impl Tap for CheckResult {}

/// Largest `|residual| / scale` over the property grid plus both one-sided residuals at zero.
fn max_hjb<F: CandidateFunction>(op: &HjbOperator, f: &F, grid: &[f64], scale: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for &w in grid.iter().filter(|w| w.abs() > ZERO_BAND) {
        worst = worst.max(op.residual(w, Side::Right, f)?.abs() / scale);
    }
    for side in [Side::Left, Side::Right] {
        worst = worst.max(op.residual(0.0, side, f)?.abs() / scale);
    }
    Ok(worst)
}

fn hjb(p: &ModelParams, out: &mut Vec<CheckResult>) {
    const S: Suite = Suite::Hjb;
    let grid = property_grid(p);
    guarded(S, "psi_residual", out, |_| {
        let v = ValueFunction::new(*p)?;
        let scale = p.lambda * p.cutoff_value();
        let worst = max_hjb(&HjbOperator::parisian(p), &v, &grid, scale)?;
        Ok(CheckResult::compare(S, "psi_residual", worst, Relation::AtMost, 1e-8))
    });
    guarded(S, "m_residual", out, |_| {
        let m = OccupationValue::new(*p)?;
        let worst = max_hjb(&HjbOperator::occupation(p), &m, &grid, 1.0)?;
        Ok(CheckResult::compare(S, "m_residual", worst, Relation::AtMost, 1e-8))
    });
    guarded(S, "supersolution_below_zero", out, |_| {
        let v = ValueFunction::new(*p)?;
        let w = -p.l / 2.0;
        let r = HjbOperator::parisian(p).residual(w, Side::Right, &Affine::scaled(&v, 1.1))?;
        Ok(CheckResult::compare(S, "supersolution_below_zero", r, Relation::Above, 0.0))
    });
}

fn monotonicity(p: &ModelParams, opts: &VerifyOptions, out: &mut Vec<CheckResult>) {
    const S: Suite = Suite::Monotonicity;
    let (lo, hi) = (-p.l, p.safe_level());
    let neg = open_grid(lo, 0.0, GRID_POINTS);
    let pos = open_grid(0.0, hi, GRID_POINTS);
    guarded(S, "pi_star_equals_pi_zero_above_zero", out, |out| {
        let v = ValueFunction::new(*p)?;
        let r = RestrictedValue::new(*p)?;
        let mut gap = 0.0f64;
        for &w in &pos {
            gap = gap.max((v.pi_star(w)? - r.pi_zero(w)?).abs());
        }
        let mut margin = f64::INFINITY;
        for &w in &neg {
            margin = margin.min(v.pi_star(w)? - r.pi_zero(w)?);
        }
        out.push(CheckResult::compare(S, "pi_star_above_pi_zero_below_zero", margin, Relation::Above, 0.0));
        Ok(CheckResult::compare(S, "pi_star_equals_pi_zero_above_zero", gap, Relation::AtMost, 1e-10))
    });
    let ladder = opts
        .rho_ladder
        .clone()
        .unwrap_or_else(|| vec![p.rho / 4.0, p.rho, 5.0 * p.rho]);
    guarded(S, "pi_star_ordered_in_rho", out, |out| {
        let fns = ladder
            .iter()
            .map(|&rho| ValueFunction::new(p.with_rho(rho)))
            .collect::<Result<Vec<_>>>()?;
        let mut margin = f64::INFINITY;
        let mut same = 0.0f64;
        for pair in fns.windows(2) {
            for &w in &neg {
                margin = margin.min(pair[1].pi_star(w)? - pair[0].pi_star(w)?);
            }
            for &w in &pos {
                same = same.max((pair[1].pi_star(w)? - pair[0].pi_star(w)?).abs());
            }
        }
        let limit = 2.0 * p.r / (p.mu - p.r) * (hi + p.l);
        let mut cut = 0.0f64;
        for v in &fns {
            cut = cut.max(rel(v.pi_star(lo + 1e-10 * p.l)?, limit));
        }
        out.push(
            CheckResult::compare(S, "pi_star_rho_independent_above_zero", same, Relation::AtMost, 1e-10)
                .with_detail(format!("rho in {ladder:?}")),
        );
        out.push(
            CheckResult::compare(S, "pi_star_cutoff_limit", cut, Relation::AtMost, 1e-8)
                .with_detail(format!("limit {limit}, rho in {ladder:?}")),
        );
        Ok(CheckResult::compare(S, "pi_star_ordered_in_rho", margin, Relation::Above, 0.0)
            .with_detail(format!("rho in {ladder:?}")))
    });
    guarded(S, "pi_star_convex", out, |_| {
        let v = ValueFunction::new(*p)?;
        let vals = neg.iter().map(|&w| v.pi_star(w)).collect::<Result<Vec<_>>>()?;
        let scale = v.pi_star_at_cutoff();
        let (_, bend) = shape_violations(&vals);
        Ok(CheckResult::compare(S, "pi_star_convex", bend / scale, Relation::AtLeast, -1e-8))
    });
    guarded(S, "pi_star_ode", out, |_| {
        let v = ValueFunction::new(*p)?;
        let k = DerivedConstants::new(p)?;
        let h = 1e-5 * (hi + p.l);
        let a = 2.0 / (p.mu - p.r) * (p.lambda + p.rho + k.delta - p.r);
        let mut worst = 0.0f64;
        for &w in neg.iter().filter(|&&w| w - h > lo && w + h < 0.0) {
            let pi = v.pi_star(w)?;
            let fd = (v.pi_star(w + h)? - v.pi_star(w - h)?) / (2.0 * h);
            let b = 2.0 / (p.sigma * p.sigma) * (p.c - p.r * w) / pi;
            worst = worst.max((fd - (a - b)).abs() / (a.abs() + b.abs()));
        }
        Ok(CheckResult::compare(S, "pi_star_ode", worst, Relation::AtMost, 1e-5))
    });
    guarded(S, "l_monotonicity", out, |out| {
        let w = -p.l / 10.0;
        let ls = [p.l / 2.0, p.l, 2.0 * p.l, 4.0 * p.l];
        let fns = ls
            .iter()
            .map(|&l| ValueFunction::new(p.with_l(l)))
            .collect::<Result<Vec<_>>>()?;
        let mut pi_margin = f64::INFINITY;
        let mut psi_margin = f64::INFINITY;
        for pair in fns.windows(2) {
            pi_margin = pi_margin.min(pair[1].pi_star(w)? - pair[0].pi_star(w)?);
            psi_margin = psi_margin.min(pair[0].psi(w)? - pair[1].psi(w)?);
        }
        out.push(
            CheckResult::compare(S, "psi_decreasing_in_l", psi_margin, Relation::Above, 0.0)
                .with_detail(format!("w = {w}, L in {ls:?}")),
        );
        Ok(CheckResult::compare(S, "pi_star_increasing_in_l", pi_margin, Relation::Above, 0.0)
            .with_detail(format!("w = {w}, L in {ls:?}")))
    });
    guarded(S, "lambda_monotonicity", out, |out| {
        let v1 = ValueFunction::new(*p)?;
        let v2 = ValueFunction::new(p.with_lambda(2.0 * p.lambda))?;
        let mut up = f64::INFINITY;
        let mut down = f64::INFINITY;
        for &w in &neg {
            up = up.min(v2.pi_star(w)? - v1.pi_star(w)?);
        }
        for &w in &pos {
            down = down.min(v1.pi_star(w)? - v2.pi_star(w)?);
        }
        out.push(
            CheckResult::compare(S, "pi_star_decreasing_in_lambda_above_zero", down, Relation::Above, 0.0)
                .with_detail(format!("lambda {} vs {}", p.lambda, 2.0 * p.lambda)),
        );
        Ok(CheckResult::compare(S, "pi_star_increasing_in_lambda_below_zero", up, Relation::Above, 0.0)
            .with_detail(format!("lambda {} vs {}", p.lambda, 2.0 * p.lambda)))
    });
    guarded(S, "pi_occupation_is_small_rho_limit", out, |_| {
        let w = -p.l / 2.0;
        let m = OccupationValue::new(*p)?;
        let v = ValueFunction::new(p.with_rho(1e-6))?;
        let pl = m.pi_occupation(w)?;
        Ok(CheckResult::compare(S, "pi_occupation_is_small_rho_limit", rel(v.pi_star(w)?, pl), Relation::AtMost, 1e-3))
    });
}

/// Shape of a sampled curve from the signs of its finite-difference slopes.
pub fn observed_shape(values: &[f64]) -> Option<StrategyShape> {
    let signs: Vec<bool> = values.windows(2).map(|w| w[1] > w[0]).collect();
    let flat = values.windows(2).any(|w| w[1] == w[0]);
    if flat || signs.is_empty() {
        return None;
    }
    let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
    match (changes, signs[0]) {
        (0, false) => Some(StrategyShape::Decreasing),
        (0, true) => Some(StrategyShape::Increasing),
        (1, false) => Some(StrategyShape::DecThenInc),
        _ => None,
    }
}

fn figure1(p: &ModelParams, opts: &VerifyOptions, out: &mut Vec<CheckResult>) {
    const S: Suite = Suite::Figure1;
    let rhos = opts
        .figure_rhos
        .clone()
        .unwrap_or_else(|| vec![0.01, 0.02, 0.03, 0.04]);
    let grid = open_grid(-p.l, 0.0, SHAPE_POINTS);
    for &rho in &rhos {
        let name = format!("shape_rho_{rho}");
        guarded(S, &name, out, |_| {
            let q = p.with_rho(rho);
            let v = ValueFunction::new(q)?;
            let vals = grid.iter().map(|&w| v.pi_star(w)).collect::<Result<Vec<_>>>()?;
            let seen = observed_shape(&vals);
            let predicted = pi_monotonicity_condition(&q)?;
            let seen_txt = seen.map_or("irregular".to_string(), |s| s.to_string());
            let mut c = CheckResult::compare(S, &name, 0.0, Relation::Matches, 0.0)
                .with_detail(format!("observed {seen_txt}, classified {predicted}"));
            c.passed = seen == Some(predicted);
            c.measured = if c.passed { 0.0 } else { 1.0 };
            Ok(c)
        });
    }
}

fn asymptotic(p: &ModelParams, opts: &VerifyOptions, out: &mut Vec<CheckResult>) {
    const S: Suite = Suite::Asymptotic;
    let rhos = opts.sandwich_rhos.clone().unwrap_or_else(|| vec![p.rho]);
    let grid = uniform_grid(-p.l, p.safe_level(), SANDWICH_POINTS);
    let m = match OccupationValue::new(*p) {
        Ok(m) => m,
        Err(e) => return out.push(CheckResult::errored(S, "occupation", e)),
    };
    for rho in rhos {
        let strict = format!("sandwich_strict_rho_{rho}");
        guarded(S, &strict, out, |out| {
            let v = ValueFunction::new(p.with_rho(rho))?;
            let sq = (rho / p.lambda).powi(2);
            let mut margin = f64::INFINITY;
            let mut gap = 0.0f64;
            for &w in &grid {
                let rm = rho * m.m(w)?;
                let psi = v.psi(w)?;
                gap = gap.max((psi - rm).abs());
                if w < p.safe_level() {
                    margin = margin.min((psi - (rm - sq)).min(rm - psi));
                }
            }
            out.push(CheckResult::compare(S, &format!("sandwich_width_rho_{rho}"), gap, Relation::AtMost, sq));
            Ok(CheckResult::compare(S, &strict, margin, Relation::Above, 0.0))
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_at_reference() {
        let r = run_suite(&ModelParams::reference(0.02), Suite::All, &VerifyOptions::default()).unwrap();
        assert!(r.passed, "{r}");
        assert!(r.checks.len() > 25);
    }

    #[test]
    fn shape_reader() {
        assert_eq!(observed_shape(&[3.0, 2.0, 1.0]), Some(StrategyShape::Decreasing));
        assert_eq!(observed_shape(&[3.0, 2.0, 4.0]), Some(StrategyShape::DecThenInc));
        assert_eq!(observed_shape(&[1.0, 2.0, 1.0]), None);
        assert_eq!(observed_shape(&[1.0, 1.0]), None);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
