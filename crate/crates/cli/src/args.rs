use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use parisian_core::sim::{Barrier, Clock, Estimand, StrategySpec};
use parisian_core::verify::Suite;
use parisian_core::ModelParams;
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PARISIAN_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "parisian",
    version,
    about = "Minimum probability of lifetime exponential Parisian ruin: solve, tabulate, simulate, verify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", content = "args", rename_all = "snake_case")]
pub enum Command {
    /// Free boundaries, derived constants and the ψ(0) coefficient as JSON.
    Solve(SolveArgs),
    /// ψ, π*, π₀, ψ₀, m, ρm and the HJB residual on a wealth grid (CSV).
    Eval(EvalArgs),
    /// π₀, π_L and π* for several ρ on a wealth grid (CSV).
    Figure1(Figure1Args),
    /// Monte Carlo estimate of ψ(w0) or m(w0) under a feedback strategy (JSON).
    Simulate(SimulateArgs),
    /// Run a property suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

/// Model parameters; all required, decimal or scientific notation.
#[derive(Debug, Clone, Copy, Args, Serialize, Deserialize)]
pub struct ParamArgs {
    /// Riskless rate.
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    /// Drift of the risky asset.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: f64,
    /// Volatility.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: f64,
    /// Force of mortality.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Hazard rate of the Parisian clock.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    /// Consumption rate.
    #[arg(long, allow_negative_numbers = true)]
    pub c: f64,
    /// Lower cutoff; wealth is absorbed at -L.
    #[arg(long = "L", allow_negative_numbers = true)]
    #[serde(rename = "L")]
    pub l: f64,
}

impl ParamArgs {
    pub fn model(&self) -> ModelParams {
        ModelParams {
            r: self.r,
            mu: self.mu,
            sigma: self.sigma,
            lambda: self.lambda,
            rho: self.rho,
            c: self.c,
            l: self.l,
        }
    }
}

/// Where results go and what accompanies them.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output file (default: standard output for JSON, `<out-dir>/<command>.csv` for CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for default output files.
    #[arg(long, env = OUT_DIR_ENV)]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
    /// Validate inputs and emit only the manifest.
    #[arg(long)]
    #[serde(skip)]
    pub manifest_only: bool,
    /// Record wall-clock timings in the manifest (makes outputs differ between runs).
    #[arg(long)]
    #[serde(skip)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Left end of the grid (default -L).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_min: Option<f64>,
    /// Right end of the grid (default c/r).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_max: Option<f64>,
    /// Number of grid points.
    #[arg(long, default_value_t = 2048)]
    pub points: usize,
    /// Extend ψ, m and the strategies by their constants outside [-L, c/r].
    #[arg(long)]
    pub clamp: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Figure1Args {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Hazard rates for the π* columns.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 0.02, 0.03, 0.04])]
    pub rhos: Vec<f64>,
    /// Number of grid points on [-L, c/r]; the -L point uses the one-sided limit.
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Initial wealth.
    #[arg(long, allow_negative_numbers = true)]
    pub w0: f64,
    #[arg(long, default_value_t = 200_000)]
    pub paths: u64,
    /// Euler step in years.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// optimal, lifetime_ruin or occupation_limit.
    #[arg(long, default_value = "optimal")]
    pub strategy: StrategySpec,
    /// parisian_value or occupation_value.
    #[arg(long, default_value = "parisian_value")]
    pub mode: Estimand,
    /// excursion_budget or per_step_bernoulli.
    #[arg(long, default_value = "excursion_budget")]
    pub clock: Clock,
    /// Absorb at the deep cutoff instead of -L (restricted problem, lifetime_ruin only).
    #[arg(long)]
    pub restricted: bool,
    /// Per-path time cap in years (default 20/λ).
    #[arg(long)]
    pub max_time: Option<f64>,
    /// Pair each path with its mirrored Brownian path.
    #[arg(long)]
    pub antithetic: bool,
    /// Worker threads (the estimate does not depend on this).
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl SimulateArgs {
    pub fn barrier(&self) -> Barrier {
        if self.restricted {
            Barrier::Restricted
        } else {
            Barrier::Truncated
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// boundaries, convexity, hjb, monotonicity, figure1, asymptotic or all.
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    /// Hazard rates compared pointwise by the monotonicity suite (default ρ/4, ρ, 5ρ).
    #[arg(long, value_delimiter = ',')]
    pub rho_ladder: Option<Vec<f64>>,
    /// Hazard rates classified by the figure1 suite (default 0.01,0.02,0.03,0.04).
    #[arg(long, value_delimiter = ',')]
    pub figure_rhos: Option<Vec<f64>>,
    /// Hazard rates for the asymptotic sandwich (default ρ).
    #[arg(long, value_delimiter = ',')]
    pub sandwich_rhos: Option<Vec<f64>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run (JSON output, or a CSV sidecar).
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded location.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Validate the recorded inputs without computing.
    #[arg(long)]
    pub manifest_only: bool,
}
