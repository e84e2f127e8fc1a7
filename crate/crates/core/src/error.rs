use thiserror::Error;

/// Errors produced by the solver, the value functions and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter violates a standing assumption.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A simulation configuration is unusable.
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    /// A wealth (or dual) argument lies outside the evaluation domain.
    #[error("{what} = {value} outside domain [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// The two closed-form expressions for the dual boundary at zero wealth disagree.
    #[error("boundary cross-check failed: y0 = {primary} (primary) vs {secondary} (cross-check)")]
    BoundaryMismatch { primary: f64, secondary: f64 },

    /// A candidate value function is not strictly convex where the HJB operator needs it.
    #[error("convexity violated at w = {w}: second derivative {second}")]
    Convexity { w: f64, second: f64 },

    /// The comparison sandwich around the value function does not hold.
    #[error("sandwich ordering violated at w = {w}: {lower} < {value} < {upper} fails")]
    Ordering {
        w: f64,
        lower: f64,
        value: f64,
        upper: f64,
    },

    /// Too many simulated paths produced non-finite wealth.
    #[error("simulation integrity: {blowups} of {paths} paths blew up (budget {budget})")]
    BlowUp {
        blowups: u64,
        paths: u64,
        budget: u64,
    },

    /// Something that the closed-form analysis rules out happened anyway.
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
