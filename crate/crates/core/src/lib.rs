//! Minimum probability of lifetime exponential Parisian ruin in a Black–Scholes market.
//!
//! Wealth follows `dW = (r W + (μ − r) π − c) dt + σ π dB`. Ruin is declared when an
//! excursion below zero outlasts an exponential clock of rate ρ before death (rate λ).
//! The minimum ruin probability ψ is the Legendre conjugate of the solution of a linear
//! free-boundary problem ([`dual`]); [`value`] recovers ψ, the optimal strategy π*, and
//! the occupation-time analogue m. [`sim`] estimates the same functionals by Monte Carlo.

pub mod asymptotics;
pub mod dual;
pub mod error;
pub mod hjb;
pub mod params;
pub mod restricted;
pub mod sim;
pub mod tables;
pub mod value;
pub mod verify;

pub use asymptotics::{asymptotic_sandwich, pi_monotonicity_condition, AsymptoticSandwich, Sandwich, StrategyShape};
pub use dual::{eval_g, solve_boundaries, solve_boundary_ratio, DualFunction, DualProblem, DualSolution, Side};
pub use error::{Error, Result};
pub use hjb::{hjb_residual, Affine, CandidateFunction, HjbOperator, Jet};
pub use params::{derive_constants, DerivedConstants, ModelParams};
pub use restricted::{pi_zero, RestrictedValue};
pub use value::{OccupationValue, ValueFunction};
