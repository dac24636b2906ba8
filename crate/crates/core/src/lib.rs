//! Reaction-diffusion systems whose reaction terms are driven by non-ideal
//! relays with diffusing thresholds.
//!
//! The biomass density `u(x, t)` lives on the space of relay thresholds
//! `x ∈ [x_lo, x_hi]`; every relay sees the same input `w(t)`, the nutrient
//! imbalance. The relay configuration is tracked exactly as a finite union of
//! intervals, and the parabolic part is integrated with a scheme that conserves
//! `∫u + v` to round-off.
//!
//! - [`hysteresis`]: relays, Preisach states, the `U` and `P` operators
//! - [`model`]: parameters, initial data, right-hand sides
//! - [`solver`]: time stepping and trajectories
//! - [`diagnostics`]: audits of conservation, monotonicity, decay, limits and patterns
//! - [`config`], [`output`], [`verify`]: the command-line layer

// `!(a > b)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod field;
pub mod hysteresis;
pub mod model;
pub mod output;
pub mod solver;
pub mod verify;

pub use field::DensityField;
pub use hysteresis::{IntervalSet, RelayOutput, ThresholdRange};
pub use model::{InitialData, ModelParams};
pub use solver::{run, run_with, RunOptions, SystemState, Trajectory};
