//! Non-ideal relays and the Preisach state they induce.
//!
//! A relay with threshold `x > 0` switches to `+1` when its input reaches
//! `x` and back to `-1` only once the input drops strictly below `-x`.
//! For a continuum of thresholds in `[x_lo, x_hi]` sharing one input, the
//! set of thresholds currently at `+1` is a finite union of closed intervals
//! ([`IntervalSet`]), updated exactly by [`state_update`].

mod ensemble;
mod interval_set;
mod preisach;
mod relay;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ensemble::RelayEnsembleOracle;
pub use interval_set::{make_initial_state, rho, state_update, Interval, IntervalSet};
pub use preisach::{preisach, relay_field, relay_signs, total_mass};
pub use relay::{relay_step, relay_trace, InputSegment, PiecewiseLinearInput, RelayOutput};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HysteresisError {
    #[error("relay threshold must be > 0, got {0}")]
    NonPositiveThreshold(f64),
    #[error("threshold range requires 0 < x_lo < x_hi, got [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("input value {0} is not finite")]
    NonFiniteInput(f64),
    #[error("input samples are not monotone (direction changes at sample {index})")]
    NonMonotone { index: usize },
    #[error("input trajectory is discontinuous at segment {index}: {end} != {start}")]
    Discontinuous { index: usize, end: f64, start: f64 },
    #[error("invalid interval set: {0}")]
    InvalidIntervals(String),
    #[error("state violates compatibility with input {w}: sub-interval [{lo}, {hi}] {reason}")]
    CompatibilityViolation {
        w: f64,
        lo: f64,
        hi: f64,
        reason: &'static str,
    },
    #[error("relay ensemble needs at least two ascending thresholds and one state per threshold")]
    InvalidEnsemble,
}

pub type Result<T> = std::result::Result<T, HysteresisError>;

/// The closed threshold domain `[x_lo, x_hi]` with `0 < x_lo < x_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRange {
    lo: f64,
    hi: f64,
}

impl ThresholdRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(HysteresisError::InvalidRange { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}
