//! Problem definition for the two-phenotype growth model.
//!
//! Unknowns: the biomass density `u(x, t)` over switching thresholds
//! `x ∈ [x_lo, x_hi]`, the total nutrient amount `v(t)`, and the nutrient
//! imbalance `w(t) = f1 / (f1 + f-1) - 1/2`. The system reads
//!
//! ```text
//! u_t = D u_xx + (1/2 + w r(x, t)) v u
//! v'  = -(U/2 + w P) v
//! w'  = -(1/2 + w)(1/2 - w) P
//! ```
//!
//! with zero-flux boundaries, `r` the relay field driven by `w`,
//! `U = ∫ u` and `P = ∫ u r`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::DensityField;
use crate::hysteresis::{HysteresisError, IntervalSet, RelayOutput, ThresholdRange};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("non-physical initial data: {0}")]
    NonPhysical(String),
    #[error("f1 + f-1 = 0: the nutrient imbalance is undefined")]
    DegenerateNutrients,
    #[error("nutrient imbalance w = {0} lies outside [-1/2, 1/2]")]
    DeviationOutOfBand(f64),
    #[error(transparent)]
    Hysteresis(#[from] HysteresisError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub range: ThresholdRange,
    /// Diffusion coefficient `D` (the model fixes it to 1; exposed for experiments).
    pub diffusion: f64,
    pub n_grid: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl ModelParams {
    pub fn new(
        x_lo: f64,
        x_hi: f64,
        diffusion: f64,
        n_grid: usize,
        dt: f64,
        t_end: f64,
    ) -> Result<Self> {
        let range = ThresholdRange::new(x_lo, x_hi)?;
        let p = Self {
            range,
            diffusion,
            n_grid,
            dt,
            t_end,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion.is_finite() && self.diffusion >= 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "diffusion must be finite and >= 0, got {}",
                self.diffusion
            )));
        }
        if self.n_grid < 2 {
            return Err(ModelError::InvalidParams(format!(
                "n_grid must be >= 2, got {}",
                self.n_grid
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "t_end must be >= 0, got {}",
                self.t_end
            )));
        }
        Ok(())
    }

    pub fn x_lo(&self) -> f64 {
        self.range.lo()
    }

    pub fn x_hi(&self) -> f64 {
        self.range.hi()
    }

    pub fn grid_spacing(&self) -> f64 {
        self.range.width() / (self.n_grid - 1) as f64
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    pub fn with_grid(self, n_grid: usize) -> Self {
        Self { n_grid, ..self }
    }

    pub fn with_t_end(self, t_end: f64) -> Self {
        Self { t_end, ..self }
    }
}

/// Largest step keeping one explicit `w` move below `x_lo / 4`.
///
/// Uses `|w'| <= |P| / 4 <= (U + v) / 4`, with `U + v` conserved. Capped at
/// `1e-2` so the reaction stays well resolved.
pub fn suggest_dt(x_lo: f64, total_amount: f64) -> f64 {
    let bound = if total_amount > 0.0 {
        x_lo / total_amount
    } else {
        f64::INFINITY
    };
    bound.min(1e-2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub u0: DensityField,
    pub v0: f64,
    pub w0: f64,
    pub a0: IntervalSet,
    /// Admit sign-indefinite `u0` and negative `v0`; physical diagnostics are off.
    pub allow_nonphysical: bool,
}

impl InitialData {
    pub fn new(
        u0: DensityField,
        v0: f64,
        w0: f64,
        a0: IntervalSet,
        allow_nonphysical: bool,
    ) -> Result<Self> {
        let data = Self {
            u0,
            v0,
            w0,
            a0,
            allow_nonphysical,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u0.range() != self.a0.range() {
            return Err(ModelError::InvalidParams(
                "u0 and A0 live on different threshold ranges".into(),
            ));
        }
        if let Some(bad) = self.u0.values().iter().find(|u| !u.is_finite()) {
            return Err(ModelError::NonPhysical(format!("u0 contains {bad}")));
        }
        if !self.v0.is_finite() {
            return Err(ModelError::NonPhysical(format!("v0 = {}", self.v0)));
        }
        if !(self.w0.abs() <= 0.5) {
            return Err(ModelError::DeviationOutOfBand(self.w0));
        }
        if !self.allow_nonphysical {
            if self.u0.min_value() < 0.0 {
                return Err(ModelError::NonPhysical(format!(
                    "u0 must be >= 0, min is {}",
                    self.u0.min_value()
                )));
            }
            if self.v0 < 0.0 {
                return Err(ModelError::NonPhysical(format!(
                    "v0 must be >= 0, got {}",
                    self.v0
                )));
            }
        }
        self.a0.check_compatibility(self.w0)?;
        Ok(())
    }

    /// Whether the physical-data monitors apply to runs from this data.
    pub fn is_physical(&self) -> bool {
        !self.allow_nonphysical
    }
}

/// Nutrient amounts for the `+1` and `-1` phenotypes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NutrientPair {
    pub f1: f64,
    pub fm1: f64,
}

/// `(f1, f-1) -> (v, w) = (f1 + f-1, f1 / (f1 + f-1) - 1/2)`.
pub fn nutrients_to_vw(p: NutrientPair) -> Result<(f64, f64)> {
    if p.f1 < 0.0 || p.fm1 < 0.0 {
        return Err(ModelError::NonPhysical(format!(
            "nutrient amounts must be >= 0, got ({}, {})",
            p.f1, p.fm1
        )));
    }
    let v = p.f1 + p.fm1;
    if !(v > 0.0) {
        return Err(ModelError::DegenerateNutrients);
    }
    Ok((v, p.f1 / v - 0.5))
}

pub fn vw_to_nutrients(v: f64, w: f64) -> Result<NutrientPair> {
    if !(w.abs() <= 0.5) {
        return Err(ModelError::DeviationOutOfBand(w));
    }
    if !(v >= 0.0) {
        return Err(ModelError::NonPhysical(format!("v must be >= 0, got {v}")));
    }
    Ok(NutrientPair {
        f1: v * (0.5 + w),
        fm1: v * (0.5 - w),
    })
}

/// Growth rate `(1/2 + w r) v` of the phenotype with relay output `r`.
pub fn reaction_coefficient(v: f64, w: f64, r: RelayOutput) -> f64 {
    (0.5 + w * r.sign()) * v
}

/// `v' = -(U/2 + w P) v`.
pub fn v_rhs(mass: f64, p: f64, v: f64, w: f64) -> f64 {
    -(0.5 * mass + w * p) * v
}

/// `w' = -(1/2 + w)(1/2 - w) P`.
pub fn w_rhs(p: f64, w: f64) -> f64 {
    -(0.5 + w) * (0.5 - w) * p
}
