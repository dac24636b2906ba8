//! Time integration of the coupled density / nutrient / imbalance system.
//!
//! One step is a first-order Lie splitting:
//!
//! 1. explicit Euler for `w` with `P` from the current state, then the
//!    Preisach state follows the monotone move `w -> w_new`;
//! 2. explicit Euler for `(u, v)` with the relay field frozen at the new
//!    state and `w` frozen at its old value;
//! 3. Crank–Nicolson diffusion with zero-flux ends.
//!
//! Steps 2 and 3 both conserve `U + v` exactly in exact arithmetic on the
//! shared trapezoid quadrature, so the recorded conservation residual only
//! measures round-off.

mod diffusion;
mod tridiag;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diffusion::{diffusion_step, NeumannCrankNicolson};
pub use tridiag::TridiagonalLu;

pub use crate::field::DensityField;
use crate::hysteresis::{
    preisach, relay_signs, state_update, total_mass, InputSegment, IntervalSet,
};
use crate::model::{v_rhs, w_rhs, InitialData, ModelError, ModelParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("negative density at t = {t}: {cells} cell(s), min u = {min_value}")]
    NegativeDensity {
        t: f64,
        cells: usize,
        min_value: f64,
    },
    #[error("invariant breach at t = {t}: {reason}")]
    InvariantBreach { t: f64, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, SolverError>;

/// Full dynamical state `(t, u, v, w, A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    pub u: DensityField,
    pub v: f64,
    pub w: f64,
    pub a: IntervalSet,
}

impl SystemState {
    pub fn initial(init: &InitialData) -> Self {
        Self {
            t: 0.0,
            u: init.u0.clone(),
            v: init.v0,
            w: init.w0,
            a: init.a0.clone(),
        }
    }

    pub fn mass(&self) -> f64 {
        total_mass(&self.u)
    }

    pub fn preisach(&self) -> f64 {
        preisach(&self.u, &self.a)
    }

    fn looks_physical(&self) -> bool {
        self.u.min_value() >= 0.0 && self.v >= 0.0 && self.w.abs() <= 0.5
    }
}

/// Result of the `w` / Preisach-state substep.
#[derive(Debug, Clone, PartialEq)]
pub struct WUpdate {
    pub w: f64,
    pub a: IntervalSet,
    /// The Euler value left `[-1/2, 1/2]` and was clamped back.
    pub clamped: bool,
}

/// Explicit Euler for `w' = -(1/2 + w)(1/2 - w) P(u, A)` followed by the
/// Preisach update along the (monotone) move.
pub fn advance_w_and_state(s: &SystemState, dt: f64) -> WUpdate {
    let p = s.preisach();
    let raw = s.w + dt * w_rhs(p, s.w);
    let w = raw.clamp(-0.5, 0.5);
    let seg = InputSegment::new(s.w, w).expect("finite state produces finite input");
    WUpdate {
        w,
        a: state_update(&s.a, seg),
        clamped: w != raw,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionUpdate {
    pub u: DensityField,
    pub v: f64,
    /// Cells where the Euler update went negative.
    pub negative_cells: usize,
}

/// Explicit Euler for the reaction part with the relay field of `a_used`
/// frozen over the substep.
///
/// `u_i -> u_i (1 + dt (1/2 + w r_i) v)` and `v -> v + dt v'(U, P)`, where
/// `U` and `P` use the same weights and relay values, so
/// `Σ w_i Δu_i = -Δv` holds up to round-off.
pub fn reaction_step(s: &SystemState, a_used: &IntervalSet, dt: f64) -> ReactionUpdate {
    let signs = relay_signs(a_used, &s.u.nodes());
    let mass = total_mass(&s.u);
    let p = s.u.weighted_integral(&signs);
    let dv = dt * v_rhs(mass, p, s.v, s.w);
    let values: Vec<f64> =
        s.u.values()
            .iter()
            .zip(&signs)
            .map(|(&u, &r)| u + dt * (0.5 + s.w * r) * s.v * u)
            .collect();
    let negative_cells = values.iter().filter(|&&u| u < 0.0).count();
    ReactionUpdate {
        u: s.u.with_values(values),
        v: s.v + dv,
        negative_cells,
    }
}

/// Options applied to a whole run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Keep every `stride`-th state as a snapshot.
    pub stride: usize,
    /// Treat clamp and negativity events as errors.
    pub strict: bool,
    /// Relative tolerance on `|U + v - (U0 + v0)|`.
    pub conservation_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            stride: 1,
            strict: false,
            conservation_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorCounts {
    pub clamp_events: usize,
    pub negative_density_events: usize,
    pub substep_events: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct StepEvents {
    clamped: usize,
    negative_cells: usize,
    substeps: usize,
}

/// Post-step invariant checks against the initial totals.
#[derive(Debug, Clone)]
struct Monitor {
    reference_total: f64,
    scale: f64,
    physical: bool,
    strict: bool,
    conservation_tol: f64,
    counts: MonitorCounts,
}

impl Monitor {
    fn new(reference: &SystemState, physical: bool, strict: bool, conservation_tol: f64) -> Self {
        let mass = reference.mass();
        let total = mass + reference.v;
        let scale = if physical {
            total
        } else {
            mass.abs() + reference.v.abs()
        };
        Self {
            reference_total: total,
            scale,
            physical,
            strict,
            conservation_tol,
            counts: MonitorCounts::default(),
        }
    }

    fn residual(&self, s: &SystemState) -> f64 {
        let diff = (s.mass() + s.v - self.reference_total).abs();
        if self.scale > 0.0 {
            diff / self.scale
        } else {
            diff
        }
    }

    fn inspect(&mut self, s: &SystemState, events: StepEvents) -> Result<f64> {
        self.counts.substep_events += events.substeps;
        if events.clamped > 0 {
            self.counts.clamp_events += events.clamped;
            if self.strict {
                return Err(SolverError::InvariantBreach {
                    t: s.t,
                    reason: format!("w left [-1/2, 1/2] and was clamped to {}", s.w),
                });
            }
        }
        if self.physical {
            let negative = s.u.values().iter().filter(|&&u| u < 0.0).count();
            if negative > 0 || events.negative_cells > 0 || s.v < 0.0 {
                self.counts.negative_density_events += 1;
                if self.strict {
                    return Err(SolverError::NegativeDensity {
                        t: s.t,
                        cells: negative.max(events.negative_cells),
                        min_value: s.u.min_value().min(s.v),
                    });
                }
            }
        }
        let residual = self.residual(s);
        if !(residual <= self.conservation_tol) {
            return Err(SolverError::InvariantBreach {
                t: s.t,
                reason: format!(
                    "conservation residual {residual:e} exceeds {:e}",
                    self.conservation_tol
                ),
            });
        }
        if let Err(e) = s.a.check_compatibility(s.w) {
            return Err(SolverError::InvariantBreach {
                t: s.t,
                reason: e.to_string(),
            });
        }
        Ok(residual)
    }
}

/// Steps the system with a cached diffusion operator.
#[derive(Debug, Clone)]
struct Integrator {
    params: ModelParams,
    diffusion: Option<(f64, NeumannCrankNicolson)>,
}

impl Integrator {
    fn new(params: ModelParams) -> Self {
        Self {
            params,
            diffusion: None,
        }
    }

    fn diffuse(&mut self, u: &DensityField, dt: f64) -> DensityField {
        match &self.diffusion {
            Some((cached, op)) if *cached == dt => op.apply(u),
            _ => {
                let op = NeumannCrankNicolson::for_field(u, self.params.diffusion, dt);
                let out = op.apply(u);
                self.diffusion = Some((dt, op));
                out
            }
        }
    }

    fn lie_step(&mut self, s: &SystemState, dt: f64, events: &mut StepEvents) -> SystemState {
        let w_update = advance_w_and_state(s, dt);
        events.clamped += usize::from(w_update.clamped);
        let reaction = reaction_step(s, &w_update.a, dt);
        events.negative_cells += reaction.negative_cells;
        let u = self.diffuse(&reaction.u, dt);
        SystemState {
            t: s.t + dt,
            u,
            v: reaction.v,
            w: w_update.w,
            a: w_update.a,
        }
    }

    /// One step of length `dt`, split into equal substeps when a single
    /// explicit `w` move would exceed `x_lo / 4`.
    fn advance(&mut self, s: &SystemState, dt: f64) -> (SystemState, StepEvents) {
        let mut events = StepEvents::default();
        let max_move = 0.25 * self.params.x_lo();
        let predicted = (dt * w_rhs(s.preisach(), s.w)).abs();
        let pieces = if predicted > max_move {
            (predicted / max_move).ceil() as usize
        } else {
            1
        };
        if pieces > 1 {
            events.substeps += 1;
        }
        let sub_dt = dt / pieces as f64;
        let mut cur = self.lie_step(s, sub_dt, &mut events);
        for _ in 1..pieces {
            cur = self.lie_step(&cur, sub_dt, &mut events);
        }
        cur.t = s.t + dt;
        (cur, events)
    }
}

/// Advances `s` by `p.dt`, checking conservation against `s` itself,
/// positivity (when `s` is physical), the `w` band, and compatibility of
/// the new Preisach state.
pub fn step(s: &SystemState, p: &ModelParams) -> Result<SystemState> {
    p.validate()?;
    let mut monitor = Monitor::new(s, s.looks_physical(), true, 1e-10);
    let (next, events) = Integrator::new(*p).advance(s, p.dt);
    monitor.inspect(&next, events)?;
    Ok(next)
}

/// One recorded row of scalar observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarRecord {
    pub t: f64,
    pub mass: f64,
    pub v: f64,
    pub w: f64,
    pub p: f64,
    pub residual: f64,
}

impl ScalarRecord {
    fn of(s: &SystemState, residual: f64) -> Self {
        Self {
            t: s.t,
            mass: s.mass(),
            v: s.v,
            w: s.w,
            p: s.preisach(),
            residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub stride: usize,
    pub physical: bool,
    pub initial_mass: f64,
    pub initial_v: f64,
    pub initial_w: f64,
    /// One record per step, starting with the initial state.
    pub scalars: Vec<ScalarRecord>,
    /// The initial state and every `stride`-th state after it.
    pub snapshots: Vec<SystemState>,
    pub final_state: SystemState,
    /// Times at which the Preisach state changed.
    pub state_changes: Vec<f64>,
    pub counts: MonitorCounts,
}

impl Trajectory {
    pub fn initial_total(&self) -> f64 {
        self.initial_mass + self.initial_v
    }
}

/// Number of steps needed to reach `t_end` with step `dt`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    let ratio = t_end / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Runs from `init` until `t_end` with default options and the given stride.
pub fn run(p: &ModelParams, init: &InitialData, stride: usize) -> Result<Trajectory> {
    run_with(
        p,
        init,
        &RunOptions {
            stride,
            ..RunOptions::default()
        },
    )
}

pub fn run_with(p: &ModelParams, init: &InitialData, options: &RunOptions) -> Result<Trajectory> {
    p.validate()?;
    init.validate()?;
    if init.u0.range() != p.range || init.u0.len() != p.n_grid {
        return Err(ModelError::InvalidParams(
            "initial density does not match the parameter grid".into(),
        )
        .into());
    }
    let stride = options.stride.max(1);
    let mut state = SystemState::initial(init);
    let mut monitor = Monitor::new(
        &state,
        init.is_physical(),
        options.strict,
        options.conservation_tol,
    );
    let mut integrator = Integrator::new(*p);

    let n = step_count(p.t_end, p.dt);
    let mut scalars = Vec::with_capacity(n + 1);
    scalars.push(ScalarRecord::of(&state, 0.0));
    let mut snapshots = vec![state.clone()];
    let mut state_changes = Vec::new();

    for k in 1..=n {
        let t_next = if k == n { p.t_end } else { k as f64 * p.dt };
        let dt = t_next - state.t;
        let (mut next, events) = integrator.advance(&state, dt);
        next.t = t_next;
        let residual = monitor.inspect(&next, events)?;
        if next.a != state.a {
            state_changes.push(t_next);
        }
        scalars.push(ScalarRecord::of(&next, residual));
        if k % stride == 0 {
            snapshots.push(next.clone());
        }
        state = next;
    }

    Ok(Trajectory {
        params: *p,
        stride,
        physical: init.is_physical(),
        initial_mass: total_mass(&init.u0),
        initial_v: init.v0,
        initial_w: init.w0,
        scalars,
        snapshots,
        final_state: state,
        state_changes,
        counts: monitor.counts,
    })
}
