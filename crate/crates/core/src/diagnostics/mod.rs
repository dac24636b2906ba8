//! Post-processing checks for the a-priori properties of physical runs:
//! conservation of `U + v`, monotone `U` and `v`, the exponential decay
//! bound on `v`, trapping of `w`, convergence of `u` to its uniform limit,
//! and the stationary phenotype pattern.

mod fourier;
mod pattern;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fourier::{eigenvalue, fourier_modes, mode_envelope_excess, mode_zero_identity_error};
pub use pattern::{default_window, extract_pattern, PhenotypePattern};

use crate::model::InitialData;
use crate::solver::{SystemState, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("decay bound needs U0 > 0, x_hi < 1/2 and |w0| < 1/2: {0}")]
    DecayBoundNotApplicable(String),
    #[error(
        "Preisach state still changing: last change at t = {last_change} is inside the window"
    )]
    NotStationary { last_change: f64 },
}

pub type Result<T> = std::result::Result<T, DiagnosticsError>;

/// `max_n |U_n + v_n - (U0 + v0)| / (U0 + v0)` over the recorded steps.
pub fn conservation_audit(traj: &Trajectory) -> f64 {
    let total = traj.initial_total();
    let scale = if total != 0.0 { total.abs() } else { 1.0 };
    traj.scalars
        .iter()
        .map(|r| (r.mass + r.v - total).abs() / scale)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// Largest step-to-step increase of `v`.
    pub max_v_increase: f64,
    /// Largest step-to-step decrease of `U`.
    pub max_mass_decrease: f64,
    pub violations: usize,
}

/// Counts consecutive records where `v` rises or `U` falls by more than `slack`.
pub fn monotonicity_audit(traj: &Trajectory, slack: f64) -> MonotonicityReport {
    let mut report = MonotonicityReport {
        max_v_increase: 0.0,
        max_mass_decrease: 0.0,
        violations: 0,
    };
    for pair in traj.scalars.windows(2) {
        let dv = pair[1].v - pair[0].v;
        let dm = pair[0].mass - pair[1].mass;
        report.max_v_increase = report.max_v_increase.max(dv);
        report.max_mass_decrease = report.max_mass_decrease.max(dm);
        if dv > slack || dm > slack {
            report.violations += 1;
        }
    }
    report
}

/// `1/2 - max(x_hi, |w0|)`: the distance `w` keeps from the band edges.
pub fn decay_delta(x_hi: f64, w0: f64) -> f64 {
    0.5 - x_hi.max(w0.abs())
}

/// `max_t v(t) e^{δ U0 t} / v0`; the decay bound holds when this is `<= 1`.
pub fn decay_bound_check(traj: &Trajectory, delta: f64) -> Result<f64> {
    let x_hi = traj.params.x_hi();
    if traj.initial_mass <= 0.0 {
        return Err(DiagnosticsError::DecayBoundNotApplicable(format!(
            "U0 = {}",
            traj.initial_mass
        )));
    }
    if x_hi >= 0.5 {
        return Err(DiagnosticsError::DecayBoundNotApplicable(format!(
            "x_hi = {x_hi}"
        )));
    }
    if traj.initial_w.abs() >= 0.5 {
        return Err(DiagnosticsError::DecayBoundNotApplicable(format!(
            "w0 = {}",
            traj.initial_w
        )));
    }
    if traj.initial_v == 0.0 {
        return Ok(0.0);
    }
    let rate = delta * traj.initial_mass;
    Ok(traj
        .scalars
        .iter()
        .map(|r| r.v * (rate * r.t).exp() / traj.initial_v)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub max_abs_w: f64,
    /// `max(x_hi, |w0|)`
    pub bound: f64,
    pub clamp_events: usize,
}

pub fn band_audit(traj: &Trajectory) -> BandReport {
    BandReport {
        max_abs_w: traj.scalars.iter().map(|r| r.w.abs()).fold(0.0, f64::max),
        bound: traj.params.x_hi().max(traj.initial_w.abs()),
        clamp_events: traj.counts.clamp_events,
    }
}

/// `(U0 + v0) / (x_hi - x_lo)`, the large-time value of `u`.
pub fn uniform_limit(init: &InitialData) -> f64 {
    let range = init.u0.range();
    (crate::hysteresis::total_mass(&init.u0) + init.v0) / range.width()
}

/// `max_i |u_i - (U0 + v0) / (x_hi - x_lo)|`.
pub fn uniform_limit_distance(s: &SystemState, init: &InitialData) -> f64 {
    let limit = uniform_limit(init);
    s.u.values()
        .iter()
        .map(|u| (u - limit).abs())
        .fold(0.0, f64::max)
}

/// Sup-norm of `u` minus its mean, i.e. of everything above mode 0.
pub fn higher_mode_sup(s: &SystemState) -> f64 {
    let mean = s.mass() / s.u.range().width();
    s.u.values()
        .iter()
        .map(|u| (u - mean).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub t_final: f64,
    pub v_final: f64,
    pub w_final: f64,
    /// `None` when the decay bound does not apply to this run.
    pub decay_margin: Option<f64>,
    pub uniform_distance: f64,
    pub conservation_residual: f64,
    pub mode_energy: Vec<f64>,
}

impl AsymptoticsReport {
    pub fn from_run(traj: &Trajectory, init: &InitialData, modes: usize) -> Self {
        let delta = decay_delta(traj.params.x_hi(), init.w0);
        let s = &traj.final_state;
        Self {
            t_final: s.t,
            v_final: s.v,
            w_final: s.w,
            decay_margin: decay_bound_check(traj, delta).ok(),
            uniform_distance: uniform_limit_distance(s, init),
            conservation_residual: conservation_audit(traj),
            mode_energy: fourier_modes(&s.u, modes),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DensityField;
    use crate::hysteresis::{IntervalSet, ThresholdRange};
    use crate::model::ModelParams;
    use crate::solver::run;

    fn range() -> ThresholdRange {
        ThresholdRange::new(0.1, 0.4).unwrap()
    }

    fn init(u: f64, v: f64, w: f64) -> InitialData {
        InitialData::new(
            DensityField::constant(range(), 33, u),
            v,
            w,
            IntervalSet::full(range()),
            false,
        )
        .unwrap()
    }

    #[test]
    fn zero_population_audits() {
        let p = ModelParams::new(0.1, 0.4, 1.0, 33, 1e-2, 1.0).unwrap();
        let traj = run(&p, &init(0.0, 2.0, 0.1), 10).unwrap();
        assert_eq!(conservation_audit(&traj), 0.0);
        assert_eq!(monotonicity_audit(&traj, 0.0).violations, 0);
        assert!(decay_bound_check(&traj, 0.1).is_err());
    }

    #[test]
    fn vacuous_decay_bound_without_nutrients() {
        let p = ModelParams::new(0.1, 0.4, 1.0, 33, 1e-2, 1.0).unwrap();
        let traj = run(&p, &init(1.0, 0.0, 0.0), 10).unwrap();
        assert_eq!(decay_bound_check(&traj, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn decay_bound_rejects_wide_ranges() {
        let r = ThresholdRange::new(0.1, 0.6).unwrap();
        let data = InitialData::new(
            DensityField::constant(r, 33, 1.0),
            1.0,
            0.0,
            IntervalSet::full(r),
            false,
        )
        .unwrap();
        let p = ModelParams::new(0.1, 0.6, 1.0, 33, 1e-2, 0.1).unwrap();
        let traj = run(&p, &data, 1).unwrap();
        assert!(matches!(
            decay_bound_check(&traj, 0.1),
            Err(DiagnosticsError::DecayBoundNotApplicable(_))
        ));
    }

    #[test]
    fn slowed_nutrient_decay_fails_the_bound() {
        let p = ModelParams::new(0.1, 0.4, 1.0, 33, 1e-2, 5.0).unwrap();
        let mut traj = run(&p, &init(1.0, 1.0, 0.0), 10).unwrap();
        let honest = decay_bound_check(&traj, 0.1).unwrap();
        assert!(honest <= 1.0);
        // freeze v: the bound must now be exceeded
        for r in &mut traj.scalars {
            r.v = 1.0;
        }
        assert!(decay_bound_check(&traj, 0.1).unwrap() > 1.0);
    }

    #[test]
    fn mis_coupled_scheme_is_caught_by_the_audit() {
        let p = ModelParams::new(0.1, 0.4, 1.0, 33, 1e-2, 5.0).unwrap();
        let mut traj = run(&p, &init(1.0, 1.0, 0.0), 10).unwrap();
        assert!(conservation_audit(&traj) < 1e-12);
        // a scheme that forgets the consumption term leaves v constant
        for r in &mut traj.scalars {
            r.v = 1.0;
        }
        assert!(conservation_audit(&traj) >= p.dt);
    }

    #[test]
    fn uniform_distance_examples() {
        let data = init(1.0, 1.0, 0.0);
        let limit = uniform_limit(&data);
        assert!((limit - 1.3 / 0.3).abs() < 1e-12);
        let at_limit = SystemState {
            t: 0.0,
            u: DensityField::constant(range(), 33, limit),
            v: 0.0,
            w: 0.0,
            a: IntervalSet::full(range()),
        };
        assert_eq!(uniform_limit_distance(&at_limit, &data), 0.0);

        let bumpy = InitialData::new(
            DensityField::from_fn(range(), 33, |x| 1.0 + x),
            1.0,
            0.0,
            IntervalSet::full(range()),
            false,
        )
        .unwrap();
        let s0 = SystemState::initial(&bumpy);
        let target = uniform_limit(&bumpy);
        let expected = (1.1 - target).abs().max((1.4 - target).abs());
        assert!((uniform_limit_distance(&s0, &bumpy) - expected).abs() < 1e-12);
    }

    #[test]
    fn band_report_uses_initial_imbalance() {
        let p = ModelParams::new(0.1, 0.4, 1.0, 33, 1e-2, 1.0).unwrap();
        let traj = run(&p, &init(1.0, 1.0, 0.45), 10).unwrap();
        let band = band_audit(&traj);
        assert_eq!(band.bound, 0.45);
        assert!(band.max_abs_w <= band.bound);
    }
}
