use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Result};
use crate::hysteresis::IntervalSet;
use crate::solver::Trajectory;

/// Terminal split of the threshold range into `+1` and `-1` phenotypes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhenotypePattern {
    pub a1: IntervalSet,
    pub am1: IntervalSet,
    pub n_intervals: usize,
    /// Time of the last change of the Preisach state (0 if it never changed).
    pub stationary_since: f64,
}

/// 10% of the horizon.
pub fn default_window(traj: &Trajectory) -> f64 {
    0.1 * traj.params.t_end
}

/// Returns the final Preisach state as a pattern, provided it did not change
/// during the trailing `window`.
pub fn extract_pattern(traj: &Trajectory, window: f64) -> Result<PhenotypePattern> {
    let t_final = traj.final_state.t;
    let last_change = traj.state_changes.last().copied();
    if let Some(last) = last_change {
        if last > t_final - window {
            return Err(DiagnosticsError::NotStationary { last_change: last });
        }
    }
    let a1 = traj.final_state.a.clone();
    Ok(PhenotypePattern {
        am1: a1.complement(),
        n_intervals: a1.interval_count(),
        a1,
        stationary_since: last_change.unwrap_or(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DensityField;
    use crate::hysteresis::{rho, ThresholdRange};
    use crate::model::{InitialData, ModelParams};
    use crate::solver::run;

    fn range() -> ThresholdRange {
        ThresholdRange::new(0.1, 0.4).unwrap()
    }

    #[test]
    fn frozen_state_is_stationary() {
        // no biomass: P = 0 and w never moves
        let data = InitialData::new(
            DensityField::constant(range(), 33, 0.0),
            1.0,
            0.05,
            IntervalSet::from_intervals(range(), &[(0.2, 0.3)]).unwrap(),
            false,
        )
        .unwrap();
        let p = ModelParams::new(0.1, 0.4, 1.0, 33, 1e-2, 2.0).unwrap();
        let traj = run(&p, &data, 10).unwrap();
        let pattern = extract_pattern(&traj, default_window(&traj)).unwrap();
        assert_eq!(pattern.a1, data.a0);
        assert_eq!(pattern.n_intervals, 1);
        assert_eq!(pattern.stationary_since, 0.0);
        assert!((rho(&pattern.a1, &pattern.am1) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn recent_change_is_not_stationary() {
        let data = InitialData::new(
            DensityField::constant(range(), 33, 4.0),
            1.0,
            0.0,
            IntervalSet::full(range()),
            false,
        )
        .unwrap();
        let p = ModelParams::new(0.1, 0.4, 1.0, 33, 1e-2, 2.0).unwrap();
        let traj = run(&p, &data, 10).unwrap();
        // w falls below -x_lo within the first time unit, so A changes late
        assert!(!traj.state_changes.is_empty());
        let last = *traj.state_changes.last().unwrap();
        match extract_pattern(&traj, 1.0) {
            Err(DiagnosticsError::NotStationary { last_change }) => assert_eq!(last_change, last),
            other => panic!("expected NotStationary, got {other:?}"),
        }
    }
}
