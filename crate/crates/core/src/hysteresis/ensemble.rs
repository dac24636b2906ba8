use super::relay::step_unchecked;
use super::{HysteresisError, InputSegment, IntervalSet, RelayOutput, Result, ThresholdRange};

/// Brute-force reference: one independent relay per grid threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayEnsembleOracle {
    thresholds: Vec<f64>,
    states: Vec<RelayOutput>,
}

impl RelayEnsembleOracle {
    pub fn new(thresholds: Vec<f64>, states: Vec<RelayOutput>) -> Result<Self> {
        let ascending = thresholds.windows(2).all(|p| p[0] < p[1]);
        let positive = thresholds.first().is_some_and(|&x| x > 0.0);
        if thresholds.len() < 2 || thresholds.len() != states.len() || !ascending || !positive {
            return Err(HysteresisError::InvalidEnsemble);
        }
        Ok(Self { thresholds, states })
    }

    /// Ensemble on `thresholds` initialised from a Preisach state.
    pub fn from_state(a: &IntervalSet, thresholds: Vec<f64>) -> Result<Self> {
        let states = super::relay_field(a, &thresholds);
        Self::new(thresholds, states)
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn states(&self) -> &[RelayOutput] {
        &self.states
    }

    /// Steps every relay independently along `seg`.
    pub fn step(&self, seg: InputSegment) -> Self {
        let states = self
            .thresholds
            .iter()
            .zip(&self.states)
            .map(|(&x, &r)| step_unchecked(r, x, seg))
            .collect();
        Self {
            thresholds: self.thresholds.clone(),
            states,
        }
    }

    /// Interval set spanned by each maximal run of `Up` thresholds.
    pub fn to_interval_set(&self, range: ThresholdRange) -> IntervalSet {
        let mut pairs = Vec::new();
        let mut run_start: Option<f64> = None;
        let mut last_up = 0.0;
        for (&x, &r) in self.thresholds.iter().zip(&self.states) {
            match (r, run_start) {
                (RelayOutput::Up, None) => {
                    run_start = Some(x);
                    last_up = x;
                }
                (RelayOutput::Up, Some(_)) => last_up = x,
                (RelayOutput::Down, Some(start)) => {
                    pairs.push((start, last_up));
                    run_start = None;
                }
                (RelayOutput::Down, None) => {}
            }
        }
        if let Some(start) = run_start {
            pairs.push((start, last_up));
        }
        let pairs: Vec<(f64, f64)> = pairs
            .into_iter()
            .map(|(a, b)| (a.max(range.lo()), b.min(range.hi())))
            .collect();
        IntervalSet::from_intervals(range, &pairs)
            .expect("runs of a strictly ascending grid are separated")
    }
}
