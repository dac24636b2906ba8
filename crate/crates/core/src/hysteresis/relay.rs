use serde::{Deserialize, Serialize};

use super::{HysteresisError, Result};

/// Output of a single non-ideal relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelayOutput {
    Down,
    Up,
}

impl RelayOutput {
    /// `-1` or `+1`.
    pub fn value(self) -> i8 {
        match self {
            RelayOutput::Down => -1,
            RelayOutput::Up => 1,
        }
    }

    pub fn sign(self) -> f64 {
        f64::from(self.value())
    }

    pub fn from_value(value: i8) -> Option<Self> {
        match value {
            -1 => Some(RelayOutput::Down),
            1 => Some(RelayOutput::Up),
            _ => None,
        }
    }
}

/// One linear (hence monotone) piece `w0 -> w1` of the input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputSegment {
    w0: f64,
    w1: f64,
}

impl InputSegment {
    pub fn new(w0: f64, w1: f64) -> Result<Self> {
        for w in [w0, w1] {
            if !w.is_finite() {
                return Err(HysteresisError::NonFiniteInput(w));
            }
        }
        Ok(Self { w0, w1 })
    }

    /// Collapses a sampled input path into a single segment.
    ///
    /// The samples must be monotone (non-strictly); a path that turns around
    /// has an interior extremum and must be split by the caller.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let (&first, &last) = match (samples.first(), samples.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(HysteresisError::NonMonotone { index: 0 }),
        };
        let mut direction = 0.0_f64;
        for (i, pair) in samples.windows(2).enumerate() {
            let d = pair[1] - pair[0];
            if !d.is_finite() {
                return Err(HysteresisError::NonFiniteInput(d));
            }
            if d != 0.0 {
                if direction != 0.0 && d.signum() != direction {
                    return Err(HysteresisError::NonMonotone { index: i + 1 });
                }
                direction = d.signum();
            }
        }
        Self::new(first, last)
    }

    pub fn start(&self) -> f64 {
        self.w0
    }

    pub fn end(&self) -> f64 {
        self.w1
    }

    pub fn is_increasing(&self) -> bool {
        self.w1 >= self.w0
    }
}

/// State of the relay with threshold `x` after its input travels `seg`.
pub fn relay_step(r: RelayOutput, x: f64, seg: InputSegment) -> Result<RelayOutput> {
    if !(x > 0.0) {
        return Err(HysteresisError::NonPositiveThreshold(x));
    }
    Ok(step_unchecked(r, x, seg))
}

pub(crate) fn step_unchecked(r: RelayOutput, x: f64, seg: InputSegment) -> RelayOutput {
    let (w0, w1) = (seg.w0, seg.w1);
    if seg.is_increasing() {
        // the minimum is at the start, the maximum at the end
        if w1 >= x {
            RelayOutput::Up
        } else if w0 < -x {
            RelayOutput::Down
        } else {
            r
        }
    } else if w1 < -x {
        RelayOutput::Down
    } else if w0 >= x {
        RelayOutput::Up
    } else {
        r
    }
}

/// Relay states at every node of a continuous piecewise-linear input,
/// starting with `r0` at the first node.
pub fn relay_trace(x: f64, r0: RelayOutput, segments: &[InputSegment]) -> Result<Vec<RelayOutput>> {
    if !(x > 0.0) {
        return Err(HysteresisError::NonPositiveThreshold(x));
    }
    for (i, pair) in segments.windows(2).enumerate() {
        if pair[0].w1 != pair[1].w0 {
            return Err(HysteresisError::Discontinuous {
                index: i + 1,
                end: pair[0].w1,
                start: pair[1].w0,
            });
        }
    }
    let mut out = Vec::with_capacity(segments.len() + 1);
    let mut r = r0;
    out.push(r);
    for seg in segments {
        r = step_unchecked(r, x, *seg);
        out.push(r);
    }
    Ok(out)
}

/// Continuous piecewise-linear input given by its node values.
///
/// Timing is deliberately absent: relay outputs depend only on the order of
/// the values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearInput {
    nodes: Vec<f64>,
}

impl PiecewiseLinearInput {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = nodes.iter().find(|w| !w.is_finite()) {
            return Err(HysteresisError::NonFiniteInput(bad));
        }
        if nodes.is_empty() {
            return Err(HysteresisError::NonMonotone { index: 0 });
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn segments(&self) -> Vec<InputSegment> {
        self.nodes
            .windows(2)
            .map(|p| InputSegment { w0: p[0], w1: p[1] })
            .collect()
    }

    pub fn total_variation(&self) -> f64 {
        self.nodes.windows(2).map(|p| (p[1] - p[0]).abs()).sum()
    }

    /// Sup-norm distance to another input sharing the same node times.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.nodes.len(), other.nodes.len());
        self.nodes
            .iter()
            .zip(&other.nodes)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Inserts `k - 1` equally spaced points inside every segment.
    pub fn refined(&self, k: usize) -> Self {
        assert!(k >= 1);
        let mut nodes = Vec::with_capacity((self.nodes.len() - 1) * k + 1);
        nodes.push(self.nodes[0]);
        for p in self.nodes.windows(2) {
            let (lo, hi) = (p[0].min(p[1]), p[0].max(p[1]));
            for j in 1..k {
                let s = j as f64 / k as f64;
                nodes.push((p[0] + s * (p[1] - p[0])).clamp(lo, hi));
            }
            nodes.push(p[1]);
        }
        Self { nodes }
    }
}
