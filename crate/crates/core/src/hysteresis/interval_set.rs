use serde::{Deserialize, Serialize};

use super::{HysteresisError, InputSegment, Result, ThresholdRange};
use crate::field::compensated_sum;

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Canonical finite union of disjoint closed intervals inside a threshold range.
///
/// Canonical form: sorted, pairwise separated by strictly positive gaps, no
/// zero-length members. Sets that agree up to measure zero are not identified;
/// equality is structural.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    range: ThresholdRange,
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty(range: ThresholdRange) -> Self {
        Self {
            range,
            intervals: Vec::new(),
        }
    }

    pub fn full(range: ThresholdRange) -> Self {
        Self {
            range,
            intervals: vec![Interval {
                lo: range.lo(),
                hi: range.hi(),
            }],
        }
    }

    /// Validates an explicit list of `(lo, hi)` pairs.
    ///
    /// Pairs must be sorted, lie inside the range, and be separated by
    /// positive gaps. Zero-length pairs are dropped.
    pub fn from_intervals(range: ThresholdRange, pairs: &[(f64, f64)]) -> Result<Self> {
        let mut intervals: Vec<Interval> = Vec::with_capacity(pairs.len());
        for (i, &(lo, hi)) in pairs.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(HysteresisError::InvalidIntervals(format!(
                    "interval {i} has a non-finite endpoint"
                )));
            }
            if lo > hi {
                return Err(HysteresisError::InvalidIntervals(format!(
                    "interval {i} = [{lo}, {hi}] has lo > hi"
                )));
            }
            if lo < range.lo() || hi > range.hi() {
                return Err(HysteresisError::InvalidIntervals(format!(
                    "interval {i} = [{lo}, {hi}] leaves [{}, {}]",
                    range.lo(),
                    range.hi()
                )));
            }
            if lo == hi {
                continue;
            }
            if let Some(prev) = intervals.last() {
                if lo <= prev.hi {
                    return Err(HysteresisError::InvalidIntervals(format!(
                        "interval {i} = [{lo}, {hi}] overlaps, touches or precedes [{}, {}]",
                        prev.lo, prev.hi
                    )));
                }
            }
            intervals.push(Interval { lo, hi });
        }
        Ok(Self { range, intervals })
    }

    pub fn range(&self) -> ThresholdRange {
        self.range
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.intervals.iter().map(|iv| (iv.lo, iv.hi)).collect()
    }

    pub fn interval_count(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        compensated_sum(self.intervals.iter().map(Interval::length))
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.hi < x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
    }

    /// `self ∪ [lo, hi]`, clipped to the range; exactly touching intervals merge.
    pub fn union_closed(&self, lo: f64, hi: f64) -> Self {
        let lo = lo.max(self.range.lo());
        let hi = hi.min(self.range.hi());
        if !(lo < hi) {
            return self.clone();
        }
        let mut merged = Interval { lo, hi };
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut placed = false;
        for iv in &self.intervals {
            if iv.hi < merged.lo {
                out.push(*iv);
            } else if iv.lo > merged.hi {
                if !placed {
                    out.push(merged);
                    placed = true;
                }
                out.push(*iv);
            } else {
                merged.lo = merged.lo.min(iv.lo);
                merged.hi = merged.hi.max(iv.hi);
            }
        }
        if !placed {
            out.push(merged);
        }
        Self {
            range: self.range,
            intervals: out,
        }
    }

    /// `self \ (lo, hi)`; zero-length leftovers are dropped.
    pub fn remove_open(&self, lo: f64, hi: f64) -> Self {
        if !(lo < hi) {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        for iv in &self.intervals {
            if iv.hi <= lo || iv.lo >= hi {
                out.push(*iv);
                continue;
            }
            let left = Interval {
                lo: iv.lo,
                hi: iv.hi.min(lo),
            };
            if left.lo < left.hi {
                out.push(left);
            }
            let right = Interval {
                lo: iv.lo.max(hi),
                hi: iv.hi,
            };
            if right.lo < right.hi {
                out.push(right);
            }
        }
        Self {
            range: self.range,
            intervals: out,
        }
    }

    /// Closure of the complement within the range.
    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = self.range.lo();
        for iv in &self.intervals {
            if iv.lo > cursor {
                out.push(Interval {
                    lo: cursor,
                    hi: iv.lo,
                });
            }
            cursor = iv.hi;
        }
        if cursor < self.range.hi() {
            out.push(Interval {
                lo: cursor,
                hi: self.range.hi(),
            });
        }
        Self {
            range: self.range,
            intervals: out,
        }
    }

    /// First positive-length piece of `[lo, hi]` not covered by the set.
    fn first_gap(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let mut cursor = lo;
        for iv in &self.intervals {
            if iv.hi <= cursor {
                continue;
            }
            if iv.lo >= hi {
                break;
            }
            if iv.lo > cursor {
                return Some((cursor, iv.lo));
            }
            cursor = iv.hi;
            if cursor >= hi {
                return None;
            }
        }
        (cursor < hi).then_some((cursor, hi))
    }

    /// First positive-length piece of the set inside `(lo, hi)`.
    fn first_overlap(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        self.intervals.iter().find_map(|iv| {
            let a = iv.lo.max(lo);
            let b = iv.hi.min(hi);
            (a < b).then_some((a, b))
        })
    }

    /// Checks that the relay configuration is consistent with input `w`:
    /// `[x_lo, w]` must be up when `w >= x_lo`, and `[x_lo, -w)` must be down
    /// when `w < -x_lo`. Both checks hold up to measure zero.
    pub fn check_compatibility(&self, w: f64) -> Result<()> {
        let x_lo = self.range.lo();
        if w >= x_lo {
            let top = w.min(self.range.hi());
            if let Some((lo, hi)) = self.first_gap(x_lo, top) {
                return Err(HysteresisError::CompatibilityViolation {
                    w,
                    lo,
                    hi,
                    reason: "must be in the +1 state",
                });
            }
        } else if w < -x_lo {
            let top = (-w).min(self.range.hi());
            if let Some((lo, hi)) = self.first_overlap(x_lo, top) {
                return Err(HysteresisError::CompatibilityViolation {
                    w,
                    lo,
                    hi,
                    reason: "must be in the -1 state",
                });
            }
        }
        Ok(())
    }
}

/// Accepts a candidate initial state if it is compatible with `w0`.
pub fn make_initial_state(candidate: &IntervalSet, w0: f64) -> Result<IntervalSet> {
    if !w0.is_finite() {
        return Err(HysteresisError::NonFiniteInput(w0));
    }
    candidate.check_compatibility(w0)?;
    Ok(candidate.clone())
}

/// Advances the state along one monotone input segment.
///
/// Increasing to `w1 >= x_lo` adds `[x_lo, min(w1, x_hi)]`; decreasing to
/// `w1 < -x_lo` removes `(x_lo, min(-w1, x_hi))`. Because the set already
/// reflects the input history up to the segment start, only the end value
/// matters.
pub fn state_update(a: &IntervalSet, seg: InputSegment) -> IntervalSet {
    let x_lo = a.range.lo();
    let x_hi = a.range.hi();
    let w1 = seg.end();
    if seg.is_increasing() {
        if w1 >= x_lo {
            a.union_closed(x_lo, w1.min(x_hi))
        } else {
            a.clone()
        }
    } else if w1 < -x_lo {
        a.remove_open(x_lo, (-w1).min(x_hi))
    } else {
        a.clone()
    }
}

/// Lebesgue measure of the symmetric difference.
pub fn rho(a: &IntervalSet, b: &IntervalSet) -> f64 {
    let mut breaks: Vec<f64> = a
        .intervals
        .iter()
        .chain(&b.intervals)
        .flat_map(|iv| [iv.lo, iv.hi])
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    compensated_sum(breaks.windows(2).filter_map(|p| {
        let mid = 0.5 * (p[0] + p[1]);
        (a.contains(mid) != b.contains(mid)).then_some(p[1] - p[0])
    }))
}
