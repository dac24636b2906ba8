//! Density samples on a uniform threshold grid with trapezoid weights.

use serde::{Deserialize, Serialize};

use crate::hysteresis::ThresholdRange;

/// Neumaier-compensated sum in a fixed left-to-right order.
///
/// Used for every quadrature reduction so that U and P carry round-off of
/// order one ulp of the result, independent of the grid size.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for term in terms {
        let t = sum + term;
        if sum.abs() >= term.abs() {
            carry += (sum - t) + term;
        } else {
            carry += (term - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Sampled density `u(x)` on `n` equispaced nodes covering `[x_lo, x_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    range: ThresholdRange,
    values: Vec<f64>,
    h: f64,
    weights: Vec<f64>,
}

impl DensityField {
    /// Builds a field from node values. Panics if fewer than two values are given.
    pub fn from_values(range: ThresholdRange, values: Vec<f64>) -> Self {
        let n = values.len();
        assert!(n >= 2, "a density field needs at least two nodes");
        let h = range.width() / (n - 1) as f64;
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Self {
            range,
            values,
            h,
            weights,
        }
    }

    pub fn constant(range: ThresholdRange, n: usize, value: f64) -> Self {
        Self::from_values(range, vec![value; n])
    }

    pub fn from_fn(range: ThresholdRange, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = grid_nodes(range, n).into_iter().map(f).collect();
        Self::from_values(range, values)
    }

    pub fn range(&self) -> ThresholdRange {
        self.range
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Node coordinates; the last node is pinned to `x_hi` exactly.
    pub fn nodes(&self) -> Vec<f64> {
        grid_nodes(self.range, self.values.len())
    }

    /// Replaces the values, keeping grid and weights.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len(), "grid size mismatch");
        Self {
            range: self.range,
            values,
            h: self.h,
            weights: self.weights.clone(),
        }
    }

    /// Trapezoid quadrature of `u(x) g(x)` where `g` is sampled on the same nodes.
    pub fn weighted_integral(&self, g: &[f64]) -> f64 {
        debug_assert_eq!(g.len(), self.values.len());
        compensated_sum(
            self.weights
                .iter()
                .zip(&self.values)
                .zip(g)
                .map(|((w, u), g)| w * u * g),
        )
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Equispaced nodes `x_lo + i h`, `i = 0..n`, with the final node set to `x_hi`.
pub fn grid_nodes(range: ThresholdRange, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two nodes");
    let h = range.width() / (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n).map(|i| range.lo() + i as f64 * h).collect();
    nodes[n - 1] = range.hi();
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn range() -> ThresholdRange {
        ThresholdRange::new(0.1, 0.4).unwrap()
    }

    #[test]
    fn trapezoid_weights_sum_to_width() {
        let u = DensityField::constant(range(), 11, 1.0);
        let total: f64 = u.weights().iter().sum();
        assert!((total - 0.3).abs() < 1e-15);
        assert_eq!(u.weights()[0], 0.5 * u.spacing());
        assert_eq!(u.weights()[10], 0.5 * u.spacing());
    }

    #[test]
    fn nodes_are_pinned_to_the_endpoints() {
        let nodes = grid_nodes(range(), 7);
        assert_eq!(nodes[0], 0.1);
        assert_eq!(nodes[6], 0.4);
    }

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let s = compensated_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }
}
