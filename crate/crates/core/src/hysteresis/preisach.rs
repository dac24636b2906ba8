//! Distributed relay field and the two integral operators built on it.
//!
//! Both `U` and `P` use the trapezoid weights of the density field, with
//! the relay value taken at each node. Interval boundaries falling between
//! nodes are not resolved, so `P` carries an O(h) error per boundary.

use super::{IntervalSet, RelayOutput};
use crate::field::DensityField;

/// Relay outputs at the given ascending nodes: `Up` inside the set, `Down` outside.
pub fn relay_field(a: &IntervalSet, nodes: &[f64]) -> Vec<RelayOutput> {
    let intervals = a.intervals();
    let mut k = 0;
    nodes
        .iter()
        .map(|&x| {
            while k < intervals.len() && intervals[k].hi < x {
                k += 1;
            }
            match intervals.get(k) {
                Some(iv) if iv.lo <= x => RelayOutput::Up,
                _ => RelayOutput::Down,
            }
        })
        .collect()
}

/// [`relay_field`] as `±1.0` values.
pub fn relay_signs(a: &IntervalSet, nodes: &[f64]) -> Vec<f64> {
    relay_field(a, nodes)
        .into_iter()
        .map(RelayOutput::sign)
        .collect()
}

/// `U(u) = ∫ u dx`.
pub fn total_mass(u: &DensityField) -> f64 {
    crate::field::compensated_sum(u.weights().iter().zip(u.values()).map(|(w, u)| w * u))
}

/// `P(u, A) = ∫ u(x) r(x) dx` with `r = +1` on `A` and `-1` elsewhere.
pub fn preisach(u: &DensityField, a: &IntervalSet) -> f64 {
    let signs = relay_signs(a, &u.nodes());
    u.weighted_integral(&signs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hysteresis::ThresholdRange;

    fn range() -> ThresholdRange {
        ThresholdRange::new(0.1, 0.4).unwrap()
    }

    #[test]
    fn relay_field_membership() {
        let a = IntervalSet::from_intervals(range(), &[(0.2, 0.3)]).unwrap();
        let r = relay_field(&a, &[0.15, 0.25, 0.35]);
        let values: Vec<i8> = r.iter().map(|r| r.value()).collect();
        assert_eq!(values, vec![-1, 1, -1]);

        let nodes = [0.1, 0.2, 0.3, 0.4];
        assert!(relay_field(&IntervalSet::full(range()), &nodes)
            .iter()
            .all(|&r| r == RelayOutput::Up));
        assert!(relay_field(&IntervalSet::empty(range()), &nodes)
            .iter()
            .all(|&r| r == RelayOutput::Down));
        // closed endpoints count as +1
        let r = relay_field(&a, &[0.2, 0.3]);
        assert!(r.iter().all(|&r| r == RelayOutput::Up));
    }

    #[test]
    fn total_mass_is_exact_for_linear_densities() {
        assert_eq!(total_mass(&DensityField::constant(range(), 31, 0.0)), 0.0);
        let ones = DensityField::constant(range(), 31, 1.0);
        assert!((total_mass(&ones) - 0.3).abs() < 1e-15);
        let lin = DensityField::from_fn(range(), 31, |x| x);
        assert!((total_mass(&lin) - 0.075).abs() < 1e-15);
    }

    #[test]
    fn preisach_examples() {
        let u = DensityField::from_fn(range(), 61, |x| 1.0 + x * x);
        let mass = total_mass(&u);
        assert!((preisach(&u, &IntervalSet::full(range())) - mass).abs() < 1e-15);
        assert!((preisach(&u, &IntervalSet::empty(range())) + mass).abs() < 1e-15);

        // 0.25 sits on a node of this grid (h = 0.005), so each half is resolved
        // up to the shared boundary node, which counts as +1 with weight h.
        let ones = DensityField::constant(range(), 61, 1.0);
        let half = IntervalSet::from_intervals(range(), &[(0.1, 0.25)]).unwrap();
        let p = preisach(&ones, &half);
        assert!(p.abs() <= ones.spacing() + 1e-15, "P = {p}");

        // with 0.25 halfway between two nodes the split is exact: 0.15 - 0.15
        let ones = DensityField::constant(range(), 60, 1.0);
        assert!(preisach(&ones, &half).abs() < 1e-15);
    }
}
