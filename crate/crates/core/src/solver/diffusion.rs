//! Crank–Nicolson step for `u_t = D u_xx` with zero-flux ends.
//!
//! The Neumann condition uses mirrored ghost nodes, which gives the boundary
//! rows `2 (u_1 - u_0) / h^2`. With trapezoid weights `w` this operator
//! satisfies `wᵀ L = 0`, so the discrete mass `Σ w_i u_i` is invariant.
//! The step is solved in increment form `(I - θL) δ = 2θ L u`, which keeps
//! the round-off of `wᵀ δ` proportional to `|δ|` rather than `|u|`.

use super::tridiag::TridiagonalLu;
use crate::field::DensityField;

#[derive(Debug, Clone)]
pub struct NeumannCrankNicolson {
    /// `D dt / (2 h^2)`
    ratio: f64,
    lu: TridiagonalLu,
}

impl NeumannCrankNicolson {
    pub fn new(n: usize, h: f64, diffusion: f64, dt: f64) -> Self {
        assert!(n >= 2);
        let ratio = diffusion * dt / (2.0 * h * h);
        let mut sub = vec![-ratio; n];
        let diag = vec![1.0 + 2.0 * ratio; n];
        let mut sup = vec![-ratio; n];
        sub[0] = 0.0;
        sup[0] = -2.0 * ratio;
        sub[n - 1] = -2.0 * ratio;
        sup[n - 1] = 0.0;
        Self {
            ratio,
            lu: TridiagonalLu::factor(&sub, &diag, &sup),
        }
    }

    pub fn for_field(u: &DensityField, diffusion: f64, dt: f64) -> Self {
        Self::new(u.len(), u.spacing(), diffusion, dt)
    }

    pub fn apply(&self, u: &DensityField) -> DensityField {
        if self.ratio == 0.0 {
            return u.clone();
        }
        let x = u.values();
        let n = x.len();
        let mut delta = Vec::with_capacity(n);
        delta.push(2.0 * self.ratio * 2.0 * (x[1] - x[0]));
        for i in 1..n - 1 {
            delta.push(2.0 * self.ratio * ((x[i - 1] - x[i]) + (x[i + 1] - x[i])));
        }
        delta.push(2.0 * self.ratio * 2.0 * (x[n - 2] - x[n - 1]));
        self.lu.solve_in_place(&mut delta);
        let values = x.iter().zip(&delta).map(|(u, d)| u + d).collect();
        u.with_values(values)
    }
}

/// One Crank–Nicolson step of `u_t = D u_xx` with zero-flux boundaries.
pub fn diffusion_step(u: &DensityField, diffusion: f64, dt: f64) -> DensityField {
    NeumannCrankNicolson::for_field(u, diffusion, dt).apply(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hysteresis::{total_mass, ThresholdRange};
    use std::f64::consts::PI;

    fn range() -> ThresholdRange {
        ThresholdRange::new(0.1, 0.4).unwrap()
    }

    #[test]
    fn constants_are_fixed_points() {
        let u = DensityField::constant(range(), 65, 2.5);
        let next = diffusion_step(&u, 1.0, 1e-3);
        assert!(next.values().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn zero_diffusion_is_identity() {
        let u = DensityField::from_fn(range(), 33, |x| (7.0 * x).sin() + 2.0);
        assert_eq!(diffusion_step(&u, 0.0, 0.1), u);
    }

    #[test]
    fn first_cosine_mode_decays_at_the_continuum_rate() {
        let n = 257;
        let width = 0.3;
        let u = DensityField::from_fn(range(), n, |x| (PI * (x - 0.1) / width).cos());
        let dt = 1e-4;
        let next = diffusion_step(&u, 1.0, dt);
        let h = u.spacing();

        // sampled cosines are exact eigenvectors of the ghost-node Laplacian
        let mu = 4.0 / (h * h) * (PI * h / (2.0 * width)).sin().powi(2);
        let theta = 0.5 * dt;
        let discrete = (1.0 - theta * mu) / (1.0 + theta * mu);
        let continuum = (-(PI / width).powi(2) * dt).exp();
        for (a, b) in u.values().iter().zip(next.values()) {
            if a.abs() > 0.1 {
                assert!((b / a - discrete).abs() < 1e-12);
                assert!((b / a - continuum).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn mass_is_preserved_for_rough_data() {
        let u = DensityField::from_fn(range(), 101, |x| if x < 0.2 { 5.0 } else { 0.1 + x });
        let before = total_mass(&u);
        let op = NeumannCrankNicolson::for_field(&u, 1.0, 1e-2);
        let mut cur = u;
        for _ in 0..200 {
            cur = op.apply(&cur);
        }
        assert!((total_mass(&cur) - before).abs() < 1e-13);
    }
}
