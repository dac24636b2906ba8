//! Cosine eigenfunctions of the zero-flux Laplacian on `[x_lo, x_hi]`.
//!
//! `e_0 = 1/sqrt(L)`, `e_k = sqrt(2/L) cos(πk(x - x_lo)/L)`, `λ_k = (πk/L)^2`.

use std::f64::consts::PI;

use crate::field::DensityField;
use crate::solver::Trajectory;

pub fn eigenvalue(width: f64, k: usize) -> f64 {
    (PI * k as f64 / width).powi(2)
}

fn eigenfunction(width: f64, x_lo: f64, k: usize) -> impl Fn(f64) -> f64 {
    let scale = if k == 0 {
        (1.0 / width).sqrt()
    } else {
        (2.0 / width).sqrt()
    };
    let freq = PI * k as f64 / width;
    move |x| scale * (freq * (x - x_lo)).cos()
}

/// Coefficients `u_k = Σ_i w_i u_i e_k(x_i)` for `k = 0..=max_mode`.
pub fn fourier_modes(u: &DensityField, max_mode: usize) -> Vec<f64> {
    let range = u.range();
    let nodes = u.nodes();
    (0..=max_mode)
        .map(|k| {
            let e = eigenfunction(range.width(), range.lo(), k);
            let basis: Vec<f64> = nodes.iter().map(|&x| e(x)).collect();
            u.weighted_integral(&basis)
        })
        .collect()
}

/// `|u_0 e_0 - U / (x_hi - x_lo)|`.
pub fn mode_zero_identity_error(u: &DensityField) -> f64 {
    let width = u.range().width();
    let u0 = fourier_modes(u, 0)[0];
    let e0 = (1.0 / width).sqrt();
    (u0 * e0 - crate::hysteresis::total_mass(u) / width).abs()
}

/// Largest amount by which `|u_k(t)|` exceeds the envelope
/// `|u_k(t0)| e^{-Dλ_k (t - t0)} + ε / (Dλ_k)` over snapshots with `t >= t0`,
/// where `ε = sqrt(2/L) max_{t >= t0} v(t) U(t)` bounds the reaction forcing
/// of mode `k`. Zero means the envelope holds.
pub fn mode_envelope_excess(traj: &Trajectory, k: usize, t0: f64) -> f64 {
    assert!(k >= 1, "mode 0 carries the mass and does not decay");
    let after: Vec<_> = traj.snapshots.iter().filter(|s| s.t >= t0).collect();
    let Some(first) = after.first() else {
        return 0.0;
    };
    let width = traj.params.range.width();
    let rate = traj.params.diffusion * eigenvalue(width, k);
    let forcing = (2.0 / width).sqrt()
        * traj
            .scalars
            .iter()
            .filter(|r| r.t >= first.t)
            .map(|r| (r.v * r.mass).abs())
            .fold(0.0, f64::max);
    let start = fourier_modes(&first.u, k)[k].abs();
    after
        .iter()
        .map(|s| {
            let bound = start * (-rate * (s.t - first.t)).exp() + forcing / rate;
            (fourier_modes(&s.u, k)[k].abs() - bound).max(0.0)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hysteresis::ThresholdRange;

    fn range() -> ThresholdRange {
        ThresholdRange::new(0.1, 0.4).unwrap()
    }

    #[test]
    fn constant_has_only_mode_zero() {
        let u = DensityField::constant(range(), 129, 2.0);
        let modes = fourier_modes(&u, 6);
        assert!((modes[0] - 2.0 * 0.3_f64.sqrt()).abs() < 1e-14);
        for m in &modes[1..] {
            assert!(m.abs() < 1e-14, "{m}");
        }
    }

    #[test]
    fn first_eigenfunction_is_orthonormal_under_trapezoid() {
        let e1 = eigenfunction(0.3, 0.1, 1);
        let u = DensityField::from_fn(range(), 129, e1);
        let modes = fourier_modes(&u, 5);
        assert!((modes[1] - 1.0).abs() < 1e-12);
        for (k, m) in modes.iter().enumerate() {
            if k != 1 {
                assert!(m.abs() < 1e-12, "mode {k} = {m}");
            }
        }
    }

    #[test]
    fn parseval_for_a_smooth_profile() {
        let u = DensityField::from_fn(range(), 257, |x| 1.0 + (20.0 * x).sin());
        let modes = fourier_modes(&u, 200);
        let energy: f64 = modes.iter().map(|m| m * m).sum();
        let squared = u.with_values(u.values().iter().map(|v| v * v).collect());
        let l2 = crate::hysteresis::total_mass(&squared);
        assert!((energy - l2).abs() < 1e-6 * l2, "{energy} vs {l2}");
    }

    #[test]
    fn mode_zero_identity_holds_to_round_off() {
        let u = DensityField::from_fn(range(), 257, |x| 3.0 + x.sin());
        assert!(mode_zero_identity_error(&u) < 1e-13);
    }
}
