//! Acceptance checks shared by the `verify` subcommand and the test suite.
//!
//! Every threshold is pinned here. The reference configuration is
//! `x ∈ [0.1, 0.4]`, `D = 1`, `u0 ≡ 1`, `v0 = 1`, `w0 = 0`, all relays up,
//! 257 nodes, `dt = 1e-3`, `t_end = 100`.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    band_audit, conservation_audit, decay_bound_check, decay_delta, default_window,
    extract_pattern, mode_zero_identity_error, monotonicity_audit, uniform_limit_distance,
    DiagnosticsError,
};
use crate::field::{grid_nodes, DensityField};
use crate::hysteresis::{
    relay_trace, rho, state_update, InputSegment, IntervalSet, PiecewiseLinearInput,
    RelayEnsembleOracle, RelayOutput, ThresholdRange,
};
use crate::model::{InitialData, ModelParams};
use crate::solver::{run_with, RunOptions, Trajectory};

pub const CONSERVATION_TOL: f64 = 1e-10;
pub const CONSERVATION_RUNTIME: Duration = Duration::from_secs(60);
pub const MONOTONICITY_SLACK: f64 = 1e-14;
pub const DECAY_MARGIN_TOL: f64 = 1e-6;
pub const UNIFORM_LIMIT_TOL: f64 = 1e-3;
pub const MODE_ZERO_TOL: f64 = 1e-12;
pub const BAND_SLACK: f64 = 1e-12;
pub const PROPERTY_TRIALS: usize = 1000;
pub const PROPERTY_RUNTIME: Duration = Duration::from_secs(30);
pub const ORACLE_SEQUENCES: usize = 200;
pub const ORACLE_RELAYS: usize = 10_000;
pub const CONVERGENCE_FACTOR: f64 = 5.0;
/// Differences below this are round-off and carry no convergence signal.
pub const CONVERGENCE_FLOOR: f64 = 1e-12;
pub const DEFAULT_SEED: u64 = 20_240_601;

const SNAPSHOT_STRIDE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pass,
    Fail,
    /// Qualitative check that did not hold; reported, not fatal.
    Warn,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: u32, name: &str, passed: bool, detail: String) -> Self {
        Self {
            id,
            name: name.to_string(),
            status: if passed { Status::Pass } else { Status::Fail },
            detail,
        }
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: {}",
            self.status, self.id, self.name, self.detail
        )
    }
}

/// Exit code for a finished suite: 0 iff nothing failed.
pub fn exit_code(results: &[CriterionResult]) -> i32 {
    if results.iter().any(|r| r.status == Status::Fail) {
        1
    } else {
        0
    }
}

pub fn reference_range() -> ThresholdRange {
    ThresholdRange::new(0.1, 0.4).expect("valid range")
}

pub fn reference_params() -> ModelParams {
    ModelParams::new(0.1, 0.4, 1.0, 257, 1e-3, 100.0).expect("valid parameters")
}

/// Reference initial data on `params`' grid with the given `v0`, `w0`.
pub fn reference_initial(params: &ModelParams, v0: f64, w0: f64) -> InitialData {
    InitialData::new(
        DensityField::constant(params.range, params.n_grid, 1.0),
        v0,
        w0,
        IntervalSet::full(params.range),
        false,
    )
    .expect("reference data is physical and compatible")
}

fn reference_run(params: &ModelParams, v0: f64, w0: f64) -> (InitialData, Trajectory, Duration) {
    let init = reference_initial(params, v0, w0);
    let start = Instant::now();
    let traj = run_with(
        params,
        &init,
        &RunOptions {
            stride: SNAPSHOT_STRIDE,
            strict: false,
            conservation_tol: CONSERVATION_TOL,
        },
    )
    .expect("reference run stays within its invariants");
    (init, traj, start.elapsed())
}

pub fn check_conservation(id: u32, traj: &Trajectory, elapsed: Duration) -> CriterionResult {
    let residual = conservation_audit(traj);
    CriterionResult::new(
        id,
        "conservation of U + v",
        residual <= CONSERVATION_TOL && elapsed <= CONSERVATION_RUNTIME,
        format!(
            "max relative residual {residual:.3e} (tol {CONSERVATION_TOL:e}) over {} steps in {:.2?}",
            traj.scalars.len() - 1,
            elapsed
        ),
    )
}

pub fn check_monotonicity(id: u32, traj: &Trajectory) -> CriterionResult {
    let m = monotonicity_audit(traj, MONOTONICITY_SLACK);
    CriterionResult::new(
        id,
        "v non-increasing, U non-decreasing",
        m.violations == 0,
        format!(
            "{} violations; max v increase {:.3e}, max U decrease {:.3e} (slack {MONOTONICITY_SLACK:e})",
            m.violations, m.max_v_increase, m.max_mass_decrease
        ),
    )
}

pub fn check_decay(id: u32, traj: &Trajectory) -> CriterionResult {
    let delta = decay_delta(traj.params.x_hi(), traj.initial_w);
    match decay_bound_check(traj, delta) {
        Ok(margin) => CriterionResult::new(
            id,
            "exponential decay of v",
            margin <= 1.0 + DECAY_MARGIN_TOL,
            format!("max v(t) exp(δ U0 t) / v0 = {margin:.9} with δ = {delta:.6}"),
        ),
        Err(e) => CriterionResult::new(id, "exponential decay of v", false, e.to_string()),
    }
}

pub fn check_uniform_limit(id: u32, traj: &Trajectory, init: &InitialData) -> CriterionResult {
    let distance = uniform_limit_distance(&traj.final_state, init);
    let identity = traj
        .snapshots
        .iter()
        .chain(std::iter::once(&traj.final_state))
        .map(|s| mode_zero_identity_error(&s.u))
        .fold(0.0, f64::max);
    CriterionResult::new(
        id,
        "uniform limit of u and mode-0 identity",
        distance <= UNIFORM_LIMIT_TOL && identity <= MODE_ZERO_TOL,
        format!(
            "sup |u(t_end) - (U0+v0)/(x_hi-x_lo)| = {distance:.3e} (tol {UNIFORM_LIMIT_TOL:e}); \
             mode-0 identity error {identity:.3e} over {} snapshots",
            traj.snapshots.len() + 1
        ),
    )
}

pub fn check_band(id: u32, runs: &[&Trajectory]) -> CriterionResult {
    let mut ok = true;
    let mut parts = Vec::new();
    for traj in runs {
        let band = band_audit(traj);
        ok &= band.max_abs_w <= band.bound + BAND_SLACK && band.clamp_events == 0;
        parts.push(format!(
            "w0 = {}: max |w| = {:.6} <= {:.6}, {} clamps",
            traj.initial_w, band.max_abs_w, band.bound, band.clamp_events
        ));
    }
    CriterionResult::new(
        id,
        "w trapped in [-max(x_hi,|w0|), max(x_hi,|w0|)]",
        ok,
        parts.join("; "),
    )
}

/// Random input nodes in `[-1/2, 1/2]`.
pub fn random_input<R: Rng>(rng: &mut R, nodes: usize) -> PiecewiseLinearInput {
    let values = (0..nodes).map(|_| rng.gen_range(-0.5..=0.5)).collect();
    PiecewiseLinearInput::new(values).expect("finite values")
}

/// Random simple state made compatible with `w0`.
pub fn random_state<R: Rng>(rng: &mut R, range: ThresholdRange, w0: f64) -> IntervalSet {
    let k = rng.gen_range(0..5usize);
    let mut cuts: Vec<f64> = (0..2 * k)
        .map(|_| rng.gen_range(range.lo()..=range.hi()))
        .collect();
    cuts.sort_by(f64::total_cmp);
    let mut a = IntervalSet::empty(range);
    for pair in cuts.chunks(2) {
        a = a.union_closed(pair[0], pair[1]);
    }
    let to_w0 = InputSegment::new(0.0, w0).expect("finite");
    state_update(&a, to_w0)
}

/// Preisach states at every node of `input`, starting from `a0`.
pub fn state_sequence(a0: &IntervalSet, input: &PiecewiseLinearInput) -> Vec<IntervalSet> {
    let mut states = Vec::with_capacity(input.nodes().len());
    let mut a = a0.clone();
    states.push(a.clone());
    for seg in input.segments() {
        a = state_update(&a, seg);
        states.push(a.clone());
    }
    states
}

/// Perturbs every node by at most `eps`, keeping the first node when `keep_start`.
fn perturb<R: Rng>(
    rng: &mut R,
    w: &PiecewiseLinearInput,
    eps: f64,
    keep_start: bool,
) -> PiecewiseLinearInput {
    let values = w
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if keep_start && i == 0 {
                x
            } else {
                (x + eps * rng.gen_range(-1.0..=1.0)).clamp(-0.5, 0.5)
            }
        })
        .collect();
    PiecewiseLinearInput::new(values).expect("finite values")
}

fn lipschitz_constant(x_lo: f64, variation: f64) -> f64 {
    2.0 + variation / (2.0 * x_lo)
}

/// Rate independence and the Lipschitz estimate on random input pairs.
pub fn check_relay_properties(id: u32, seed: u64) -> CriterionResult {
    let start = Instant::now();
    let range = reference_range();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rate_violations = 0usize;
    let mut lip_violations = 0usize;
    let mut worst_ratio = 0.0_f64;

    for trial in 0..PROPERTY_TRIALS {
        let nodes = rng.gen_range(2..40usize);
        let w1 = random_input(&mut rng, nodes);
        let a0 = random_state(&mut rng, range, w1.nodes()[0]);

        // rate independence: inserting intermediate samples (a re-timing of
        // the same monotone pieces) leaves the states at the original nodes
        let k = rng.gen_range(2..6usize);
        let fine = w1.refined(k);
        let coarse_states = state_sequence(&a0, &w1);
        let fine_states = state_sequence(&a0, &fine);
        let x = rng.gen_range(range.lo()..=range.hi());
        let r0 = if a0.contains(x) {
            RelayOutput::Up
        } else {
            RelayOutput::Down
        };
        let coarse_relay = relay_trace(x, r0, &w1.segments()).expect("positive threshold");
        let fine_relay = relay_trace(x, r0, &fine.segments()).expect("positive threshold");
        for (i, state) in coarse_states.iter().enumerate() {
            if fine_states[i * k] != *state || fine_relay[i * k] != coarse_relay[i] {
                rate_violations += 1;
                break;
            }
        }

        // Lipschitz: half the trials share the initial state
        let eps = 10f64.powf(rng.gen_range(-4.0..-0.7));
        let same_start = trial % 2 == 0;
        let w2 = perturb(&mut rng, &w1, eps, same_start);
        let b0 = if same_start {
            a0.clone()
        } else {
            random_state(&mut rng, range, w2.nodes()[0])
        };
        let (f1, f2) = (w1.refined(4), w2.refined(4));
        let variation = f1.total_variation().max(f2.total_variation());
        let lip = lipschitz_constant(range.lo(), variation);
        let distance = f1.sup_distance(&f2);
        let initial = rho(&a0, &b0);
        let bound = initial + lip * distance;
        let s1 = state_sequence(&a0, &f1);
        let s2 = state_sequence(&b0, &f2);
        let worst = s1
            .iter()
            .zip(&s2)
            .map(|(a, b)| rho(a, b))
            .fold(0.0, f64::max);
        if worst > bound + 1e-12 {
            lip_violations += 1;
        }
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(worst / bound);
        }
    }
    let elapsed = start.elapsed();
    CriterionResult::new(
        id,
        "rate independence and Lipschitz state estimate",
        rate_violations == 0 && lip_violations == 0 && elapsed <= PROPERTY_RUNTIME,
        format!(
            "{PROPERTY_TRIALS} trials: {rate_violations} rate-independence and {lip_violations} \
             Lipschitz violations, worst rho/bound = {worst_ratio:.3} in {elapsed:.2?}"
        ),
    )
}

/// Interval-set states against a dense ensemble of independent relays.
pub fn check_oracle(id: u32, seed: u64) -> CriterionResult {
    let range = reference_range();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0007);
    let thresholds = grid_nodes(range, ORACLE_RELAYS);
    let spacing = range.width() / (ORACLE_RELAYS - 1) as f64;
    let mut violations = 0usize;
    let mut worst = 0.0_f64;
    for _ in 0..ORACLE_SEQUENCES {
        let nodes = rng.gen_range(2..30usize);
        let w = random_input(&mut rng, nodes);
        let mut a = random_state(&mut rng, range, w.nodes()[0]);
        let mut ensemble =
            RelayEnsembleOracle::from_state(&a, thresholds.clone()).expect("valid grid");
        for seg in w.segments() {
            a = state_update(&a, seg);
            ensemble = ensemble.step(seg);
            let derived = ensemble.to_interval_set(range);
            let gap = rho(&a, &derived);
            let bound = 2.0 * spacing * (a.interval_count() + 1) as f64;
            worst = worst.max(gap / bound);
            if gap > bound {
                violations += 1;
            }
        }
    }
    CriterionResult::new(
        id,
        "interval-set state matches relay ensemble",
        violations == 0,
        format!(
            "{ORACLE_SEQUENCES} sequences, {ORACLE_RELAYS} relays: {violations} violations, \
             worst rho/bound = {worst:.3}"
        ),
    )
}

/// `||R(w1) - R(w2)||_{C([0,T]; L2)} <= 2 L^{1/2} ||w1 - w2||^{1/2}` for equal initial states.
pub fn check_holder(id: u32, seed: u64) -> CriterionResult {
    let range = reference_range();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut worst = 0.0_f64;
    for _ in 0..PROPERTY_TRIALS {
        let nodes = rng.gen_range(2..40usize);
        let w1 = random_input(&mut rng, nodes);
        let a0 = random_state(&mut rng, range, w1.nodes()[0]);
        let eps = 10f64.powf(rng.gen_range(-4.0..-0.7));
        let w2 = perturb(&mut rng, &w1, eps, true);
        let (f1, f2) = (w1.refined(4), w2.refined(4));
        let lip = lipschitz_constant(range.lo(), f1.total_variation().max(f2.total_variation()));
        let bound = 2.0 * lip.sqrt() * f1.sup_distance(&f2).sqrt();
        // |r1 - r2| = 2 on the symmetric difference, so the L2 norm is 2 sqrt(rho)
        let norm = state_sequence(&a0, &f1)
            .iter()
            .zip(&state_sequence(&a0, &f2))
            .map(|(a, b)| 2.0 * rho(a, b).sqrt())
            .fold(0.0, f64::max);
        if norm > bound + 1e-12 {
            violations += 1;
        }
        if bound > 0.0 {
            worst = worst.max(norm / bound);
        }
    }
    CriterionResult::new(
        id,
        "Hölder continuity of the relay field in L2",
        violations == 0,
        format!("{PROPERTY_TRIALS} trials: {violations} violations, worst norm/bound = {worst:.3}"),
    )
}

/// Terminal `(U, v, w)` at three refinement levels.
pub fn check_self_convergence(id: u32, middle: &Trajectory) -> CriterionResult {
    let base = middle.params;
    let coarse = base
        .with_dt(2.0 * base.dt)
        .with_grid((base.n_grid - 1) / 2 + 1);
    let fine = base
        .with_dt(0.5 * base.dt)
        .with_grid(2 * (base.n_grid - 1) + 1);
    let (_, coarse_run, _) = reference_run(&coarse, middle.initial_v, middle.initial_w);
    let (_, fine_run, _) = reference_run(&fine, middle.initial_v, middle.initial_w);
    let terminal = |t: &Trajectory| {
        let s = &t.final_state;
        [s.mass(), s.v, s.w]
    };
    let (c, m, f) = (terminal(&coarse_run), terminal(middle), terminal(&fine_run));
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, name) in ["U", "v", "w"].iter().enumerate() {
        let d_coarse = (c[i] - m[i]).abs();
        let d_fine = (m[i] - f[i]).abs();
        // first order: halving (dt, h) should halve the difference
        let predicted = 0.5 * d_coarse;
        let pass = d_fine <= CONVERGENCE_FACTOR * predicted.max(CONVERGENCE_FLOOR);
        ok &= pass;
        parts.push(format!(
            "{name}: |Δ(dt,dt/2)| = {d_fine:.3e} vs predicted {predicted:.3e}"
        ));
    }
    CriterionResult::new(
        id,
        "self-convergence under refinement",
        ok,
        parts.join("; "),
    )
}

/// More nutrients should not give a coarser terminal pattern. Reported only.
pub fn check_pattern_trend(id: u32) -> CriterionResult {
    let params = reference_params();
    let mut counts = Vec::new();
    let mut notes = Vec::new();
    for v0 in [0.5, 4.0] {
        let (_, traj, _) = reference_run(&params, v0, 0.0);
        match extract_pattern(&traj, default_window(&traj)) {
            Ok(p) => {
                notes.push(format!(
                    "v0 = {v0}: {} interval(s) {:?}",
                    p.n_intervals,
                    p.a1.pairs()
                ));
                counts.push(Some(p.n_intervals));
            }
            Err(DiagnosticsError::NotStationary { last_change }) => {
                notes.push(format!(
                    "v0 = {v0}: not stationary (last change t = {last_change})"
                ));
                counts.push(None);
            }
            Err(e) => {
                notes.push(format!("v0 = {v0}: {e}"));
                counts.push(None);
            }
        }
    }
    let holds = matches!((counts[0], counts[1]), (Some(small), Some(large)) if large >= small);
    CriterionResult {
        id,
        name: "pattern complexity grows with v0 (qualitative)".into(),
        status: if holds { Status::Pass } else { Status::Warn },
        detail: notes.join("; "),
    }
}

/// Runs the suite, calling `report` after each criterion.
pub fn run_suite(
    level: Level,
    seed: u64,
    mut report: impl FnMut(&CriterionResult),
) -> Vec<CriterionResult> {
    let mut results = Vec::new();
    let mut push = |r: CriterionResult, results: &mut Vec<CriterionResult>| {
        report(&r);
        results.push(r);
    };

    let params = match level {
        Level::Fast => reference_params().with_t_end(10.0),
        Level::Full => reference_params(),
    };
    let (init, traj, elapsed) = reference_run(&params, 1.0, 0.0);
    push(check_conservation(1, &traj, elapsed), &mut results);
    push(check_monotonicity(2, &traj), &mut results);
    if level == Level::Full {
        push(check_decay(3, &traj), &mut results);
        push(check_uniform_limit(4, &traj, &init), &mut results);
        let (_, high, _) = reference_run(&params, 1.0, 0.45);
        push(check_band(5, &[&traj, &high]), &mut results);
    }
    push(check_relay_properties(6, seed), &mut results);
    push(check_oracle(7, seed), &mut results);
    push(check_holder(8, seed), &mut results);
    if level == Level::Full {
        push(check_self_convergence(9, &traj), &mut results);
        push(check_pattern_trend(10), &mut results);
    }
    results
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn any_failure_gives_nonzero_exit() {
        let ok = CriterionResult::new(1, "a", true, String::new());
        let warn = CriterionResult {
            status: Status::Warn,
            ..ok.clone()
        };
        let bad = CriterionResult::new(2, "b", false, String::new());
        assert_eq!(exit_code(&[ok.clone(), warn.clone()]), 0);
        assert_eq!(exit_code(&[ok, bad, warn]), 1);
    }

    #[test]
    fn random_states_are_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let w0 = rng.gen_range(-0.5..=0.5);
            let a = random_state(&mut rng, reference_range(), w0);
            assert!(a.check_compatibility(w0).is_ok());
        }
    }
}
