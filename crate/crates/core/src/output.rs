//! Run artefacts: `scalars.csv`, per-snapshot profiles and `report.toml`.
//!
//! Floats are written in Rust's shortest round-trip form, so identical runs
//! produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use thiserror::Error;

use crate::config::RunConfig;
use crate::diagnostics::{default_window, extract_pattern, AsymptoticsReport, PhenotypePattern};
use crate::hysteresis::relay_field;
use crate::model::ModelError;
use crate::solver::{run_with, MonitorCounts, RunOptions, SolverError, SystemState, Trajectory};

/// Fourier modes listed in the report.
pub const REPORT_MODES: usize = 8;

pub const SCALARS_HEADER: &str = "t,U,v,w,P,conservation_residual";

pub fn scalars_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * traj.scalars.len());
    out.push_str(SCALARS_HEADER);
    out.push('\n');
    for r in &traj.scalars {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.t, r.mass, r.v, r.w, r.p, r.residual
        );
    }
    out
}

/// Columns `x,u,r` with `r` the relay output at each node.
pub fn snapshot_csv(s: &SystemState) -> String {
    let nodes = s.u.nodes();
    let relays = relay_field(&s.a, &nodes);
    let mut out = String::from("x,u,r\n");
    for ((x, u), r) in nodes.iter().zip(s.u.values()).zip(relays) {
        let _ = writeln!(out, "{x},{u},{}", r.value());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub asymptotics: AsymptoticsReport,
    pub monitors: MonitorCounts,
    pub state_changes: usize,
    /// Absent when the Preisach state was still changing inside the window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PatternSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternSummary {
    pub a1: Vec<[f64; 2]>,
    pub am1: Vec<[f64; 2]>,
    pub n_intervals: usize,
    pub stationary_since: f64,
}

impl From<&PhenotypePattern> for PatternSummary {
    fn from(p: &PhenotypePattern) -> Self {
        let pairs = |s: &crate::hysteresis::IntervalSet| {
            s.pairs().into_iter().map(|(a, b)| [a, b]).collect()
        };
        Self {
            a1: pairs(&p.a1),
            am1: pairs(&p.am1),
            n_intervals: p.n_intervals,
            stationary_since: p.stationary_since,
        }
    }
}

impl RunReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report is always representable")
    }
}

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index:06}.csv")
}

/// Writes all artefacts below `dir` and returns the paths written.
pub fn write_run(dir: &Path, traj: &Trajectory, report: &RunReport) -> io::Result<Vec<PathBuf>> {
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir)?;
    let mut written = Vec::with_capacity(traj.snapshots.len() + 2);

    let path = dir.join("scalars.csv");
    fs::write(&path, scalars_csv(traj))?;
    written.push(path);

    for (i, s) in traj.snapshots.iter().enumerate() {
        let path = snap_dir.join(snapshot_name(i));
        fs::write(&path, snapshot_csv(s))?;
        written.push(path);
    }

    let path = dir.join("report.toml");
    fs::write(&path, report.to_toml())?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Runs a configuration and writes its artefacts to `out`.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<RunReport, SimulateError> {
    let init = cfg.initial_data()?;
    let options = RunOptions {
        stride: cfg.stride,
        strict: cfg.strict_mode,
        ..RunOptions::default()
    };
    let traj = run_with(&cfg.params, &init, &options)?;
    let pattern = extract_pattern(&traj, default_window(&traj)).ok();
    let report = RunReport {
        asymptotics: AsymptoticsReport::from_run(&traj, &init, REPORT_MODES),
        monitors: traj.counts,
        state_changes: traj.state_changes.len(),
        pattern: pattern.as_ref().map(PatternSummary::from),
    };
    write_run(out, &traj, &report).map_err(|source| SimulateError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    Ok(report)
}
