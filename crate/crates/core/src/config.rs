//! Run configuration: a flat TOML document with dotted sections.
//!
//! ```toml
//! strict_mode = false
//!
//! [model]
//! x_lo = 0.1
//! x_hi = 0.4
//! diffusion = 1.0           # optional, default 1
//! allow_nonphysical = false # optional
//!
//! [grid]
//! n = 257
//!
//! [time]
//! dt = 1e-3                 # optional, derived from x_lo and U0 + v0
//! t_end = 100.0
//!
//! [init]
//! v0 = 1.0
//! w0 = 0.0
//! A0 = [[0.1, 0.4]]
//!
//! [init.u0]
//! kind = "constant"         # or "table" / "piecewise_linear" with `points = [[x, u], ...]`
//! value = 1.0
//!
//! [output]
//! dir = "out"
//! stride = 1000
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::DensityField;
use crate::hysteresis::{total_mass, IntervalSet, ThresholdRange};
use crate::model::{suggest_dt, InitialData, ModelError, ModelParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("{key} {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    strict_mode: bool,
    model: ModelSection,
    grid: GridSection,
    time: TimeSection,
    init: InitSection,
    output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    x_lo: f64,
    x_hi: f64,
    #[serde(default = "default_diffusion")]
    diffusion: f64,
    #[serde(default)]
    allow_nonphysical: bool,
}

fn default_diffusion() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitSection {
    v0: f64,
    w0: f64,
    #[serde(rename = "A0")]
    a0: Vec<[f64; 2]>,
    u0: DensitySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: PathBuf,
    #[serde(default = "default_stride")]
    stride: usize,
}

fn default_stride() -> usize {
    1
}

/// Declarative initial density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    /// `u0 ≡ value`.
    Constant { value: f64 },
    /// Step function: each node carries its value up to the next node.
    Table { points: Vec<[f64; 2]> },
    /// Linear interpolation between nodes, constant beyond the end nodes.
    PiecewiseLinear { points: Vec<[f64; 2]> },
}

impl DensitySpec {
    fn validate(&self) -> Result<()> {
        let points = match self {
            DensitySpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(ConfigError::invalid("init.u0.value", "must be finite"));
                }
                return Ok(());
            }
            DensitySpec::Table { points } | DensitySpec::PiecewiseLinear { points } => points,
        };
        if points.is_empty() {
            return Err(ConfigError::invalid("init.u0.points", "must not be empty"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ConfigError::invalid("init.u0.points", "must be finite"));
        }
        if points.windows(2).any(|p| p[0][0] >= p[1][0]) {
            return Err(ConfigError::invalid(
                "init.u0.points",
                "x coordinates must be strictly increasing",
            ));
        }
        Ok(())
    }

    pub fn sample(&self, range: ThresholdRange, n: usize) -> DensityField {
        match self {
            DensitySpec::Constant { value } => DensityField::constant(range, n, *value),
            DensitySpec::Table { points } => DensityField::from_fn(range, n, |x| {
                let idx = points.partition_point(|p| p[0] <= x);
                points[idx.saturating_sub(1)][1]
            }),
            DensitySpec::PiecewiseLinear { points } => DensityField::from_fn(range, n, |x| {
                let idx = points.partition_point(|p| p[0] <= x);
                if idx == 0 {
                    points[0][1]
                } else if idx == points.len() {
                    points[idx - 1][1]
                } else {
                    let [x0, u0] = points[idx - 1];
                    let [x1, u1] = points[idx];
                    u0 + (u1 - u0) * (x - x0) / (x1 - x0)
                }
            }),
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub u0: DensitySpec,
    pub v0: f64,
    pub w0: f64,
    pub a0: IntervalSet,
    pub allow_nonphysical: bool,
    pub strict_mode: bool,
    pub output_dir: PathBuf,
    pub stride: usize,
}

impl RunConfig {
    pub fn initial_data(&self) -> std::result::Result<InitialData, ModelError> {
        InitialData::new(
            self.u0.sample(self.params.range, self.params.n_grid),
            self.v0,
            self.w0,
            self.a0.clone(),
            self.allow_nonphysical,
        )
    }

    /// Renders the configuration as a document `parse_config` accepts.
    pub fn to_toml(&self) -> String {
        let file = ConfigFile {
            strict_mode: self.strict_mode,
            model: ModelSection {
                x_lo: self.params.x_lo(),
                x_hi: self.params.x_hi(),
                diffusion: self.params.diffusion,
                allow_nonphysical: self.allow_nonphysical,
            },
            grid: GridSection {
                n: self.params.n_grid,
            },
            time: TimeSection {
                dt: Some(self.params.dt),
                t_end: self.params.t_end,
            },
            init: InitSection {
                v0: self.v0,
                w0: self.w0,
                a0: self.a0.pairs().into_iter().map(|(a, b)| [a, b]).collect(),
                u0: self.u0.clone(),
            },
            output: OutputSection {
                dir: self.output_dir.clone(),
                stride: self.stride,
            },
        };
        toml::to_string(&file).expect("config is always representable")
    }
}

fn map_model_error(e: ModelError) -> ConfigError {
    match e {
        ModelError::InvalidParams(reason) => ConfigError::invalid("model", reason),
        ModelError::DeviationOutOfBand(w) => {
            ConfigError::invalid("init.w0", format!("must lie in [-1/2, 1/2], got {w}"))
        }
        ModelError::NonPhysical(reason) => ConfigError::invalid("init", reason),
        ModelError::Hysteresis(h) => ConfigError::invalid("init.A0", h.to_string()),
        other => ConfigError::invalid("init", other.to_string()),
    }
}

/// Parses and fully validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;

    let m = &file.model;
    if !(m.x_lo > 0.0) {
        return Err(ConfigError::invalid("model.x_lo", "must be > 0"));
    }
    if !(m.x_hi > m.x_lo) || !m.x_hi.is_finite() {
        return Err(ConfigError::invalid(
            "model.x_hi",
            "must be finite and > model.x_lo",
        ));
    }
    if !(m.diffusion >= 0.0) || !m.diffusion.is_finite() {
        return Err(ConfigError::invalid(
            "model.diffusion",
            "must be finite and >= 0",
        ));
    }
    if file.grid.n < 2 {
        return Err(ConfigError::invalid("grid.n", "must be >= 2"));
    }
    if !(file.time.t_end >= 0.0) || !file.time.t_end.is_finite() {
        return Err(ConfigError::invalid(
            "time.t_end",
            "must be finite and >= 0",
        ));
    }
    if let Some(dt) = file.time.dt {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(ConfigError::invalid("time.dt", "must be finite and > 0"));
        }
    }
    if file.output.stride == 0 {
        return Err(ConfigError::invalid("output.stride", "must be >= 1"));
    }
    let i = &file.init;
    if !i.v0.is_finite() {
        return Err(ConfigError::invalid("init.v0", "must be finite"));
    }
    if !(i.w0.abs() <= 0.5) {
        return Err(ConfigError::invalid("init.w0", "must lie in [-1/2, 1/2]"));
    }
    i.u0.validate()?;

    let range = ThresholdRange::new(m.x_lo, m.x_hi)
        .map_err(|e| ConfigError::invalid("model", e.to_string()))?;
    let pairs: Vec<(f64, f64)> = i.a0.iter().map(|p| (p[0], p[1])).collect();
    let a0 = IntervalSet::from_intervals(range, &pairs)
        .map_err(|e| ConfigError::invalid("init.A0", e.to_string()))?;

    let dt = match file.time.dt {
        Some(dt) => dt,
        None => {
            let u0 = i.u0.sample(range, file.grid.n);
            suggest_dt(m.x_lo, total_mass(&u0) + i.v0)
        }
    };
    let params = ModelParams {
        range,
        diffusion: m.diffusion,
        n_grid: file.grid.n,
        dt,
        t_end: file.time.t_end,
    };
    params.validate().map_err(map_model_error)?;

    let cfg = RunConfig {
        params,
        u0: i.u0.clone(),
        v0: i.v0,
        w0: i.w0,
        a0,
        allow_nonphysical: m.allow_nonphysical,
        strict_mode: file.strict_mode,
        output_dir: file.output.dir,
        stride: file.output.stride,
    };
    cfg.initial_data().map_err(map_model_error)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
x_lo = 0.1
x_hi = 0.4

[grid]
n = 33

[time]
dt = 0.01
t_end = 1.0

[init]
v0 = 1.0
w0 = 0.0
A0 = [[0.1, 0.4]]

[init.u0]
kind = "constant"
value = 1.0

[output]
dir = "out"
"#;

    #[test]
    fn minimal_document_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.params.n_grid, 33);
        assert_eq!(cfg.params.diffusion, 1.0);
        assert_eq!(cfg.stride, 1);
        assert!(!cfg.strict_mode);
        assert_eq!(cfg.a0, IntervalSet::full(cfg.params.range));
    }

    #[test]
    fn zero_lower_threshold_is_rejected() {
        let text = MINIMAL.replace("x_lo = 0.1", "x_lo = 0.0");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("x_lo must be > 0"), "{err}");
    }

    #[test]
    fn overlapping_intervals_are_rejected() {
        let text = MINIMAL.replace("A0 = [[0.1, 0.4]]", "A0 = [[0.1, 0.3], [0.2, 0.4]]");
        match parse_config(&text).unwrap_err() {
            ConfigError::Invalid { key, reason } => {
                assert_eq!(key, "init.A0");
                assert!(reason.contains("overlaps"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn incompatible_initial_state_is_rejected() {
        let text = MINIMAL
            .replace("A0 = [[0.1, 0.4]]", "A0 = []")
            .replace("w0 = 0.0", "w0 = 0.2");
        match parse_config(&text).unwrap_err() {
            ConfigError::Invalid { key, .. } => assert_eq!(key, "init.A0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("n = 33", "n = 33\nspacing = 0.1");
        assert!(matches!(parse_config(&text), Err(ConfigError::Syntax(_))));
        let text = MINIMAL.replace("value = 1.0", "value = 1.0\nslope = 2.0");
        assert!(matches!(parse_config(&text), Err(ConfigError::Syntax(_))));
        let text = format!("seed = 3\n{MINIMAL}");
        assert!(matches!(parse_config(&text), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn missing_dt_uses_the_suggested_step() {
        let text = MINIMAL.replace("dt = 0.01\n", "");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.params.dt, suggest_dt(0.1, 1.3));
    }

    #[test]
    fn negative_data_needs_the_nonphysical_flag() {
        let text = MINIMAL.replace("v0 = 1.0", "v0 = -1.0");
        assert!(parse_config(&text).is_err());
        let text = text.replace("x_hi = 0.4", "x_hi = 0.4\nallow_nonphysical = true");
        assert!(parse_config(&text).unwrap().allow_nonphysical);
    }

    #[test]
    fn density_tables_are_sampled() {
        let r = ThresholdRange::new(0.0 + 0.1, 0.5).unwrap();
        let step = DensitySpec::Table {
            points: vec![[0.1, 1.0], [0.3, 2.0]],
        };
        let u = step.sample(r, 5);
        assert_eq!(u.values(), &[1.0, 1.0, 2.0, 2.0, 2.0]);
        let lin = DensitySpec::PiecewiseLinear {
            points: vec![[0.1, 0.0], [0.5, 4.0]],
        };
        let u = lin.sample(r, 5);
        for (got, want) in u.values().iter().zip([0.0, 1.0, 2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let bad = MINIMAL.replace(
            "kind = \"constant\"\nvalue = 1.0",
            "kind = \"table\"\npoints = [[0.3, 1.0], [0.2, 2.0]]",
        );
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn serialised_config_round_trips() {
        let text = MINIMAL.replace(
            "kind = \"constant\"\nvalue = 1.0",
            "kind = \"piecewise_linear\"\npoints = [[0.1, 1.0], [0.4, 3.0]]",
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }
}
