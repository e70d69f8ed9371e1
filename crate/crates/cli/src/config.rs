//! Run configuration: a TOML file with `[model]`, `[grid]`, `[time]`, `[ic]`
//! and `[output]` tables.
//!
//! ```toml
//! [model]
//! d1 = 5.0
//! d2 = 0.1
//! chi = 80.0
//! xi = 0.1
//! mu1 = 1.0
//! mu2 = 1.0
//! a1 = 0.5
//! a2 = 0.5
//! lambda = 5.0
//! L = 6.0
//!
//! [ic]
//! kind = "raw_cosine"
//! frequency = 6.283185307179586
//! ```
//!
//! Everything outside `[model]` is optional.

use std::path::PathBuf;

use chemopattern::{Grid1D, ModelParams, Perturbation, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub ic: IcSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Defaults to `ceil(L / 0.02)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub max_substeps: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            dt: d.dt,
            t_end: d.t_end,
            cfl_safety: d.cfl_safety,
            max_substeps: d.max_substeps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcKind {
    ModeIndex,
    RawCosine,
    RandomSmooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IcSection {
    pub kind: IcKind,
    pub amplitude: f64,
    /// Mode index for `mode_index`.
    pub wavenumber: u32,
    /// Angular frequency for `raw_cosine`.
    pub frequency: f64,
    /// Seed for `random_smooth`.
    pub seed: u64,
}

impl Default for IcSection {
    fn default() -> Self {
        Self {
            kind: IcKind::RawCosine,
            amplitude: 0.001,
            wavenumber: 1,
            frequency: 2.0 * std::f64::consts::PI,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub snapshot_every: f64,
    pub probe_x: Vec<f64>,
    #[serde(rename = "spectrum_K")]
    pub spectrum_k: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            snapshot_every: 1.0,
            probe_x: vec![0.0],
            spectrum_k: 10,
        }
    }
}

impl RunConfig {
    pub fn n_cells(&self) -> usize {
        self.grid
            .n_cells
            .unwrap_or_else(|| Grid1D::default_cells(self.model.length))
    }

    pub fn grid(&self) -> Result<Grid1D, ConfigError> {
        Grid1D::new(self.model.length, self.n_cells()).map_err(|e| ConfigError::Validation(e.to_string()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.time.dt,
            t_end: self.time.t_end,
            cfl_safety: self.time.cfl_safety,
            max_substeps: self.time.max_substeps,
        }
    }

    pub fn perturbation(&self) -> Perturbation {
        match self.ic.kind {
            IcKind::ModeIndex => Perturbation::Mode(self.ic.wavenumber),
            _ => Perturbation::RawCosine(self.ic.frequency),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Validation(m));
        self.model
            .validate()
            .map_err(|e| ConfigError::Validation(e.to_string()))?;
        self.solver_config()
            .validate()
            .map_err(|e| ConfigError::Validation(e.to_string()))?;
        let n = self.n_cells();
        if n < 8 {
            return invalid(format!("n_cells must be >= 8 (got {n})"));
        }
        if !(self.time.t_end > 0.0) {
            return invalid(format!("t_end must be > 0 (got {})", self.time.t_end));
        }
        if !(self.output.snapshot_every > 0.0) {
            return invalid(format!(
                "snapshot_every must be > 0 (got {})",
                self.output.snapshot_every
            ));
        }
        let k = self.output.spectrum_k;
        if k < 1 || k > n / 2 {
            return invalid(format!("spectrum_K must lie in 1..={} (got {k})", n / 2));
        }
        if let Some(x) = self
            .output
            .probe_x
            .iter()
            .find(|x| !(**x >= 0.0 && **x <= self.model.length))
        {
            return invalid(format!("probe_x {x} lies outside [0, L]"));
        }
        if !self.ic.amplitude.is_finite() || self.ic.amplitude < 0.0 {
            return invalid(format!("amplitude must be >= 0 (got {})", self.ic.amplitude));
        }
        if self.ic.kind == IcKind::ModeIndex && self.ic.wavenumber == 0 {
            return invalid("wavenumber must be >= 1".into());
        }
        if self.ic.seed > i64::MAX as u64 {
            return invalid("seed must fit in a signed 64-bit integer".into());
        }
        if !self.ic.frequency.is_finite() {
            return invalid("frequency must be finite".into());
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        line: e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0),
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn serialize_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configuration always serializes")
}
