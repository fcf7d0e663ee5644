//! TOML run configuration shared by the command-line tools and tests.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::ModelParams;
use crate::pide::Grid;
use crate::reserve::{SchemeKind, SimScheme};
use crate::viscosity::Region;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelParams,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub compare: CompareConfig,
    #[serde(default, skip_serializing_if = "OutputConfig::is_empty")]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub scheme: SchemeKind,
    pub dt_max: f64,
    pub bridge: bool,
    pub paths: usize,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { scheme: SchemeKind::ExactBetweenJumps, dt_max: 1e-2, bridge: false, paths: 100_000, seed: 1 }
    }
}

impl SimulationConfig {
    pub fn scheme(&self) -> SimScheme {
        SimScheme::new(self.scheme, self.dt_max).with_bridge(self.bridge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nu: usize,
    pub nt: usize,
    pub u_max: f64,
    /// `sinh` clustering towards `u = 0`; 0 gives a uniform grid.
    pub stretch: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { nu: 400, nt: 400, u_max: 60.0, stretch: 3.0 }
    }
}

impl GridConfig {
    pub fn build(&self, horizon: f64) -> Result<Grid> {
        Grid::stretched(self.nu, self.nt, self.u_max, horizon, self.stretch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    /// Residual tolerance `C (Δu + Δt)`.
    pub c: f64,
    pub t_min: f64,
    /// Upper sampling time as a fraction of the horizon.
    pub t_max_fraction: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { samples: 1000, seed: 1, c: 1.0, t_min: 0.0, t_max_fraction: 0.9, u_min: 0.25, u_max: 10.0 }
    }
}

impl VerifyConfig {
    pub fn region(&self, horizon: f64) -> Region {
        Region { t_min: self.t_min, t_max: self.t_max_fraction * horizon, u_min: self.u_min, u_max: self.u_max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub u: Vec<f64>,
    /// Scheme tolerance added to `3 SE`.
    pub tolerance: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig { u: vec![0.5, 1.0, 2.0, 5.0], tolerance: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

impl OutputConfig {
    fn is_empty(&self) -> bool {
        self.dir.is_none()
    }
}

impl RunConfig {
    pub fn new(model: ModelParams) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            model,
            simulation: Default::default(),
            grid: Default::default(),
            verify: Default::default(),
            compare: Default::default(),
            output: Default::default(),
        }
    }

    /// Every problem in the configuration, one per entry.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            out.push(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        out.extend(self.model.problems().into_iter().map(|p| format!("model.{p}")));
        let s = &self.simulation;
        if !(s.dt_max.is_finite() && s.dt_max > 0.0) {
            out.push(format!("simulation.dt_max = {} must be finite and > 0", s.dt_max));
        }
        if s.paths == 0 {
            out.push("simulation.paths must be >= 1".into());
        }
        let g = &self.grid;
        if g.nu < 4 {
            out.push(format!("grid.nu = {} must be >= 4", g.nu));
        }
        if g.nt < 1 {
            out.push("grid.nt must be >= 1".into());
        }
        if !(g.stretch.is_finite() && g.stretch >= 0.0) {
            out.push(format!("grid.stretch = {} must be finite and >= 0", g.stretch));
        }
        let c = &self.compare;
        if c.u.is_empty() {
            out.push("compare.u must list at least one capital".into());
        }
        if let Some(u) = c.u.iter().find(|u| !(u.is_finite() && **u > 0.0)) {
            out.push(format!("compare.u contains {u}; capitals must be finite and > 0"));
        }
        let top = c.u.iter().copied().fold(0.0, f64::max);
        if !(g.u_max.is_finite() && g.u_max > 10.0 * top) {
            out.push(format!("grid.u_max = {} must exceed 10 x the largest compare.u ({top})", g.u_max));
        }
        if !(c.tolerance >= 0.0) {
            out.push(format!("compare.tolerance = {} must be >= 0", c.tolerance));
        }
        let v = &self.verify;
        if !(v.c > 0.0) {
            out.push(format!("verify.c = {} must be > 0", v.c));
        }
        if !(v.t_min >= 0.0 && v.t_max_fraction > 0.0 && v.t_max_fraction <= 1.0 && v.u_max > v.u_min) {
            out.push("verify region must satisfy t_min >= 0, 0 < t_max_fraction <= 1, u_min < u_max".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Parse and fully validate a configuration.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// The frozen jump-diffusion reference configuration.
pub const REFERENCE_TOML: &str = include_str!("../configs/reference.toml");

pub fn reference_config() -> RunConfig {
    parse_config_str(REFERENCE_TOML).expect("reference configuration is valid")
}
