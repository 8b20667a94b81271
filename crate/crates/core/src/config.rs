//! TOML configuration with environment overrides.
//!
//! Every key can be overridden with `AVOR_<SECTION>__<KEY>=<value>`, e.g.
//! `AVOR_DRF__T_LA=3.0` or `AVOR_VCC__EXTENT=cell`. Values are parsed as
//! TOML scalars and fall back to plain strings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::costmap::{CostParams, VccParams};
use crate::drf::DrfParams;
use crate::engine::{EngineParams, SteeringMode};
use crate::error::{Error, Result};
use crate::grid::GridConfig;
use crate::metrics::MetricsParams;
use crate::scenario::PhaseParams;

pub const ENV_PREFIX: &str = "AVOR_";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSection {
    pub steering: SteeringMode,
    /// Moving-average window (samples, odd) used before differentiating
    /// velocities into accelerations.
    pub smoothing_window: usize,
}

impl Default for EngineSection {
    fn default() -> Self {
        Self {
            steering: SteeringMode::Curvature,
            smoothing_window: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub drf: DrfParams,
    pub cost: CostParams,
    pub vcc: VccParams,
    pub grid: GridConfig,
    pub engine: EngineSection,
    pub phases: PhaseParams,
    pub metrics: MetricsParams,
}

impl Config {
    /// Defaults, overlaid with the file at `path` (if any), then with
    /// `AVOR_*` variables from `env`.
    pub fn load<I>(path: Option<&Path>, env: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                text.parse::<toml::Table>().map_err(|e| Error::Parse {
                    field: p.display().to_string(),
                    message: e.to_string(),
                })?
            }
            None => toml::Table::new(),
        };
        apply_env(&mut table, env)?;
        let cfg: Config = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(
            |e| Error::Parse {
                field: e.path().to_string(),
                message: e.inner().to_string(),
            },
        )?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let table = text.parse::<toml::Table>().map_err(|e| Error::Parse {
            field: String::new(),
            message: e.to_string(),
        })?;
        let cfg: Config = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(
            |e| Error::Parse {
                field: e.path().to_string(),
                message: e.inner().to_string(),
            },
        )?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.engine_params().validate()?;
        if self.engine.smoothing_window == 0 || self.engine.smoothing_window.is_multiple_of(2) {
            return Err(Error::Config(
                "engine.smoothing_window must be a positive odd number".into(),
            ));
        }
        if !(self.phases.v_lat_init > 0.0 && self.phases.sustain >= 0.0 && self.phases.ttc_safe > 0.0)
        {
            return Err(Error::Config(format!("invalid phase thresholds {:?}", self.phases)));
        }
        Ok(())
    }

    pub fn engine_params(&self) -> EngineParams {
        EngineParams {
            drf: self.drf,
            cost: self.cost,
            vcc: self.vcc,
            grid: self.grid,
            steering: self.engine.steering,
        }
    }
}

fn apply_env<I>(table: &mut toml::Table, env: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<(String, String)> = env
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    for (key, raw) in vars {
        let rest = &key[ENV_PREFIX.len()..];
        let Some((section, field)) = rest.split_once("__") else {
            continue;
        };
        let (section, field) = (section.to_ascii_lowercase(), field.to_ascii_lowercase());
        let entry = table
            .entry(section.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let toml::Value::Table(sect) = entry else {
            return Err(Error::Config(format!("`{section}` is not a table")));
        };
        sect.insert(field, parse_scalar(&raw));
    }
    Ok(())
}

fn parse_scalar(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
