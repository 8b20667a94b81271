//! `avor-scenario/1` JSON reader and writer.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::kinematics::{accelerations, derive_kinematics};
use super::{
    Population, RiskLabel, RoadGeometry, ScenarioTrace, StaticObject, VehicleState,
};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Vec2};

pub const SCENARIO_SCHEMA: &str = "avor-scenario/1";

const DEFAULT_LENGTH: f64 = 4.8;
const DEFAULT_WIDTH: f64 = 1.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub id: String,
    pub dt: f64,
    pub road: RoadFile,
    pub population: Population,
    pub risk_label: RiskLabel,
    pub ego: Vec<FrameFile>,
    pub actors: BTreeMap<String, Vec<FrameFile>>,
    pub cutin_actor: String,
    /// Footprint sizes keyed by `"ego"` or actor id; missing entries fall
    /// back to a 4.8 m x 1.9 m passenger car.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub dimensions: BTreeMap<String, Dimensions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadFile {
    pub lane_count: u32,
    pub lane_width: f64,
    pub ego_lane_index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub road_length: Option<f64>,
    #[serde(default)]
    pub static_objects: Vec<StaticObject>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameFile {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_lat: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dimensions {
    pub length: f64,
    pub width: f64,
}

/// Read, validate and complete a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioTrace> {
    load_scenario_with_window(path, 5)
}

pub fn load_scenario_with_window(
    path: impl AsRef<Path>,
    window: usize,
) -> Result<ScenarioTrace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, window)
}

/// Parse scenario JSON text. Missing velocities are derived from positions;
/// accelerations are always derived, using a `window`-sample smoother.
pub fn parse_scenario(text: &str, window: usize) -> Result<ScenarioTrace> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    file.into_trace(window)
}

impl ScenarioFile {
    pub fn into_trace(self, window: usize) -> Result<ScenarioTrace> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(Error::Format(format!(
                "unsupported schema `{}`, expected `{SCENARIO_SCHEMA}`",
                self.schema
            )));
        }
        if self.ego.len() < 2 {
            return Err(Error::TooShort(format!(
                "{} frame(s), need at least 2",
                self.ego.len()
            )));
        }
        if !self.actors.contains_key(&self.cutin_actor) {
            return Err(Error::Reference(format!(
                "cutin_actor `{}` not present in actors",
                self.cutin_actor
            )));
        }
        for (id, d) in &self.dimensions {
            if id != "ego" && !self.actors.contains_key(id) {
                return Err(Error::Reference(format!(
                    "dimensions given for unknown vehicle `{id}`"
                )));
            }
            if !(d.length > 0.0 && d.width > 0.0) {
                return Err(Error::Parse {
                    field: format!("dimensions.{id}"),
                    message: "length and width must be positive".into(),
                });
            }
        }
        let dims = |id: &str| {
            self.dimensions.get(id).copied().unwrap_or(Dimensions {
                length: DEFAULT_LENGTH,
                width: DEFAULT_WIDTH,
            })
        };

        let ego = complete_states(&self.ego, self.dt, dims("ego"), window, "ego")?;
        let mut actors = BTreeMap::new();
        for (id, frames) in &self.actors {
            actors.insert(
                id.clone(),
                complete_states(frames, self.dt, dims(id), window, id)?,
            );
        }

        let road_length = match self.road.road_length {
            Some(l) => l,
            None => {
                let xs = ego.iter().chain(actors.values().flatten()).map(|s| s.x);
                let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                });
                (hi - lo).max(0.0)
            }
        };

        let trace = ScenarioTrace {
            id: self.id,
            dt: self.dt,
            road: RoadGeometry {
                lane_count: self.road.lane_count,
                lane_width: self.road.lane_width,
                ego_lane_index: self.road.ego_lane_index,
                road_length,
                static_objects: self.road.static_objects,
            },
            ego,
            actors,
            cutin_actor: self.cutin_actor,
            population: self.population,
            risk_label: self.risk_label,
        };
        trace.validate()?;
        Ok(trace)
    }
}

fn complete_states(
    frames: &[FrameFile],
    dt: f64,
    dims: Dimensions,
    window: usize,
    who: &str,
) -> Result<Vec<VehicleState>> {
    if frames.len() < 2 {
        return Err(Error::TooShort(format!(
            "`{who}` has {} frame(s), need at least 2",
            frames.len()
        )));
    }
    let has_velocity = frames.iter().all(|f| f.v_lon.is_some() && f.v_lat.is_some());
    let (v_lon, v_lat, a_lon, a_lat) = if has_velocity {
        let v_lon: Vec<f64> = frames.iter().map(|f| f.v_lon.unwrap_or_default()).collect();
        let v_lat: Vec<f64> = frames.iter().map(|f| f.v_lat.unwrap_or_default()).collect();
        let (a_lon, a_lat) = accelerations(&v_lon, &v_lat, dt, window)?;
        (v_lon, v_lat, a_lon, a_lat)
    } else {
        let positions: Vec<Vec2> = frames.iter().map(|f| Vec2::new(f.x, f.y)).collect();
        let k = derive_kinematics(&positions, dt, window).map_err(|e| match e {
            Error::TooShort(m) => Error::TooShort(format!("`{who}`: {m}")),
            other => other,
        })?;
        (k.v_lon, k.v_lat, k.a_lon, k.a_lat)
    };
    Ok(frames
        .iter()
        .enumerate()
        .map(|(i, f)| VehicleState {
            t: f.t,
            x: f.x,
            y: f.y,
            heading: wrap_angle(f.heading),
            v_lon: v_lon[i],
            v_lat: v_lat[i],
            a_lon: a_lon[i],
            a_lat: a_lat[i],
            length: dims.length,
            width: dims.width,
        })
        .collect())
}

/// Serialise a trace back to `avor-scenario/1` (velocities included).
pub fn scenario_to_json(trace: &ScenarioTrace) -> Result<String> {
    let frames = |states: &[VehicleState]| -> Vec<FrameFile> {
        states
            .iter()
            .map(|s| FrameFile {
                t: s.t,
                x: s.x,
                y: s.y,
                heading: s.heading,
                v_lon: Some(s.v_lon),
                v_lat: Some(s.v_lat),
            })
            .collect()
    };
    let mut dimensions = BTreeMap::new();
    let dim = |s: &[VehicleState]| Dimensions {
        length: s[0].length,
        width: s[0].width,
    };
    dimensions.insert("ego".to_string(), dim(&trace.ego));
    for (id, s) in &trace.actors {
        dimensions.insert(id.clone(), dim(s));
    }
    let file = ScenarioFile {
        schema: SCENARIO_SCHEMA.to_string(),
        id: trace.id.clone(),
        dt: trace.dt,
        road: RoadFile {
            lane_count: trace.road.lane_count,
            lane_width: trace.road.lane_width,
            ego_lane_index: trace.road.ego_lane_index,
            road_length: Some(trace.road.road_length),
            static_objects: trace.road.static_objects.clone(),
        },
        population: trace.population,
        risk_label: trace.risk_label,
        ego: frames(&trace.ego),
        actors: trace.actors.iter().map(|(k, v)| (k.clone(), frames(v))).collect(),
        cutin_actor: trace.cutin_actor.clone(),
        dimensions,
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))
}
