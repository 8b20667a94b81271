//! Scenario data model: vehicle states on a straight multi-lane road.
//!
//! Coordinates are road-aligned: `x` runs along the road, `y` is lateral
//! with `y = 0` at the centre of the ego lane and positive to the left.
//! Positions are geometric centres of the vehicle footprint.

mod characterize;
mod io;
mod kinematics;
mod phases;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{OrientedRect, Vec2};

pub use characterize::{characterize_cutin, CutInCharacteristics};
pub use io::{
    load_scenario, load_scenario_with_window, parse_scenario, scenario_to_json, Dimensions,
    FrameFile, RoadFile, ScenarioFile, SCENARIO_SCHEMA,
};
pub use kinematics::{derive_kinematics, differentiate, moving_average, Kinematics};
pub use phases::{in_window, segment_phases, Phase, PhaseParams, PhaseSegmentation, PHASE0_WINDOW};

/// Timestamp comparison tolerance used throughout (seconds).
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v_lon: f64,
    pub v_lat: f64,
    pub a_lon: f64,
    pub a_lat: f64,
    pub length: f64,
    pub width: f64,
}

impl VehicleState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn speed(&self) -> f64 {
        self.v_lon.hypot(self.v_lat)
    }

    pub fn footprint(&self) -> OrientedRect {
        OrientedRect {
            center: self.position(),
            heading: self.heading,
            length: self.length,
            width: self.width,
        }
    }

    /// Centre of the front bumper.
    pub fn front(&self) -> Vec2 {
        self.position() + Vec2::from_angle(self.heading).scale(0.5 * self.length)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.width > 0.0) {
            return Err(Error::Invalid(format!(
                "vehicle dimensions must be positive (length {}, width {})",
                self.length, self.width
            )));
        }
        let finite = [
            self.t, self.x, self.y, self.heading, self.v_lon, self.v_lat, self.a_lon, self.a_lat,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Invalid(format!("non-finite state at t={}", self.t)));
        }
        if self.heading.abs() > std::f64::consts::PI {
            return Err(Error::Invalid(format!(
                "heading {} outside [-pi, pi]",
                self.heading
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Car,
    Truck,
    Building,
    Tree,
    Barrier,
}

impl ObjectClass {
    /// Road furniture only appears at the `A+R` population level.
    pub fn is_furniture(self) -> bool {
        matches!(self, Self::Building | Self::Tree | Self::Barrier)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticObject {
    pub class: ObjectClass,
    pub footprint: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadGeometry {
    pub lane_count: u32,
    pub lane_width: f64,
    /// Lanes are numbered from the right (most negative `y`) starting at 0.
    pub ego_lane_index: u32,
    pub road_length: f64,
    pub static_objects: Vec<StaticObject>,
}

impl RoadGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.lane_count < 1 {
            return Err(Error::Invalid("lane_count must be >= 1".into()));
        }
        if self.ego_lane_index >= self.lane_count {
            return Err(Error::Invalid(format!(
                "ego_lane_index {} out of range for {} lanes",
                self.ego_lane_index, self.lane_count
            )));
        }
        if !(self.lane_width > 0.0) {
            return Err(Error::Invalid("lane_width must be positive".into()));
        }
        Ok(())
    }

    /// Lateral bounds of the ego lane.
    pub fn ego_lane_bounds(&self) -> (f64, f64) {
        (-0.5 * self.lane_width, 0.5 * self.lane_width)
    }

    /// Lateral bounds of the paved road.
    pub fn road_bounds(&self) -> (f64, f64) {
        let w = self.lane_width;
        let right = -(self.ego_lane_index as f64 + 0.5) * w;
        (right, right + self.lane_count as f64 * w)
    }

    /// Lateral positions of the lane markings between adjacent lanes.
    pub fn lane_boundaries(&self) -> Vec<f64> {
        let (right, _) = self.road_bounds();
        (1..self.lane_count)
            .map(|i| right + i as f64 * self.lane_width)
            .collect()
    }

    pub fn lane_of(&self, y: f64) -> Option<u32> {
        let (right, left) = self.road_bounds();
        if y < right || y > left {
            return None;
        }
        let idx = ((y - right) / self.lane_width).floor() as i64;
        Some(idx.clamp(0, self.lane_count as i64 - 1) as u32)
    }
}

/// Scene population levels: object of interest only, all road actors,
/// all road actors plus road furniture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Population {
    #[serde(rename = "O")]
    O,
    #[serde(rename = "A")]
    A,
    #[serde(rename = "A+R")]
    AR,
}

impl Population {
    pub const ALL: [Population; 3] = [Population::O, Population::A, Population::AR];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::O => "O",
            Self::A => "A",
            Self::AR => "A+R",
        }
    }

    pub fn includes_all_actors(self) -> bool {
        !matches!(self, Self::O)
    }

    pub fn includes_furniture(self) -> bool {
        matches!(self, Self::AR)
    }
}

impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Population {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "O" | "o" => Ok(Self::O),
            "A" | "a" => Ok(Self::A),
            "A+R" | "a+r" | "AR" | "ar" | "A R" => Ok(Self::AR),
            other => Err(Error::Invalid(format!("unknown population level `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RiskLabel {
    #[serde(rename = "HRS")]
    Hrs,
    #[serde(rename = "LRS")]
    Lrs,
    #[serde(rename = "unlabeled")]
    Unlabeled,
}

impl RiskLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hrs => "HRS",
            Self::Lrs => "LRS",
            Self::Unlabeled => "unlabeled",
        }
    }
}

impl fmt::Display for RiskLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTrace {
    pub id: String,
    pub dt: f64,
    pub road: RoadGeometry,
    pub ego: Vec<VehicleState>,
    pub actors: BTreeMap<String, Vec<VehicleState>>,
    pub cutin_actor: String,
    pub population: Population,
    pub risk_label: RiskLabel,
}

impl ScenarioTrace {
    /// Check every structural invariant of a trace.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Format(format!("dt must be positive, got {}", self.dt)));
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
        self.road.validate()?;
        check_stride(&self.ego, self.dt, "ego")?;
        for (id, states) in &self.actors {
            if states.len() != self.ego.len() {
                return Err(Error::Format(format!(
                    "actor `{id}` has {} frames, ego has {}",
                    states.len(),
                    self.ego.len()
                )));
            }
            for (a, e) in states.iter().zip(&self.ego) {
                if (a.t - e.t).abs() > TIME_EPS {
                    return Err(Error::Format(format!(
                        "actor `{id}` timestamp {} does not match ego timestamp {}",
                        a.t, e.t
                    )));
                }
            }
        }
        for s in self.ego.iter().chain(self.actors.values().flatten()) {
            s.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ego.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ego.is_empty()
    }

    /// Total covered time, `frames * dt`.
    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        self.ego.iter().map(|s| s.t).collect()
    }

    pub fn cutin(&self) -> &[VehicleState] {
        &self.actors[&self.cutin_actor]
    }

    /// Index of the sample whose timestamp matches `t`, if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let t0 = self.ego.first()?.t;
        let i = ((t - t0) / self.dt).round();
        if i < 0.0 {
            return None;
        }
        let i = i as usize;
        (i < self.len() && (self.ego[i].t - t).abs() <= 1e-6).then_some(i)
    }

    /// Actor ids visible at the given population level.
    pub fn visible_actor_ids(&self, population: Population) -> Vec<&str> {
        self.actors
            .keys()
            .filter(|id| population.includes_all_actors() || **id == self.cutin_actor)
            .map(String::as_str)
            .collect()
    }

    /// Static objects visible at the given population level.
    pub fn visible_static_objects(&self, population: Population) -> Vec<&StaticObject> {
        self.road
            .static_objects
            .iter()
            .filter(|o| {
                if o.class.is_furniture() {
                    population.includes_furniture()
                } else {
                    population.includes_all_actors()
                }
            })
            .collect()
    }

    /// Same scene, different population tag.
    pub fn with_population(&self, population: Population) -> Self {
        Self {
            population,
            ..self.clone()
        }
    }

    /// Lateral direction of the cut-in actor's approach: -1 when it starts
    /// left of the ego lane (positive `y`), +1 when it starts to the right.
    pub fn cutin_approach_sign(&self) -> f64 {
        let y0 = self.cutin()[0].y - self.ego[0].y;
        if y0 >= 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

fn check_stride(states: &[VehicleState], dt: f64, who: &str) -> Result<()> {
    for w in states.windows(2) {
        let step = w[1].t - w[0].t;
        if (step - dt).abs() > TIME_EPS {
            return Err(Error::Format(format!(
                "{who}: non-uniform sampling between t={} and t={} (step {step}, dt {dt})",
                w[0].t, w[1].t
            )));
        }
    }
    Ok(())
}

/// Bumper-to-bumper longitudinal gap from `ego` to `other` (positive when
/// `other` is ahead).
pub fn longitudinal_gap(ego: &VehicleState, other: &VehicleState) -> f64 {
    (other.x - 0.5 * other.length) - (ego.x + 0.5 * ego.length)
}

/// Time-to-collision with `lead`, when closing and ahead.
pub fn time_to_collision(ego: &VehicleState, lead: &VehicleState) -> Option<f64> {
    let gap = longitudinal_gap(ego, lead);
    let closing = ego.v_lon - lead.v_lon;
    (gap > 0.0 && closing > 0.0).then(|| gap / closing)
}

/// Whether any part of the footprint lies laterally inside the ego lane.
pub fn overlaps_ego_lane(road: &RoadGeometry, s: &VehicleState) -> bool {
    let (lo, hi) = road.ego_lane_bounds();
    let (ymin, ymax) = s.footprint().y_extent();
    ymax > lo && ymin < hi
}

/// Whether the full footprint lies laterally inside the ego lane.
pub fn fully_in_ego_lane(road: &RoadGeometry, s: &VehicleState) -> bool {
    let (lo, hi) = road.ego_lane_bounds();
    let (ymin, ymax) = s.footprint().y_extent();
    ymin >= lo && ymax <= hi
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn state(t: f64, x: f64, y: f64, v_lon: f64, v_lat: f64) -> VehicleState {
        VehicleState {
            t,
            x,
            y,
            heading: 0.0,
            v_lon,
            v_lat,
            a_lon: 0.0,
            a_lat: 0.0,
            length: 4.8,
            width: 1.9,
        }
    }

    pub fn road() -> RoadGeometry {
        RoadGeometry {
            lane_count: 3,
            lane_width: 3.7,
            ego_lane_index: 1,
            road_length: 1000.0,
            static_objects: vec![],
        }
    }

    /// Ego at constant speed on y=0 plus one actor whose lateral velocity
    /// is given per frame; positions integrate the velocities.
    pub fn cutin_trace(n: usize, dt: f64, y0: f64, v_lat: impl Fn(f64) -> f64) -> ScenarioTrace {
        let mut ego = Vec::with_capacity(n);
        let mut cut = Vec::with_capacity(n);
        let mut y = y0;
        for i in 0..n {
            let t = i as f64 * dt;
            let vy = v_lat(t);
            if i > 0 {
                y += 0.5 * (vy + v_lat(t - dt)) * dt;
            }
            ego.push(state(t, 20.0 * t, 0.0, 20.0, 0.0));
            cut.push(state(t, 20.0 * t + 15.0, y, 20.0, vy));
        }
        let mut actors = BTreeMap::new();
        actors.insert("cut".to_string(), cut);
        ScenarioTrace {
            id: "synthetic".into(),
            dt,
            road: road(),
            ego,
            actors,
            cutin_actor: "cut".into(),
            population: Population::O,
            risk_label: RiskLabel::Unlabeled,
        }
    }
}
