//! Per-frame risk evaluation and whole-scenario runs.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costmap::{
    build_dynamic_layer, build_static_layer, compose_costmap, dynamic_sources, CostParams,
    StaticScene, VccParams,
};
use crate::drf::{build_drf, DrfParams};
use crate::error::{Error, Result};
use crate::geometry::{compensated_sum, Vec2};
use crate::grid::{ensure_same_spec, GridConfig, GridField, GridSpec};
use crate::scenario::{Phase, PhaseSegmentation, Population, ScenarioTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "DRF")]
    Drf,
    #[serde(rename = "AVOR")]
    Avor,
}

impl Model {
    pub const ALL: [Model; 2] = [Model::Drf, Model::Avor];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Drf => "DRF",
            Model::Avor => "AVOR",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "drf" => Ok(Model::Drf),
            "avor" => Ok(Model::Avor),
            other => Err(Error::Invalid(format!("unknown model `{other}`"))),
        }
    }
}

/// Source of the steering angle fed to the DRF path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringMode {
    /// From the curvature of the ego trajectory (three-point circumradius).
    #[default]
    Curvature,
    Zero,
}

/// Everything the engine needs besides the trace.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineParams {
    pub drf: DrfParams,
    pub cost: CostParams,
    pub vcc: VccParams,
    pub grid: GridConfig,
    pub steering: SteeringMode,
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        self.drf.validate()?;
        self.cost.validate()?;
        if !(self.vcc.v_lat_min >= 0.0) {
            return Err(Error::Config("vcc.v_lat_min must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskTrace {
    pub model: Model,
    pub scenario_id: String,
    pub population: Population,
    pub t: Vec<f64>,
    pub value: Vec<f64>,
}

impl RiskTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Field-weighted cost integral `sum(z * C) * res^2`, accumulated in
/// row-major order with compensated summation.
pub fn evaluate_risk(field: &GridField, cost: &GridField) -> Result<f64> {
    ensure_same_spec(field, cost)?;
    let res = field.spec().res;
    let sum = compensated_sum(
        field
            .values()
            .iter()
            .zip(cost.values())
            .map(|(z, c)| z * c),
    );
    Ok(sum * res * res)
}

/// Steering angle implied by the curvature through three ego positions.
pub fn steering_from_points(p0: Vec2, p1: Vec2, p2: Vec2, wheelbase: f64) -> f64 {
    let a = p1 - p0;
    let b = p2 - p1;
    let c = p2 - p0;
    let denom = a.norm() * b.norm() * c.norm();
    if denom == 0.0 {
        return 0.0;
    }
    let kappa = 2.0 * a.cross(b) / denom;
    (wheelbase * kappa).atan()
}

/// Per-frame steering estimate for the ego vehicle.
pub fn ego_steering(trace: &ScenarioTrace, mode: SteeringMode, wheelbase: f64) -> Vec<f64> {
    let n = trace.len();
    match mode {
        SteeringMode::Zero => vec![0.0; n],
        SteeringMode::Curvature if n < 3 => vec![0.0; n],
        SteeringMode::Curvature => (0..n)
            .map(|i| {
                let j = i.clamp(1, n - 2);
                steering_from_points(
                    trace.ego[j - 1].position(),
                    trace.ego[j].position(),
                    trace.ego[j + 1].position(),
                    wheelbase,
                )
            })
            .collect(),
    }
}

/// Raw risk of each requested model at one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRisk {
    pub drf: f64,
    pub avor: f64,
}

/// Layers built for one frame, for inspection and dumps.
#[derive(Debug, Clone)]
pub struct FrameLayers {
    pub field: GridField,
    pub static_layer: GridField,
    pub dynamic_layer: GridField,
}

pub fn frame_layers(
    trace: &ScenarioTrace,
    i: usize,
    steering: f64,
    params: &EngineParams,
) -> Result<FrameLayers> {
    let ego = &trace.ego[i];
    let spec = GridSpec::ego_centered(ego.position(), &params.grid)?;
    let field = build_drf(ego, steering, &params.drf, &spec)?;
    let scene = StaticScene::from_trace(trace, i, trace.population);
    let static_layer = build_static_layer(&trace.road, &scene, &spec, &params.cost)?;
    let sources = dynamic_sources(trace, i, &params.vcc);
    let dynamic_layer = build_dynamic_layer(&sources, &spec, &params.cost, params.vcc.extent);
    Ok(FrameLayers {
        field,
        static_layer,
        dynamic_layer,
    })
}

pub fn evaluate_frame(
    trace: &ScenarioTrace,
    i: usize,
    steering: f64,
    params: &EngineParams,
) -> Result<FrameRisk> {
    let layers = frame_layers(trace, i, steering, params)?;
    let drf = evaluate_risk(&layers.field, &layers.static_layer)?;
    let avor = if layers.dynamic_layer.max_value() == 0.0 {
        drf
    } else {
        let stack = compose_costmap(&layers.static_layer, &layers.dynamic_layer)?;
        evaluate_risk(&layers.field, &stack.composed)?
    };
    Ok(FrameRisk { drf, avor })
}

/// Run the requested models over every frame of `trace`. Frames are
/// evaluated in parallel; output stays in time order.
pub fn run_scenario(
    trace: &ScenarioTrace,
    models: &[Model],
    params: &EngineParams,
) -> Result<Vec<RiskTrace>> {
    trace.validate()?;
    params.validate()?;
    let steering = ego_steering(trace, params.steering, params.drf.wheelbase);
    let frames: Vec<FrameRisk> = (0..trace.len())
        .into_par_iter()
        .map(|i| evaluate_frame(trace, i, steering[i], params))
        .collect::<Result<_>>()?;

    let mut models = models.to_vec();
    models.sort();
    models.dedup();
    Ok(models
        .into_iter()
        .map(|model| RiskTrace {
            model,
            scenario_id: trace.id.clone(),
            population: trace.population,
            t: trace.times(),
            value: frames
                .iter()
                .map(|f| match model {
                    Model::Drf => f.drf,
                    Model::Avor => f.avor,
                })
                .collect(),
        })
        .collect())
}

/// Write risk traces as CSV rows `t,model,raw,normalized,phase`.
/// `normalized[k]` pairs with `traces[k]`; a missing series leaves the
/// column empty, as does a missing segmentation for `phase`.
pub fn write_risk_csv<W: Write>(
    mut w: W,
    traces: &[RiskTrace],
    normalized: &[Option<Vec<f64>>],
    seg: Option<&PhaseSegmentation>,
) -> std::io::Result<()> {
    writeln!(w, "t,model,raw,normalized,phase")?;
    for (k, tr) in traces.iter().enumerate() {
        let norm = normalized.get(k).and_then(Option::as_ref);
        for (j, (t, v)) in tr.t.iter().zip(&tr.value).enumerate() {
            let n = norm.map(|n| n[j].to_string()).unwrap_or_default();
            let phase = seg
                .and_then(|s| s.phase_at(*t))
                .map(Phase::as_str)
                .unwrap_or("");
            writeln!(w, "{t},{},{v},{n},{phase}", tr.model)?;
        }
    }
    Ok(())
}
