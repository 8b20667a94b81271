//! Helpers and independent oracles shared by the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use avor_core::grid::GridField;
use avor_core::metrics::{RatingSample, RatingTrace};
use avor_core::scenario::{Population, RiskLabel, RoadGeometry, ScenarioTrace, VehicleState};

pub fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/scenarios")
        .join(name)
}

pub fn state(t: f64, x: f64, y: f64, v_lon: f64, v_lat: f64) -> VehicleState {
    VehicleState {
        t,
        x,
        y,
        heading: v_lat.atan2(v_lon),
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
        road_length: 2000.0,
        static_objects: vec![],
    }
}

/// Ego at 20 m/s on the lane centre and a cut-in actor `gap0` metres ahead
/// (centre to centre) starting at lateral offset `y0`. Lateral positions
/// integrate `v_lat(t)` with the trapezoid rule.
pub fn synthetic_cutin(
    n: usize,
    dt: f64,
    y0: f64,
    gap0: f64,
    v_lat: impl Fn(f64) -> f64,
) -> ScenarioTrace {
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
        cut.push(state(t, 20.0 * t + gap0, y, 19.0, vy));
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

/// Smooth cut-in from the left lane centre into the ego lane.
pub fn smooth_cutin(n: usize) -> ScenarioTrace {
    synthetic_cutin(n, 0.1, 3.7, 14.0, |t| {
        if (2.0..6.0).contains(&t) {
            -1.4 * (std::f64::consts::PI * (t - 2.0) / 4.0).sin().powi(2)
        } else {
            0.0
        }
    })
}

/// Plain double loop over columns then rows, no compensation.
pub fn naive_risk(field: &GridField, cost: &GridField) -> f64 {
    let spec = *field.spec();
    let mut acc = 0.0;
    for ix in 0..spec.nx {
        for iy in 0..spec.ny {
            acc += field.get(ix, iy) * cost.get(ix, iy);
        }
    }
    acc * spec.res * spec.res
}

/// Intersection of `p + t*d` and `q + u*e` by Gaussian elimination with
/// partial pivoting on the 2x2 system `[d -e] [t u]^T = q - p`.
pub fn ray_intersection(p: (f64, f64), d: (f64, f64), q: (f64, f64), e: (f64, f64)) -> Option<(f64, f64, f64, f64)> {
    let mut m = [[d.0, -e.0, q.0 - p.0], [d.1, -e.1, q.1 - p.1]];
    if m[1][0].abs() > m[0][0].abs() {
        m.swap(0, 1);
    }
    if m[0][0].abs() < 1e-14 {
        return None;
    }
    let f = m[1][0] / m[0][0];
    for k in 0..3 {
        m[1][k] -= f * m[0][k];
    }
    if m[1][1].abs() < 1e-14 {
        return None;
    }
    let u = m[1][2] / m[1][1];
    let t = (m[0][2] - m[0][1] * u) / m[0][0];
    Some((p.0 + t * d.0, p.1 + t * d.1, t, u))
}

pub fn rating(rater: &str, scenario: &str, population: Population, t: Vec<f64>, srr: Vec<f64>) -> RatingTrace {
    RatingTrace {
        rater_id: rater.into(),
        scenario_id: scenario.into(),
        population,
        t,
        srr,
    }
}

/// 10 Hz rating over `[0, end]` following `f`.
pub fn rating_from_fn(rater: &str, scenario: &str, population: Population, end: f64, f: impl Fn(f64) -> f64) -> RatingTrace {
    let n = (end / 0.1).round() as usize;
    let t: Vec<f64> = (0..=n).map(|i| i as f64 * 0.1).collect();
    let srr = t.iter().map(|t| f(*t)).collect();
    rating(rater, scenario, population, t, srr)
}

pub fn write_rating(dir: &Path, r: &RatingTrace) {
    let name = format!(
        "{}_{}_{}.json",
        r.scenario_id,
        r.population.as_str().replace('+', "_"),
        r.rater_id
    );
    let text = serde_json::to_string_pretty(&r.to_file()).unwrap();
    std::fs::write(dir.join(name), text).unwrap();
}

/// Ratings cohort for `scenario`: `positives` raters step up by 1.0 half a
/// second into Phase I, the rest wobble by 0.3.
pub fn onset_cohort(scenario: &str, t_i: f64, total: usize, positives: usize) -> Vec<RatingTrace> {
    (0..total)
        .map(|k| {
            let base = 2.0 + 0.1 * (k % 5) as f64;
            let bump = if k < positives { 1.0 } else { 0.3 };
            rating_from_fn(&format!("r{k:02}"), scenario, Population::O, 20.0, move |t| {
                if t >= t_i + 0.5 {
                    base + bump
                } else {
                    base
                }
            })
        })
        .collect()
}

pub fn samples(r: &RatingTrace) -> Vec<RatingSample> {
    r.t.iter()
        .zip(&r.srr)
        .map(|(t, srr)| RatingSample { t: *t, srr: *srr })
        .collect()
}
