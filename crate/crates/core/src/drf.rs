//! Driver's Risk Field: a parabola-height, widening-Gaussian field laid
//! along the ego vehicle's predicted path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::{GridField, GridSpec};
use crate::scenario::VehicleState;

/// Steering angles below this are treated as a straight path (rad).
pub const STRAIGHT_EPS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrfOrigin {
    #[default]
    FrontBumper,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrfParams {
    /// Look-ahead time (s).
    pub t_la: f64,
    /// Parabolic height steepness (1/m^2).
    pub p_height: f64,
    /// Width growth per metre of arc length.
    pub m_width: f64,
    /// Gaussian width at the vehicle (m).
    pub c_width: f64,
    /// Extra width growth per radian of steering.
    pub k_steer: f64,
    pub wheelbase: f64,
    pub origin: DrfOrigin,
}

impl Default for DrfParams {
    fn default() -> Self {
        Self {
            t_la: 3.5,
            p_height: 0.0064,
            m_width: 0.001,
            c_width: 0.5,
            k_steer: 0.2,
            wheelbase: 2.8,
            origin: DrfOrigin::FrontBumper,
        }
    }
}

impl DrfParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_la", self.t_la),
            ("p_height", self.p_height),
            ("m_width", self.m_width),
            ("c_width", self.c_width),
            ("wheelbase", self.wheelbase),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("drf.{name} must be positive, got {v}")));
            }
        }
        if !(self.k_steer >= 0.0 && self.k_steer.is_finite()) {
            return Err(Error::Config(format!(
                "drf.k_steer must be >= 0, got {}",
                self.k_steer
            )));
        }
        Ok(())
    }

    /// Field height at path coordinates `(s, n)` for look-ahead distance
    /// `d_la` and steering angle `delta`.
    pub fn height(&self, s: f64, n: f64, d_la: f64, delta: f64) -> f64 {
        if !(s >= 0.0 && s <= d_la) || d_la <= 0.0 {
            return 0.0;
        }
        let a = self.p_height * (s - d_la) * (s - d_la);
        let sigma = (self.m_width + self.k_steer * delta.abs()) * s + self.c_width;
        a * (-(n * n) / (2.0 * sigma * sigma)).exp()
    }
}

/// Predicted ego path: a ray or a circular arc starting at `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DrfPath {
    Straight { origin: Vec2, dir: Vec2 },
    Arc { origin: Vec2, center: Vec2, radius: f64 },
}

impl DrfPath {
    pub fn new(origin: Vec2, heading: f64, steering: f64, wheelbase: f64) -> Self {
        let dir = Vec2::from_angle(heading);
        if steering.abs() < STRAIGHT_EPS {
            return DrfPath::Straight { origin, dir };
        }
        // Positive radius turns left.
        let radius = wheelbase / steering.tan();
        DrfPath::Arc {
            origin,
            center: origin + dir.perp().scale(radius),
            radius,
        }
    }

    /// Arc length `s` along the path and signed lateral offset `n`
    /// (positive to the left of the direction of travel).
    pub fn frenet(&self, p: Vec2) -> (f64, f64) {
        match *self {
            DrfPath::Straight { origin, dir } => {
                let d = p - origin;
                (d.dot(dir), d.dot(dir.perp()))
            }
            DrfPath::Arc {
                origin,
                center,
                radius,
            } => {
                let a = origin - center;
                let b = p - center;
                let mut phi = a.cross(b).atan2(a.dot(b));
                if radius < 0.0 {
                    phi = -phi;
                }
                let s = radius.abs() * phi;
                let n = radius.signum() * (radius.abs() - b.norm());
                (s, n)
            }
        }
    }
}

/// Point the field is anchored at.
pub fn drf_origin(ego: &VehicleState, params: &DrfParams) -> Vec2 {
    match params.origin {
        DrfOrigin::FrontBumper => ego.front(),
        DrfOrigin::Center => ego.position(),
    }
}

pub fn build_drf(
    ego: &VehicleState,
    steering_angle: f64,
    params: &DrfParams,
    spec: &GridSpec,
) -> Result<GridField> {
    spec.validate()?;
    let origin = drf_origin(ego, params);
    if !spec.contains(origin) {
        return Err(Error::Grid(format!(
            "grid does not cover the DRF origin ({:.2}, {:.2})",
            origin.x, origin.y
        )));
    }
    let d_la = params.t_la * ego.speed();
    if d_la <= 0.0 {
        return Ok(GridField::zeros(*spec));
    }
    let path = DrfPath::new(origin, ego.heading, steering_angle, params.wheelbase);
    Ok(GridField::from_fn(*spec, |p| {
        let (s, n) = path.frenet(p);
        params.height(s, n, d_la, steering_angle)
    }))
}
