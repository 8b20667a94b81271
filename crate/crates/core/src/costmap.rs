//! Cost maps: the static scene layer, the virtual cut-in collision (VCC)
//! point and the dynamic layer built from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bounds_of, interval_overlap, polygon_contains, OrientedRect, Vec2};
use crate::grid::{ensure_same_spec, GridField, GridSpec};
use crate::scenario::{
    fully_in_ego_lane, ObjectClass, Population, RoadGeometry, ScenarioTrace, StaticObject,
    VehicleState,
};

/// Default lateral speed below which no VCC is produced (m/s).
pub const DEFAULT_V_LAT_MIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    /// Cost of a vehicle footprint, also the dynamic baseline `k`.
    pub cost_car: f64,
    pub cost_offroad: f64,
    pub cost_lane_marking: f64,
    pub cost_building: f64,
    pub cost_tree: f64,
    /// Painted width of a lane marking (m).
    pub lane_marking_width: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            cost_car: 10_000.0,
            cost_offroad: 2_000.0,
            cost_lane_marking: 500.0,
            cost_building: 10_000.0,
            cost_tree: 10_000.0,
            lane_marking_width: 0.15,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("cost_car", self.cost_car),
            ("cost_offroad", self.cost_offroad),
            ("cost_lane_marking", self.cost_lane_marking),
            ("cost_building", self.cost_building),
            ("cost_tree", self.cost_tree),
            ("lane_marking_width", self.lane_marking_width),
        ];
        for (name, v) in all {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("cost.{name} must be >= 0, got {v}")));
            }
        }
        if self.cost_car <= self.cost_lane_marking {
            return Err(Error::Config(
                "cost.cost_car must exceed cost.cost_lane_marking".into(),
            ));
        }
        Ok(())
    }

    pub fn class_cost(&self, class: ObjectClass) -> f64 {
        match class {
            ObjectClass::Car | ObjectClass::Truck => self.cost_car,
            ObjectClass::Building => self.cost_building,
            ObjectClass::Tree => self.cost_tree,
            ObjectClass::Barrier => self.cost_offroad,
        }
    }
}

/// How much of the grid the dynamic cost of one VCC occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VccExtent {
    /// Only the cell containing the VCC.
    Cell,
    /// A virtual copy of the cut-in footprint centred on the VCC.
    #[default]
    Vehicle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VccParams {
    pub v_lat_min: f64,
    pub extent: VccExtent,
}

impl Default for VccParams {
    fn default() -> Self {
        Self {
            v_lat_min: DEFAULT_V_LAT_MIN,
            extent: VccExtent::Vehicle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VccPoint {
    pub x: f64,
    pub y: f64,
    pub d_vcc: f64,
    pub tta: f64,
    pub valid: bool,
}

impl VccPoint {
    pub const INVALID: VccPoint = VccPoint {
        x: 0.0,
        y: 0.0,
        d_vcc: 0.0,
        tta: 0.0,
        valid: false,
    };

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Forward intersection of the rays `a + t*da` and `b + u*db` (t, u >= 0).
/// Returns `(point, t, u)`, or `None` for parallel or backward geometry.
pub fn vcc_from_rays(a: Vec2, da: Vec2, b: Vec2, db: Vec2) -> Option<(Vec2, f64, f64)> {
    let denom = da.cross(db);
    let scale = da.norm() * db.norm();
    if scale == 0.0 || denom.abs() <= 1e-12 * scale {
        return None;
    }
    let r = b - a;
    let t = r.cross(db) / denom;
    let u = r.cross(da) / denom;
    if t < 0.0 || u < 0.0 {
        return None;
    }
    Some((a + da.scale(t), t, u))
}

pub fn compute_vcc(ego: &VehicleState, cutin: &VehicleState) -> VccPoint {
    compute_vcc_with(ego, cutin, DEFAULT_V_LAT_MIN)
}

pub fn compute_vcc_with(ego: &VehicleState, cutin: &VehicleState, v_lat_min: f64) -> VccPoint {
    let v = cutin.v_lat;
    if !(v.abs() >= v_lat_min) || v == 0.0 {
        return VccPoint::INVALID;
    }
    // Lateral motion must point at the ego's lateral position.
    if (ego.y - cutin.y) * v <= 0.0 {
        return VccPoint::INVALID;
    }
    let da = Vec2::from_angle(ego.heading);
    let db = Vec2::new(0.0, v.signum());
    match vcc_from_rays(ego.position(), da, cutin.position(), db) {
        Some((p, _, u)) if u > 0.0 => VccPoint {
            x: p.x,
            y: p.y,
            d_vcc: u,
            tta: u / v.abs(),
            valid: true,
        },
        _ => VccPoint::INVALID,
    }
}

/// Inputs of the static layer for one frame: the vehicles and static
/// objects to rasterize, already filtered for the population level.
#[derive(Debug, Clone, Default)]
pub struct StaticScene<'a> {
    pub vehicles: Vec<OrientedRect>,
    pub objects: Vec<&'a StaticObject>,
}

impl<'a> StaticScene<'a> {
    /// Scene seen at frame `i` of `trace` at the given population level.
    /// The ego vehicle itself is never part of the cost map.
    pub fn from_trace(trace: &'a ScenarioTrace, i: usize, population: Population) -> Self {
        let vehicles = trace
            .visible_actor_ids(population)
            .into_iter()
            .map(|id| trace.actors[id][i].footprint())
            .collect();
        Self {
            vehicles,
            objects: trace.visible_static_objects(population),
        }
    }
}

/// Static layer from an explicit actor list; `population` filters the
/// road's static objects.
pub fn build_static_costmap(
    road: &RoadGeometry,
    actors: &[VehicleState],
    population: Population,
    spec: &GridSpec,
    params: &CostParams,
) -> Result<GridField> {
    let objects: Vec<&StaticObject> = road
        .static_objects
        .iter()
        .filter(|o| {
            if o.class.is_furniture() {
                population.includes_furniture()
            } else {
                population.includes_all_actors()
            }
        })
        .collect();
    let scene = StaticScene {
        vehicles: actors.iter().map(VehicleState::footprint).collect(),
        objects,
    };
    build_static_layer(road, &scene, spec, params)
}

pub fn build_static_layer(
    road: &RoadGeometry,
    scene: &StaticScene<'_>,
    spec: &GridSpec,
    params: &CostParams,
) -> Result<GridField> {
    spec.validate()?;
    let mut field = GridField::zeros(*spec);
    let res = spec.res;

    // Road surface: off-road rows and lane-marking bands depend on y only.
    let (road_lo, road_hi) = road.road_bounds();
    let boundaries = road.lane_boundaries();
    let half_mark = 0.5 * params.lane_marking_width;
    for iy in 0..spec.ny {
        let yc = spec.origin_y + iy as f64 * res;
        let row_cost = if yc < road_lo || yc > road_hi {
            params.cost_offroad
        } else {
            let covered: f64 = boundaries
                .iter()
                .map(|b| {
                    interval_overlap(yc - 0.5 * res, yc + 0.5 * res, b - half_mark, b + half_mark)
                })
                .sum();
            params.cost_lane_marking * (covered / res).min(1.0)
        };
        if row_cost > 0.0 {
            for ix in 0..spec.nx {
                field.raise(ix, iy, row_cost);
            }
        }
    }

    for obj in &scene.objects {
        if obj.footprint.len() < 3 {
            continue;
        }
        let (lo, hi) = bounds_of(&obj.footprint);
        let cost = params.class_cost(obj.class);
        rasterize(&mut field, lo, hi, cost, |p| polygon_contains(&obj.footprint, p));
    }
    for rect in &scene.vehicles {
        let (lo, hi) = rect.bounds();
        rasterize(&mut field, lo, hi, params.cost_car, |p| rect.contains(p));
    }
    Ok(field)
}

/// Sub-samples per cell side when a cell straddles a footprint edge.
const COVERAGE_SUBSAMPLES: usize = 16;

/// Raise every cell overlapping the shape to `cost` times the fraction of
/// the cell it covers. Cells whose four corners are inside count as fully
/// covered; the others are sub-sampled.
fn rasterize(field: &mut GridField, lo: Vec2, hi: Vec2, cost: f64, inside: impl Fn(Vec2) -> bool) {
    let spec = *field.spec();
    let h = 0.5 * spec.res;
    let pad = Vec2::new(h, h);
    let Some(((ix0, ix1), (iy0, iy1))) = spec.cell_range(lo - pad, hi + pad) else {
        return;
    };
    let n = COVERAGE_SUBSAMPLES;
    let step = spec.res / n as f64;
    for iy in iy0..=iy1 {
        for ix in ix0..=ix1 {
            let c = spec.center(ix, iy);
            let corners = [(-h, -h), (h, -h), (h, h), (-h, h)];
            let fraction = if corners
                .iter()
                .all(|(dx, dy)| inside(Vec2::new(c.x + dx, c.y + dy)))
            {
                1.0
            } else {
                let mut hits = 0usize;
                for sy in 0..n {
                    let y = c.y - h + (sy as f64 + 0.5) * step;
                    for sx in 0..n {
                        let x = c.x - h + (sx as f64 + 0.5) * step;
                        if inside(Vec2::new(x, y)) {
                            hits += 1;
                        }
                    }
                }
                hits as f64 / (n * n) as f64
            };
            if fraction > 0.0 {
                field.raise(ix, iy, cost * fraction);
            }
        }
    }
}

/// One dynamic cost source: a VCC plus the footprint of the actor that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicSource {
    pub vcc: VccPoint,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

/// Single-cell dynamic layer: the cell containing the VCC gets `k / TTA`.
pub fn build_dynamic_costmap(vcc: &VccPoint, spec: &GridSpec, params: &CostParams) -> GridField {
    let mut field = GridField::zeros(*spec);
    if let Some((ix, iy)) = valid_cell(vcc, spec) {
        field.set(ix, iy, params.cost_car / vcc.tta);
    }
    field
}

/// Dynamic layer for several sources; overlapping sources resolve by max.
pub fn build_dynamic_layer(
    sources: &[DynamicSource],
    spec: &GridSpec,
    params: &CostParams,
    extent: VccExtent,
) -> GridField {
    let mut field = GridField::zeros(*spec);
    for src in sources {
        let vcc = &src.vcc;
        if !(vcc.valid && vcc.tta > 0.0) {
            continue;
        }
        let cost = params.cost_car / vcc.tta;
        if let Some((ix, iy)) = valid_cell(vcc, spec) {
            field.raise(ix, iy, cost);
        }
        if extent == VccExtent::Vehicle {
            let rect = OrientedRect {
                center: vcc.position(),
                heading: src.heading,
                length: src.length,
                width: src.width,
            };
            let (lo, hi) = rect.bounds();
            rasterize(&mut field, lo, hi, cost, |p| rect.contains(p));
        }
    }
    field
}

fn valid_cell(vcc: &VccPoint, spec: &GridSpec) -> Option<(usize, usize)> {
    if !(vcc.valid && vcc.tta > 0.0) {
        return None;
    }
    spec.cell_of(vcc.position())
}

/// Dynamic sources at frame `i`: the cut-in actor's VCC while its footprint
/// is not yet fully inside the ego lane.
pub fn dynamic_sources(trace: &ScenarioTrace, i: usize, params: &VccParams) -> Vec<DynamicSource> {
    let cut = &trace.cutin()[i];
    if fully_in_ego_lane(&trace.road, cut) {
        return Vec::new();
    }
    let vcc = compute_vcc_with(&trace.ego[i], cut, params.v_lat_min);
    if !vcc.valid {
        return Vec::new();
    }
    vec![DynamicSource {
        vcc,
        heading: cut.heading,
        length: cut.length,
        width: cut.width,
    }]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostMapStack {
    pub static_layer: GridField,
    pub dynamic_layer: GridField,
    pub composed: GridField,
}

pub fn compose_costmap(static_layer: &GridField, dynamic_layer: &GridField) -> Result<CostMapStack> {
    ensure_same_spec(static_layer, dynamic_layer)?;
    let mut composed = static_layer.clone();
    for (c, d) in composed.values_mut().iter_mut().zip(dynamic_layer.values()) {
        *c += *d;
    }
    Ok(CostMapStack {
        static_layer: static_layer.clone(),
        dynamic_layer: dynamic_layer.clone(),
        composed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridConfig;
    use crate::scenario::testutil::{road, state};
    use proptest::prelude::*;

    fn ego_grid() -> GridSpec {
        GridSpec::ego_centered(Vec2::new(0.0, 0.0), &GridConfig::default()).unwrap()
    }

    fn value_at(f: &GridField, x: f64, y: f64) -> f64 {
        let (ix, iy) = f.spec().cell_of(Vec2::new(x, y)).unwrap();
        f.get(ix, iy)
    }

    #[test]
    fn empty_road_costs() {
        let p = CostParams::default();
        let f = build_static_costmap(&road(), &[], Population::A, &ego_grid(), &p).unwrap();
        assert_eq!(value_at(&f, 20.0, 0.1), 0.0);
        assert_eq!(value_at(&f, 20.0, 8.0), p.cost_offroad);
        assert_eq!(value_at(&f, 20.0, -8.0), p.cost_offroad);
        assert!(value_at(&f, 20.0, 1.85) > 0.0);
        assert!(f.max_value() <= p.cost_car);
    }

    #[test]
    fn lane_marking_mass_is_alignment_independent() {
        let p = CostParams::default();
        for shift in [0.0, 0.03, 0.11, 0.2] {
            let spec = GridSpec::new(0.0, -3.0 + shift, 0.25, 4, 24).unwrap();
            let f = build_static_costmap(&road(), &[], Population::O, &spec, &p).unwrap();
            let col: f64 = (0..spec.ny).map(|iy| f.get(0, iy)).sum::<f64>() * spec.res;
            // Both markings at y = +-1.85 fall inside the rows.
            let expected = p.cost_lane_marking * p.lane_marking_width * 2.0;
            assert!((col - expected).abs() < 1e-9, "shift {shift}: {col}");
        }
    }

    #[test]
    fn vehicle_footprint_gets_car_cost() {
        let p = CostParams::default();
        let cut = state(0.0, 20.0, 3.7, 20.0, 0.0);
        let f = build_static_costmap(&road(), &[cut], Population::O, &ego_grid(), &p).unwrap();
        assert_eq!(value_at(&f, 20.0, 3.7), p.cost_car);
        assert_eq!(value_at(&f, 22.1, 4.3), p.cost_car);
        assert_eq!(value_at(&f, 23.0, 3.7), 0.0);
        // The front edge at x = 22.4 covers 60% of the cell [22.25, 22.5);
        // sub-sampling resolves that to 1/16 of a cell.
        let edge = value_at(&f, 22.3, 3.7);
        assert!((edge - 0.6 * p.cost_car).abs() <= p.cost_car / 16.0, "{edge}");
    }

    #[test]
    fn footprint_mass_matches_area() {
        let p = CostParams {
            cost_lane_marking: 0.0,
            cost_offroad: 0.0,
            ..CostParams::default()
        };
        let spec = ego_grid();
        for (x, y, h) in [(20.0, 0.3, 0.0), (31.17, -0.41, 0.2), (15.03, 0.77, -0.6)] {
            let mut cut = state(0.0, x, y, 20.0, 0.0);
            cut.heading = h;
            let f = build_static_costmap(&road(), &[cut], Population::O, &spec, &p).unwrap();
            let area = f.values().iter().sum::<f64>() * spec.res * spec.res / p.cost_car;
            assert!((area - 4.8 * 1.9).abs() < 0.02 * 4.8 * 1.9, "{area}");
        }
    }

    #[test]
    fn furniture_beyond_grid_changes_nothing() {
        let mut r = road();
        r.static_objects.push(StaticObject {
            class: ObjectClass::Building,
            footprint: vec![
                Vec2::new(10.0, 15.0),
                Vec2::new(30.0, 15.0),
                Vec2::new(30.0, 25.0),
                Vec2::new(10.0, 25.0),
            ],
        });
        let p = CostParams::default();
        let a = build_static_costmap(&r, &[], Population::A, &ego_grid(), &p).unwrap();
        let ar = build_static_costmap(&r, &[], Population::AR, &ego_grid(), &p).unwrap();
        assert_eq!(a, ar);

        r.static_objects[0].footprint.iter_mut().for_each(|v| v.y -= 7.0);
        let ar = build_static_costmap(&r, &[], Population::AR, &ego_grid(), &p).unwrap();
        assert_eq!(value_at(&ar, 20.0, 9.0), p.cost_building);
    }

    #[test]
    fn population_levels_are_monotone() {
        let mut r = road();
        r.static_objects.push(StaticObject {
            class: ObjectClass::Tree,
            footprint: vec![
                Vec2::new(40.0, 7.0),
                Vec2::new(42.0, 7.0),
                Vec2::new(41.0, 9.0),
            ],
        });
        r.static_objects.push(StaticObject {
            class: ObjectClass::Truck,
            footprint: vec![
                Vec2::new(60.0, -5.0),
                Vec2::new(70.0, -5.0),
                Vec2::new(70.0, -2.5),
                Vec2::new(60.0, -2.5),
            ],
        });
        let p = CostParams::default();
        let spec = ego_grid();
        let o = build_static_costmap(&r, &[], Population::O, &spec, &p).unwrap();
        let a = build_static_costmap(&r, &[], Population::A, &spec, &p).unwrap();
        let ar = build_static_costmap(&r, &[], Population::AR, &spec, &p).unwrap();
        for i in 0..spec.len() {
            assert!(o.values()[i] <= a.values()[i] && a.values()[i] <= ar.values()[i]);
        }
        assert!(a != o && ar != a);
    }

    #[test]
    fn perpendicular_vcc() {
        let ego = state(0.0, 0.0, 0.0, 20.0, 0.0);
        let cut = state(0.0, 10.0, 3.5, 20.0, -0.7);
        let v = compute_vcc(&ego, &cut);
        assert!(v.valid);
        assert!((v.x - 10.0).abs() < 1e-12 && v.y.abs() < 1e-12);
        assert!((v.d_vcc - 3.5).abs() < 1e-12);
        assert!((v.tta - 5.0).abs() < 1e-12);
    }

    #[test]
    fn vcc_validity_gates() {
        let ego = state(0.0, 0.0, 0.0, 20.0, 0.0);
        assert!(!compute_vcc(&ego, &state(0.0, 10.0, 3.5, 20.0, 0.7)).valid);
        assert!(!compute_vcc(&ego, &state(0.0, 10.0, 3.5, 20.0, -0.04)).valid);
        assert!(!compute_vcc(&ego, &state(0.0, -10.0, 3.5, 20.0, -0.7)).valid);
        assert!(compute_vcc(&ego, &state(0.0, 10.0, -3.5, 20.0, 0.7)).valid);
        assert!(vcc_from_rays(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(2.0, 0.0)
        )
        .is_none());
    }

    #[test]
    fn dynamic_single_cell() {
        let p = CostParams::default();
        let spec = ego_grid();
        let invalid = build_dynamic_costmap(&VccPoint::INVALID, &spec, &p);
        assert!(invalid.values().iter().all(|v| *v == 0.0));

        let mut v = VccPoint {
            x: 10.0,
            y: 0.0,
            d_vcc: 3.5,
            tta: 5.0,
            valid: true,
        };
        let f = build_dynamic_costmap(&v, &spec, &p);
        assert_eq!(value_at(&f, 10.0, 0.0), p.cost_car / 5.0);
        assert_eq!(f.values().iter().filter(|x| **x > 0.0).count(), 1);
        v.tta = 2.5;
        let g = build_dynamic_costmap(&v, &spec, &p);
        assert_eq!(value_at(&g, 10.0, 0.0), 2.0 * value_at(&f, 10.0, 0.0));

        v.x = 500.0;
        assert_eq!(build_dynamic_costmap(&v, &spec, &p).max_value(), 0.0);
    }

    #[test]
    fn vehicle_extent_covers_footprint() {
        let p = CostParams::default();
        let spec = ego_grid();
        let src = DynamicSource {
            vcc: VccPoint {
                x: 20.0,
                y: 0.0,
                d_vcc: 2.0,
                tta: 4.0,
                valid: true,
            },
            heading: 0.0,
            length: 4.8,
            width: 1.9,
        };
        let f = build_dynamic_layer(&[src], &spec, &p, VccExtent::Vehicle);
        assert_eq!(value_at(&f, 22.2, 0.5), 2500.0);
        assert!(value_at(&f, 22.3, 0.0) > 0.0 && value_at(&f, 22.3, 0.0) < 2500.0);
        assert_eq!(value_at(&f, 23.0, 0.0), 0.0);
        let cells = f.values().iter().filter(|v| **v > 0.0).count();
        assert!(cells > 100 && cells < 200, "{cells}");
        let single = build_dynamic_layer(&[src], &spec, &p, VccExtent::Cell);
        assert_eq!(single, build_dynamic_costmap(&src.vcc, &spec, &p));
    }

    #[test]
    fn compose_is_exact_addition() {
        let spec = GridSpec::new(0.0, 0.0, 1.0, 3, 3).unwrap();
        let mut s = GridField::zeros(spec);
        s.set(0, 0, 7.0);
        let mut d = GridField::zeros(spec);
        d.set(2, 2, 3.0);
        let stack = compose_costmap(&s, &d).unwrap();
        assert_eq!(stack.composed.get(0, 0), 7.0);
        assert_eq!(stack.composed.get(2, 2), 3.0);
        let zero = compose_costmap(&s, &GridField::zeros(spec)).unwrap();
        assert_eq!(zero.composed, s);

        let other = GridField::zeros(GridSpec::new(0.0, 0.0, 0.5, 3, 3).unwrap());
        assert!(matches!(compose_costmap(&s, &other), Err(Error::GridMismatch)));
    }

    proptest! {
        #[test]
        fn composed_minus_static_is_dynamic(vals in prop::collection::vec((0.0f64..1e4, 0.0f64..1e4), 16)) {
            let spec = GridSpec::new(0.0, 0.0, 1.0, 4, 4).unwrap();
            let s = GridField::from_values(spec, vals.iter().map(|v| v.0).collect()).unwrap();
            let d = GridField::from_values(spec, vals.iter().map(|v| v.1).collect()).unwrap();
            let stack = compose_costmap(&s, &d).unwrap();
            for i in 0..16 {
                prop_assert_eq!(stack.composed.values()[i], s.values()[i] + d.values()[i]);
            }
        }

        #[test]
        fn dynamic_cost_monotone(
            y0 in 1.0f64..5.0, v1 in 0.06f64..2.0, dv in 0.001f64..1.0, dd in 0.01f64..2.0,
        ) {
            let p = CostParams::default();
            let spec = ego_grid();
            let ego = state(0.0, 0.0, 0.0, 20.0, 0.0);
            let cost = |y: f64, v: f64| {
                let vcc = compute_vcc(&ego, &state(0.0, 15.0, y, 20.0, -v));
                build_dynamic_costmap(&vcc, &spec, &p).max_value()
            };
            prop_assert!(cost(y0, v1 + dv) > cost(y0, v1));
            prop_assert!(cost(y0 + dd, v1) < cost(y0, v1));
        }

        #[test]
        fn vcc_is_frame_equivariant(
            ex in -50.0f64..50.0, ey in -5.0f64..5.0, eh in -0.5f64..0.5,
            cx in 5.0f64..60.0, cy in 1.0f64..6.0, side in prop::bool::ANY,
            rot in -3.1f64..3.1, tx in -100.0f64..100.0, ty in -100.0f64..100.0,
        ) {
            let a = Vec2::new(ex, ey);
            let da = Vec2::from_angle(eh);
            let b = a + Vec2::new(cx, if side { cy } else { -cy });
            let db = Vec2::new(0.0, if side { -1.0 } else { 1.0 });
            let t = Vec2::new(tx, ty);
            let base = vcc_from_rays(a, da, b, db);
            let moved = vcc_from_rays(a.rotate(rot) + t, da.rotate(rot), b.rotate(rot) + t, db.rotate(rot));
            match (base, moved) {
                (Some((p, _, u)), Some((q, _, u2))) => {
                    prop_assert!((p.rotate(rot) + t - q).norm() < 1e-9);
                    prop_assert!((u - u2).abs() < 1e-9);
                }
                (None, None) => {}
                other => prop_assert!(false, "validity changed: {other:?}"),
            }
        }
    }
}
