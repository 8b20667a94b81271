//! Regenerates the shipped `hrs.json` and `lrs.json` scenarios.
//!
//! The cut-in actor's lateral speed toward the ego lane follows
//! `v_a + (v_b - v_a) * tau / T + A * sin(pi * tau / T)^q` between
//! initiation and completion. `A` and `q` are solved so the sampled mean
//! and maximum hit the requested values, and the start offset is chosen so
//! the far edge of the footprint enters the ego lane exactly at `T`.
//!
//! Run with `cargo run -p avor-core --example gen_scenarios [out_dir]`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use avor_core::geometry::Vec2;
use avor_core::scenario::{
    characterize_cutin, longitudinal_gap, parse_scenario, segment_phases, time_to_collision,
    Dimensions, FrameFile, ObjectClass, PhaseParams, Population, RiskLabel, RoadFile,
    ScenarioFile, StaticObject, SCENARIO_SCHEMA,
};

const DT: f64 = 0.1;
const N: usize = 200;
const LANE_W: f64 = 3.7;
const T_INIT: f64 = 6.0;
const V_A: f64 = 0.205;
const EGO_L: f64 = 4.8;
const EGO_W: f64 = 1.9;

struct Spec {
    id: &'static str,
    label: RiskLabel,
    /// -1 when the actor comes from the left, +1 from the right.
    toward: f64,
    duration: f64,
    mean: f64,
    max: f64,
    v_b: f64,
    gap: f64,
    cut_len: f64,
    cut_wid: f64,
    ego_speed: Box<dyn Fn(f64) -> f64>,
    cut_speed: Box<dyn Fn(f64) -> f64>,
}

fn t_of(k: usize) -> f64 {
    k as f64 * DT
}

/// Sample mean and max of the profile for given `a` and `q`.
fn profile(spec: &Spec, a: f64, q: f64, tau: f64) -> f64 {
    let u = tau / spec.duration;
    V_A + (spec.v_b - V_A) * u + a * (std::f64::consts::PI * u).sin().max(0.0).powf(q)
}

fn solve_shape(spec: &Spec, k_len: usize) -> (f64, f64) {
    let taus: Vec<f64> = (0..=k_len).map(|k| k as f64 * DT).collect();
    let n = taus.len() as f64;
    let amp_for = |q: f64| {
        let lin = taus.iter().map(|t| profile(spec, 0.0, q, *t)).sum::<f64>() / n;
        let bump = taus
            .iter()
            .map(|t| (std::f64::consts::PI * t / spec.duration).sin().max(0.0).powf(q))
            .sum::<f64>()
            / n;
        (spec.mean - lin) / bump
    };
    let excess = |q: f64| {
        let a = amp_for(q);
        taus.iter()
            .map(|t| profile(spec, a, q, *t))
            .fold(f64::MIN, f64::max)
            - spec.max
    };
    let (mut lo, mut hi) = (0.05, 60.0);
    assert!(excess(lo) < 0.0 && excess(hi) > 0.0, "shape not bracketed for {}", spec.id);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    (amp_for(q), q)
}

fn half_extent(len: f64, wid: f64, heading: f64) -> f64 {
    0.5 * (len * heading.sin().abs() + wid * heading.cos())
}

fn integrate(v: &[f64], x0: f64) -> Vec<f64> {
    let mut x = vec![x0; v.len()];
    for k in 1..v.len() {
        x[k] = x[k - 1] + 0.5 * (v[k] + v[k - 1]) * DT;
    }
    x
}

fn frames(x: &[f64], y: &[f64], vx: &[f64], vy: &[f64]) -> Vec<FrameFile> {
    (0..N)
        .map(|k| FrameFile {
            t: t_of(k),
            x: x[k],
            y: y[k],
            heading: vy[k].atan2(vx[k]),
            v_lon: Some(vx[k]),
            v_lat: Some(vy[k]),
        })
        .collect()
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Vec2> {
    vec![
        Vec2::new(x0, y0),
        Vec2::new(x1, y0),
        Vec2::new(x1, y1),
        Vec2::new(x0, y1),
    ]
}

fn build(spec: &Spec) -> ScenarioFile {
    let i_init = (T_INIT / DT).round() as usize;
    let k_len = (spec.duration / DT).round() as usize;
    let i_full = i_init + k_len;
    let (amp, q) = solve_shape(spec, k_len);

    // Lateral speed toward the ego lane.
    let mut w = vec![0.0; N];
    for (k, wk) in w.iter_mut().enumerate() {
        *wk = if k + 10 < i_init {
            0.0
        } else if k < i_init {
            V_A * (k + 10 - i_init) as f64 / 10.0
        } else if k <= i_full {
            profile(spec, amp, q, t_of(k - i_init))
        } else {
            0.0
        };
    }

    let ego_v: Vec<f64> = (0..N).map(|k| (spec.ego_speed)(t_of(k))).collect();
    let cut_vx: Vec<f64> = (0..N).map(|k| (spec.cut_speed)(t_of(k))).collect();

    // Offset at completion: far edge just inside the lane boundary.
    let heading_full = (spec.toward * w[i_full]).atan2(cut_vx[i_full]);
    let margin = 0.25 * w[i_full] * DT;
    let y_full =
        -spec.toward * (0.5 * LANE_W - half_extent(spec.cut_len, spec.cut_wid, heading_full) - margin);
    // Settle onto the lane centre after completion.
    let tau_d = y_full.abs() / spec.v_b;
    for k in i_full + 1..N {
        w[k] = spec.v_b * (-(t_of(k) - t_of(i_full)) / tau_d).exp();
    }
    let cut_vy: Vec<f64> = w.iter().map(|v| spec.toward * v).collect();
    let y_rel = integrate(&cut_vy, 0.0);
    let cut_y: Vec<f64> = y_rel.iter().map(|y| y - y_rel[i_full] + y_full).collect();

    let ego_x = integrate(&ego_v, 0.0);
    let cut_rel = integrate(&cut_vx, 0.0);
    let cut_x0 = ego_x[i_init] + 0.5 * EGO_L + spec.gap + 0.5 * spec.cut_len - cut_rel[i_init];
    let cut_x: Vec<f64> = cut_rel.iter().map(|x| x + cut_x0).collect();

    let zeros = vec![0.0; N];
    let mut actors = BTreeMap::new();
    actors.insert(
        "cutin".to_string(),
        frames(&cut_x, &cut_y, &cut_vx, &cut_vy),
    );

    // Further road users for population level A.
    let lead_v: Vec<f64> = vec![ego_v[0]; N];
    let lead_x = integrate(&lead_v, 60.0);
    actors.insert(
        "lead".to_string(),
        frames(&lead_x, &vec![0.0; N], &lead_v, &zeros),
    );
    let far_v: Vec<f64> = vec![ego_v[0] + 1.5; N];
    let far_lane = -spec.toward * LANE_W;
    let far_x = integrate(&far_v, 45.0);
    actors.insert(
        "adjacent_ahead".to_string(),
        frames(&far_x, &vec![far_lane; N], &far_v, &zeros),
    );
    let other_v: Vec<f64> = vec![ego_v[0] - 0.5; N];
    let other_x = integrate(&other_v, 25.0);
    actors.insert(
        "other_lane".to_string(),
        frames(&other_x, &vec![spec.toward * LANE_W; N], &other_v, &zeros),
    );

    // Road furniture well outside the lateral grid extent.
    let mut static_objects = Vec::new();
    let road_end = ego_x[N - 1] + 150.0;
    for side in [-1.0, 1.0] {
        static_objects.push(StaticObject {
            class: ObjectClass::Barrier,
            footprint: rect(-50.0, side * 13.0, road_end, side * 13.4),
        });
        let mut x = -20.0;
        while x < road_end {
            static_objects.push(StaticObject {
                class: ObjectClass::Tree,
                footprint: rect(x, side * 15.0, x + 2.0, side * 17.0),
            });
            x += 35.0;
        }
        let mut x = 10.0;
        while x < road_end {
            static_objects.push(StaticObject {
                class: ObjectClass::Building,
                footprint: rect(x, side * 20.0, x + 25.0, side * 35.0),
            });
            x += 80.0;
        }
    }

    let mut dimensions = BTreeMap::new();
    dimensions.insert(
        "ego".to_string(),
        Dimensions {
            length: EGO_L,
            width: EGO_W,
        },
    );
    dimensions.insert(
        "cutin".to_string(),
        Dimensions {
            length: spec.cut_len,
            width: spec.cut_wid,
        },
    );

    ScenarioFile {
        schema: SCENARIO_SCHEMA.to_string(),
        id: spec.id.to_string(),
        dt: DT,
        road: RoadFile {
            lane_count: 3,
            lane_width: LANE_W,
            ego_lane_index: 1,
            road_length: Some(road_end + 50.0),
            static_objects,
        },
        population: Population::AR,
        risk_label: spec.label,
        ego: frames(&ego_x, &zeros, &ego_v, &zeros),
        actors,
        cutin_actor: "cutin".to_string(),
        dimensions,
    }
}

fn check(spec: &Spec, text: &str) {
    let trace = parse_scenario(text, 5).expect("generated scenario parses");
    let seg = segment_phases(&trace, &PhaseParams::default()).expect("segments");
    let c = characterize_cutin(&trace, &seg).expect("characterizes");
    let i3 = trace.index_of(seg.t_iii_start).unwrap();
    let ttc = time_to_collision(&trace.ego[i3], &trace.cutin()[i3]);
    println!(
        "{}: phases {:?}\n  duration {:.3} mean {:.4} max {:.4} a_lat {:.4} gap {:.3} ttc@III {:?}",
        spec.id, seg, c.duration, c.v_lat_avg, c.v_lat_max, c.a_lat_avg, c.initial_cutin_distance, ttc
    );
    let close = |got: f64, want: f64| (got - want).abs() <= 0.02 * want;
    assert!(close(c.duration, spec.duration), "duration {}", c.duration);
    assert!(close(c.v_lat_avg, spec.mean), "mean {}", c.v_lat_avg);
    assert!(close(c.v_lat_max, spec.max), "max {}", c.v_lat_max);
    assert!(close(c.initial_cutin_distance, spec.gap), "gap {}", c.initial_cutin_distance);
    assert!((seg.t_i_start - T_INIT).abs() < 1e-9, "t_I {}", seg.t_i_start);
    assert!(ttc.is_some_and(|v| v < 4.0), "TTC at completion {ttc:?}");
    assert!(seg.t_iii_end - seg.t_iii_start >= 0.5, "phase III too short");
    assert!(seg.t_iii_end < trace.times()[trace.len() - 1]);
    for i in 0..trace.len() {
        let gap = longitudinal_gap(&trace.ego[i], &trace.cutin()[i]);
        assert!(gap > 2.0, "cut-in too close at frame {i}: {gap}");
    }
}

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenarios"));
    std::fs::create_dir_all(&out).unwrap();

    let t3_hrs = T_INIT + 4.3;
    let t3_lrs = T_INIT + 5.0;
    let specs = [
        Spec {
            id: "hrs",
            label: RiskLabel::Hrs,
            toward: -1.0,
            duration: 4.3,
            mean: 0.757,
            max: 1.275,
            v_b: 0.2645,
            gap: 8.0,
            cut_len: 4.8,
            cut_wid: 1.9,
            ego_speed: Box::new(move |t| {
                let tb = t3_hrs - 0.2;
                if t <= tb {
                    25.0
                } else {
                    (25.0 - 2.0 * (t - tb)).max(22.0)
                }
            }),
            cut_speed: Box::new(|t| {
                if t <= T_INIT + 1.0 {
                    26.0
                } else {
                    (26.0 - 1.2 * (t - T_INIT - 1.0)).max(22.0)
                }
            }),
        },
        Spec {
            id: "lrs",
            label: RiskLabel::Lrs,
            toward: 1.0,
            duration: 5.0,
            mean: 0.311,
            max: 0.7419,
            v_b: 0.242,
            gap: 12.8,
            cut_len: 3.6,
            cut_wid: 1.4,
            ego_speed: Box::new(move |t| {
                if t <= t3_lrs {
                    20.0
                } else {
                    (20.0 - 2.0 * (t - t3_lrs)).max(17.0)
                }
            }),
            cut_speed: Box::new(|t| {
                if t <= T_INIT {
                    19.5
                } else {
                    (19.5 - 0.4 * (t - T_INIT)).max(17.0)
                }
            }),
        },
    ];

    for spec in &specs {
        let file = build(spec);
        let text = serde_json::to_string_pretty(&file).unwrap() + "\n";
        check(spec, &text);
        let path = out.join(format!("{}.json", spec.id));
        std::fs::write(&path, text).unwrap();
        println!("  wrote {}", path.display());
    }
}
