mod common;

use avor_core::scenario::{
    characterize_cutin, load_scenario, parse_scenario, scenario_to_json, segment_phases,
    PhaseParams, Population, RiskLabel,
};
use avor_core::Error;
use common::*;

#[test]
fn shipped_scenarios_match_table_targets() {
    // (file, duration, mean |v_lat|, max |v_lat|, initial gap)
    let targets = [
        ("hrs.json", 4.3, 0.757, 1.275, 8.0),
        ("lrs.json", 4.9, 0.3049, 0.7419, 12.8),
    ];
    for (name, dur, mean, max, gap) in targets {
        let trace = load_scenario(scenario_path(name)).unwrap();
        let seg = segment_phases(&trace, &PhaseParams::default()).unwrap();
        let c = characterize_cutin(&trace, &seg).unwrap();
        let within = |got: f64, want: f64| (got - want).abs() <= 0.05 * want;
        assert!(within(c.duration, dur) && (c.duration - dur).abs() <= 0.2, "{name} {c:?}");
        assert!(within(c.v_lat_avg, mean), "{name} {c:?}");
        assert!(within(c.v_lat_max, max), "{name} {c:?}");
        assert!(within(c.initial_cutin_distance, gap), "{name} {c:?}");
        assert!(c.a_lat_avg.abs() < 0.05, "{name} {c:?}");
    }
}

#[test]
fn shipped_metadata() {
    let hrs = load_scenario(scenario_path("hrs.json")).unwrap();
    assert_eq!(hrs.id, "hrs");
    assert_eq!(hrs.risk_label, RiskLabel::Hrs);
    assert_eq!(hrs.population, Population::AR);
    assert_eq!(hrs.len(), 200);
    assert_eq!(hrs.cutin_actor, "cutin");
    // Cut-in comes from the left in HRS and from the right in LRS.
    assert!(hrs.cutin()[0].y > 1.85);
    let lrs = load_scenario(scenario_path("lrs.json")).unwrap();
    assert!(lrs.cutin()[0].y < -1.85);
    assert_eq!((lrs.cutin()[0].length, lrs.cutin()[0].width), (3.6, 1.4));
}

#[test]
fn json_round_trip_is_lossless() {
    let original = smooth_cutin(50);
    let text = scenario_to_json(&original).unwrap();
    let back = parse_scenario(&text, 5).unwrap();
    assert_eq!(back.ego.len(), original.ego.len());
    for (a, b) in back.cutin().iter().zip(original.cutin()) {
        assert_eq!((a.t, a.x, a.y, a.v_lon, a.v_lat), (b.t, b.x, b.y, b.v_lon, b.v_lat));
    }
    assert_eq!(scenario_to_json(&back).unwrap(), text);

    let shipped = std::fs::read_to_string(scenario_path("lrs.json")).unwrap();
    let trace = parse_scenario(&shipped, 5).unwrap();
    let again = parse_scenario(&scenario_to_json(&trace).unwrap(), 5).unwrap();
    assert_eq!(again.ego, trace.ego);
    assert_eq!(again.actors, trace.actors);
}

fn mutate(f: impl FnOnce(&mut serde_json::Value)) -> String {
    let text = scenario_to_json(&smooth_cutin(20)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    f(&mut v);
    v.to_string()
}

#[test]
fn malformed_files_are_rejected() {
    let text = mutate(|v| v["cutin_actor"] = "ghost".into());
    assert!(matches!(parse_scenario(&text, 5), Err(Error::Reference(_))));

    let text = mutate(|v| v["ego"][3]["t"] = 0.35.into());
    assert!(matches!(parse_scenario(&text, 5), Err(Error::Format(_))));

    let text = mutate(|v| v["surprise"] = 1.into());
    assert!(matches!(parse_scenario(&text, 5), Err(Error::Parse { .. })));

    let text = mutate(|v| v["ego"][2]["x"] = "far".into());
    match parse_scenario(&text, 5) {
        Err(Error::Parse { field, .. }) => assert!(field.contains("ego"), "{field}"),
        other => panic!("{other:?}"),
    }

    let text = mutate(|v| {
        v["ego"].as_array_mut().unwrap().truncate(1);
        for a in v["actors"].as_object_mut().unwrap().values_mut() {
            a.as_array_mut().unwrap().truncate(1);
        }
    });
    assert!(matches!(parse_scenario(&text, 5), Err(Error::TooShort(_))));

    assert!(matches!(
        load_scenario("/definitely/not/here.json"),
        Err(Error::Io { .. })
    ));
}

#[test]
fn velocities_are_derived_when_absent() {
    let text = mutate(|v| {
        for f in v["ego"].as_array_mut().unwrap() {
            let o = f.as_object_mut().unwrap();
            o.remove("v_lon");
            o.remove("v_lat");
        }
    });
    let trace = parse_scenario(&text, 5).unwrap();
    for s in &trace.ego[1..trace.len() - 1] {
        assert!((s.v_lon - 20.0).abs() < 1e-9 && s.v_lat.abs() < 1e-12);
    }
}
