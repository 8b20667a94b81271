use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use avor_ffi::*;

fn hrs_path() -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/scenarios/hrs.json");
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = avor_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scenario_round_trip() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(avor_scenario_load(hrs_path().as_ptr(), ptr::null(), &mut s), AvorStatus::Ok);
        assert!(avor_last_error_message().is_null());
        let mut n = 0usize;
        assert_eq!(avor_scenario_frame_count(s, &mut n), AvorStatus::Ok);
        assert_eq!(n, 200);

        let mut ph = AvorPhases::default();
        assert_eq!(avor_scenario_segment(s, ptr::null(), &mut ph), AvorStatus::Ok);
        assert!((ph.t_i_start - 6.0).abs() < 1e-9);
        assert!(ph.t_ii_start > ph.t_i_start && ph.t_iii_start > ph.t_ii_start);

        let mut c = AvorCutIn::default();
        assert_eq!(avor_scenario_characterize(s, ptr::null(), &mut c), AvorStatus::Ok);
        assert!((c.duration - 4.3).abs() < 0.2);
        assert!((c.initial_cutin_distance - 8.0).abs() < 0.4);
        avor_scenario_free(s);
    }
}

#[test]
fn run_matches_core() {
    let core_cfg = avor_core::Config::default();
    let trace = avor_core::cli::load_trace(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/scenarios/hrs.json").as_path(),
        &core_cfg,
    )
    .unwrap()
    .with_population(avor_core::scenario::Population::O);
    let expected = avor_core::engine::run_scenario(
        &trace,
        &[avor_core::engine::Model::Avor],
        &core_cfg.engine_params(),
    )
    .unwrap()
    .remove(0);

    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(avor_config_default(&mut cfg), AvorStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(avor_scenario_load(hrs_path().as_ptr(), cfg, &mut s), AvorStatus::Ok);
        let mut rt = ptr::null_mut();
        assert_eq!(
            avor_run(s, cfg, AVOR_MODEL_AVOR, AVOR_POPULATION_O, &mut rt),
            AvorStatus::Ok
        );
        let n = avor_risk_trace_len(rt);
        assert_eq!(n, expected.value.len());
        let values = std::slice::from_raw_parts(avor_risk_trace_values(rt), n);
        let times = std::slice::from_raw_parts(avor_risk_trace_times(rt), n);
        assert_eq!(values, expected.value.as_slice());
        assert_eq!(times, expected.t.as_slice());

        let mut norm = vec![0.0; n];
        assert_eq!(
            avor_normalize(values.as_ptr(), n, 0.0, 0.0, norm.as_mut_ptr()),
            AvorStatus::Ok
        );
        let lo = norm.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = norm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((lo, hi), (0.0, 10.0));

        avor_risk_trace_free(rt);
        avor_scenario_free(s);
        avor_config_free(cfg);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut s = ptr::null_mut();
        let missing = CString::new("/nonexistent/scenario.json").unwrap();
        assert_eq!(avor_scenario_load(missing.as_ptr(), ptr::null(), &mut s), AvorStatus::Io);
        assert!(last_error().contains("nonexistent"));
        assert!(s.is_null());

        let bad = CString::new("{\"schema\": 3}").unwrap();
        assert_eq!(avor_scenario_parse(bad.as_ptr(), ptr::null(), &mut s), AvorStatus::Parse);

        assert_eq!(
            avor_scenario_load(ptr::null(), ptr::null(), &mut s),
            AvorStatus::NullPointer
        );
        let invalid = [0xffu8, 0xfe, 0];
        assert_eq!(
            avor_scenario_load(invalid.as_ptr().cast(), ptr::null(), &mut s),
            AvorStatus::InvalidUtf8
        );

        let mut cfg = ptr::null_mut();
        let toml = CString::new("[drf]\nt_la = -1.0\n").unwrap();
        assert_eq!(avor_config_from_toml(toml.as_ptr(), &mut cfg), AvorStatus::Invalid);
        let toml = CString::new("[drf]\nbogus = 1\n").unwrap();
        assert_eq!(avor_config_from_toml(toml.as_ptr(), &mut cfg), AvorStatus::Parse);
        assert!(last_error().contains("drf"));

        let flat = [3.0; 4];
        let mut out = [0.0; 4];
        assert_eq!(
            avor_normalize(flat.as_ptr(), 4, 0.0, 1.0, out.as_mut_ptr()),
            AvorStatus::Degenerate
        );

        let mut scen = ptr::null_mut();
        assert_eq!(avor_scenario_load(hrs_path().as_ptr(), ptr::null(), &mut scen), AvorStatus::Ok);
        let mut rt = ptr::null_mut();
        assert_eq!(avor_run(scen, ptr::null(), 7, AVOR_POPULATION_O, &mut rt), AvorStatus::Invalid);
        assert_eq!(avor_run(scen, ptr::null(), AVOR_MODEL_DRF, 9, &mut rt), AvorStatus::Invalid);
        assert!(rt.is_null());
        avor_scenario_free(scen);

        // Freeing NULL is a no-op.
        avor_scenario_free(ptr::null_mut());
        avor_config_free(ptr::null_mut());
        avor_risk_trace_free(ptr::null_mut());
        assert_eq!(avor_risk_trace_len(ptr::null()), 0);
    }
}

#[test]
fn vcc_through_abi() {
    let ego = AvorVehicle {
        x: 0.0,
        y: 0.0,
        heading: 0.0,
        v_lon: 20.0,
        v_lat: 0.0,
        length: 4.8,
        width: 1.9,
    };
    let cut = AvorVehicle {
        x: 10.0,
        y: 3.0,
        heading: 0.0,
        v_lon: 20.0,
        v_lat: -1.0,
        ..ego
    };
    let mut v = AvorVcc::default();
    unsafe {
        assert_eq!(avor_compute_vcc(&ego, &cut, 0.2, &mut v), AvorStatus::Ok);
        assert_eq!(v.valid, 1);
        assert!((v.y).abs() < 1e-9);
        assert!((v.tta - 3.0).abs() < 1e-9);

        let away = AvorVehicle { v_lat: 1.0, ..cut };
        assert_eq!(avor_compute_vcc(&ego, &away, 0.2, &mut v), AvorStatus::Ok);
        assert_eq!(v.valid, 0);
        assert_eq!(
            avor_compute_vcc(ptr::null(), &cut, 0.2, &mut v),
            AvorStatus::NullPointer
        );
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps/
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header() {
    let lib = target_dir().join("libavor_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "avor.h"

int main(int argc, char **argv) {
    AvorScenario *s = NULL;
    AvorRiskTrace *t = NULL;
    AvorCutIn c;
    if (avor_scenario_load(argv[1], NULL, &s) != AVOR_STATUS_OK) return 10;
    if (avor_scenario_characterize(s, NULL, &c) != AVOR_STATUS_OK) return 11;
    if (avor_run(s, NULL, AVOR_MODEL_DRF, AVOR_POPULATION_O, &t) != AVOR_STATUS_OK) return 12;
    printf("%zu %.3f %.3f\n", avor_risk_trace_len(t), c.duration, c.initial_cutin_distance);
    avor_risk_trace_free(t);
    avor_scenario_free(s);
    if (avor_scenario_load("/nonexistent.json", NULL, &s) != AVOR_STATUS_IO) return 13;
    if (avor_last_error_message() == NULL) return 14;
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).arg(hrs_path().to_str().unwrap()).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "200 4.300 8.000");
}
