//! C ABI over `avor-core`.
//!
//! Objects cross the boundary as opaque handles created by `avor_*_load`
//! style functions and released with the matching `avor_*_free`. Every
//! fallible call returns an [`AvorStatus`]; on failure a message is kept
//! per thread and can be read with [`avor_last_error_message`].
//!
//! Strings passed in must be NUL-terminated UTF-8. Output pointers must be
//! valid for writes. Handles are not thread-safe to free concurrently but
//! may be read from several threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use avor_core::costmap::compute_vcc_with;
use avor_core::engine::{run_scenario, Model, RiskTrace};
use avor_core::metrics::{normalize_risk, NormalizeParams};
use avor_core::scenario::{
    characterize_cutin, load_scenario_with_window, parse_scenario, segment_phases, Population,
    ScenarioTrace, VehicleState,
};
use avor_core::{Config, Error};

/// Model selector for [`avor_run`].
pub const AVOR_MODEL_DRF: u32 = 0;
pub const AVOR_MODEL_AVOR: u32 = 1;

/// Population selectors for [`avor_run`]. `AVOR_POPULATION_FILE` keeps the
/// level stored in the scenario file.
pub const AVOR_POPULATION_O: u32 = 0;
pub const AVOR_POPULATION_A: u32 = 1;
pub const AVOR_POPULATION_AR: u32 = 2;
pub const AVOR_POPULATION_FILE: u32 = 255;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AvorStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Invalid = 5,
    NoCutIn = 6,
    Degenerate = 7,
    Internal = 8,
}

/// Loaded scenario trace.
pub struct AvorScenario(ScenarioTrace);

/// Engine, phase and metric configuration.
pub struct AvorConfig(Config);

/// One model's raw risk series.
pub struct AvorRiskTrace(RiskTrace);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AvorPhases {
    pub t_phase0_start: f64,
    pub t_i_start: f64,
    pub t_ii_start: f64,
    pub t_iii_start: f64,
    pub t_iii_end: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AvorCutIn {
    pub duration: f64,
    pub v_lat_avg: f64,
    pub v_lat_max: f64,
    pub a_lat_avg: f64,
    pub initial_cutin_distance: f64,
}

/// Vehicle state in the road frame. Heading in radians, speeds in m/s.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AvorVehicle {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v_lon: f64,
    pub v_lat: f64,
    pub length: f64,
    pub width: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AvorVcc {
    pub x: f64,
    pub y: f64,
    pub d_vcc: f64,
    pub tta: f64,
    /// Non-zero when the collision point exists and passes the gates.
    pub valid: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(AvorStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => AvorStatus::Io,
            Error::Parse { .. } | Error::Format(_) | Error::Reference(_) => AvorStatus::Parse,
            Error::NoCutIn => AvorStatus::NoCutIn,
            Error::DegenerateTrace => AvorStatus::Degenerate,
            _ => AvorStatus::Invalid,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AvorStatus::NullPointer, format!("`{what}` is null"))
}

fn guard<F>(f: F) -> AvorStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            AvorStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("internal error: {msg}"));
            AvorStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(AvorStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn config_or_default(cfg: *const AvorConfig) -> Config {
    cfg.as_ref().map(|c| c.0).unwrap_or_default()
}

fn population_of(code: u32) -> Result<Option<Population>, Failure> {
    match code {
        AVOR_POPULATION_O => Ok(Some(Population::O)),
        AVOR_POPULATION_A => Ok(Some(Population::A)),
        AVOR_POPULATION_AR => Ok(Some(Population::AR)),
        AVOR_POPULATION_FILE => Ok(None),
        other => Err(Failure(
            AvorStatus::Invalid,
            format!("unknown population code {other}"),
        )),
    }
}

/// Message for the last failed call on this thread, or NULL after a
/// successful call. Valid until the next `avor_*` call on the same thread.
#[no_mangle]
pub extern "C" fn avor_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn avor_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn avor_config_default(out: *mut *mut AvorConfig) -> AvorStatus {
    guard(|| {
        let cfg = Box::new(AvorConfig(Config::default()));
        write_out(out, Box::into_raw(cfg), "out")
    })
}

/// Parse a TOML configuration document. Unset keys keep their defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn avor_config_from_toml(
    toml: *const c_char,
    out: *mut *mut AvorConfig,
) -> AvorStatus {
    guard(|| {
        let text = str_arg(toml, "toml")?;
        let cfg = Config::from_toml(text)?;
        write_out(out, Box::into_raw(Box::new(AvorConfig(cfg))), "out")
    })
}

/// Load a TOML file (NULL for none) and apply `AVOR_*` environment
/// overrides.
///
/// # Safety
/// `path` must be NULL or a NUL-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn avor_config_load(
    path: *const c_char,
    out: *mut *mut AvorConfig,
) -> AvorStatus {
    guard(|| {
        let path = if path.is_null() {
            None
        } else {
            Some(Path::new(str_arg(path, "path")?))
        };
        let cfg = Config::load(path, std::env::vars())?;
        write_out(out, Box::into_raw(Box::new(AvorConfig(cfg))), "out")
    })
}

/// # Safety
/// `cfg` must be NULL or a handle from an `avor_config_*` constructor that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn avor_config_free(cfg: *mut AvorConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Load a scenario file. `cfg` may be NULL for defaults.
///
/// # Safety
/// `path` must be a NUL-terminated string, `cfg` NULL or a live handle and
/// `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn avor_scenario_load(
    path: *const c_char,
    cfg: *const AvorConfig,
    out: *mut *mut AvorScenario,
) -> AvorStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let cfg = config_or_default(cfg);
        let trace = load_scenario_with_window(path, cfg.engine.smoothing_window)?;
        write_out(out, Box::into_raw(Box::new(AvorScenario(trace))), "out")
    })
}

/// Parse scenario JSON held in memory.
///
/// # Safety
/// As for [`avor_scenario_load`], with `json` in place of `path`.
#[no_mangle]
pub unsafe extern "C" fn avor_scenario_parse(
    json: *const c_char,
    cfg: *const AvorConfig,
    out: *mut *mut AvorScenario,
) -> AvorStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let cfg = config_or_default(cfg);
        let trace = parse_scenario(text, cfg.engine.smoothing_window)?;
        write_out(out, Box::into_raw(Box::new(AvorScenario(trace))), "out")
    })
}

/// # Safety
/// `s` must be NULL or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn avor_scenario_free(s: *mut AvorScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn avor_scenario_frame_count(
    s: *const AvorScenario,
    out: *mut usize,
) -> AvorStatus {
    guard(|| {
        let s = ref_arg(s, "scenario")?;
        write_out(out, s.0.len(), "out")
    })
}

/// Cut-in phase boundaries in seconds.
///
/// # Safety
/// `s` must be a live handle, `cfg` NULL or a live handle, `out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn avor_scenario_segment(
    s: *const AvorScenario,
    cfg: *const AvorConfig,
    out: *mut AvorPhases,
) -> AvorStatus {
    guard(|| {
        let s = ref_arg(s, "scenario")?;
        let cfg = config_or_default(cfg);
        let seg = segment_phases(&s.0, &cfg.phases)?;
        write_out(
            out,
            AvorPhases {
                t_phase0_start: seg.t_phase0_start,
                t_i_start: seg.t_i_start,
                t_ii_start: seg.t_ii_start,
                t_iii_start: seg.t_iii_start,
                t_iii_end: seg.t_iii_end,
            },
            "out",
        )
    })
}

/// Kinematic summary of the cut-in manoeuvre.
///
/// # Safety
/// As for [`avor_scenario_segment`].
#[no_mangle]
pub unsafe extern "C" fn avor_scenario_characterize(
    s: *const AvorScenario,
    cfg: *const AvorConfig,
    out: *mut AvorCutIn,
) -> AvorStatus {
    guard(|| {
        let s = ref_arg(s, "scenario")?;
        let cfg = config_or_default(cfg);
        let seg = segment_phases(&s.0, &cfg.phases)?;
        let c = characterize_cutin(&s.0, &seg)?;
        write_out(
            out,
            AvorCutIn {
                duration: c.duration,
                v_lat_avg: c.v_lat_avg,
                v_lat_max: c.v_lat_max,
                a_lat_avg: c.a_lat_avg,
                initial_cutin_distance: c.initial_cutin_distance,
            },
            "out",
        )
    })
}

/// Evaluate one model over every frame.
///
/// # Safety
/// `s` must be a live handle, `cfg` NULL or a live handle, `out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn avor_run(
    s: *const AvorScenario,
    cfg: *const AvorConfig,
    model: u32,
    population: u32,
    out: *mut *mut AvorRiskTrace,
) -> AvorStatus {
    guard(|| {
        let s = ref_arg(s, "scenario")?;
        let cfg = config_or_default(cfg);
        let model = match model {
            AVOR_MODEL_DRF => Model::Drf,
            AVOR_MODEL_AVOR => Model::Avor,
            other => {
                return Err(Failure(
                    AvorStatus::Invalid,
                    format!("unknown model code {other}"),
                ))
            }
        };
        let trace = match population_of(population)? {
            Some(p) => s.0.with_population(p),
            None => s.0.clone(),
        };
        let mut traces = run_scenario(&trace, &[model], &cfg.engine_params())?;
        let rt = traces.remove(0);
        write_out(out, Box::into_raw(Box::new(AvorRiskTrace(rt))), "out")
    })
}

/// # Safety
/// `t` must be NULL or a live risk trace handle.
#[no_mangle]
pub unsafe extern "C" fn avor_risk_trace_free(t: *mut AvorRiskTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of samples; 0 for a NULL handle.
///
/// # Safety
/// `t` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn avor_risk_trace_len(t: *const AvorRiskTrace) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Borrowed pointer to the raw risk values, valid while `t` lives.
///
/// # Safety
/// `t` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn avor_risk_trace_values(t: *const AvorRiskTrace) -> *const f64 {
    t.as_ref().map_or(std::ptr::null(), |t| t.0.value.as_ptr())
}

/// Borrowed pointer to the sample times, valid while `t` lives.
///
/// # Safety
/// `t` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn avor_risk_trace_times(t: *const AvorRiskTrace) -> *const f64 {
    t.as_ref().map_or(std::ptr::null(), |t| t.0.t.as_ptr())
}

/// Virtual collision point of the cut-in vehicle's lateral ray with the
/// ego's longitudinal ray. Lateral speeds below `v_lat_min` are gated out.
///
/// # Safety
/// `ego` and `cutin` must be readable, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn avor_compute_vcc(
    ego: *const AvorVehicle,
    cutin: *const AvorVehicle,
    v_lat_min: f64,
    out: *mut AvorVcc,
) -> AvorStatus {
    guard(|| {
        let ego = vehicle_state(ref_arg(ego, "ego")?);
        let cut = vehicle_state(ref_arg(cutin, "cutin")?);
        let v = compute_vcc_with(&ego, &cut, v_lat_min);
        write_out(
            out,
            AvorVcc {
                x: v.x,
                y: v.y,
                d_vcc: v.d_vcc,
                tta: v.tta,
                valid: v.valid as u8,
            },
            "out",
        )
    })
}

fn vehicle_state(v: &AvorVehicle) -> VehicleState {
    VehicleState {
        t: 0.0,
        x: v.x,
        y: v.y,
        heading: v.heading,
        v_lon: v.v_lon,
        v_lat: v.v_lat,
        a_lon: 0.0,
        a_lat: 0.0,
        length: v.length,
        width: v.width,
    }
}

/// Min-max normalise `raw` into `[c_bar, c_bar + scale]`, writing `len`
/// values to `out`. A non-positive or NaN `scale` selects `10 - c_bar`.
///
/// # Safety
/// `raw` must be readable and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn avor_normalize(
    raw: *const f64,
    len: usize,
    c_bar: f64,
    scale: f64,
    out: *mut f64,
) -> AvorStatus {
    guard(|| {
        if raw.is_null() {
            return Err(null("raw"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let input = std::slice::from_raw_parts(raw, len);
        let params = NormalizeParams {
            c_bar,
            scale: if scale > 0.0 { scale } else { 10.0 - c_bar },
        };
        let values = normalize_risk(input, &params)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&values);
        Ok(())
    })
}
