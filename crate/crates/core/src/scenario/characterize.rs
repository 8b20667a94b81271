use serde::{Deserialize, Serialize};

use super::{longitudinal_gap, PhaseSegmentation, ScenarioTrace};
use crate::error::{Error, Result};

/// Kinematic summary of a cut-in over `[t_I_start, t_III_start]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutInCharacteristics {
    pub duration: f64,
    pub v_lat_avg: f64,
    pub v_lat_max: f64,
    /// Mean lateral acceleration toward the ego lane.
    pub a_lat_avg: f64,
    /// Bumper-to-bumper longitudinal gap at `t_I_start`.
    pub initial_cutin_distance: f64,
}

pub fn characterize_cutin(
    trace: &ScenarioTrace,
    seg: &PhaseSegmentation,
) -> Result<CutInCharacteristics> {
    let locate = |t: f64, what: &str| {
        trace.index_of(t).ok_or_else(|| {
            Error::Window(format!("{what} = {t} s is not a sample of trace `{}`", trace.id))
        })
    };
    let start = locate(seg.t_i_start, "t_I_start")?;
    let end = locate(seg.t_iii_start, "t_III_start")?;
    if end <= start {
        return Err(Error::Window(format!(
            "empty cut-in window [{}, {}]",
            seg.t_i_start, seg.t_iii_start
        )));
    }

    let cut = &trace.cutin()[start..=end];
    let toward = trace.cutin_approach_sign();
    let n = cut.len() as f64;
    let v_lat_avg = cut.iter().map(|s| s.v_lat.abs()).sum::<f64>() / n;
    let v_lat_max = cut.iter().map(|s| s.v_lat.abs()).fold(0.0, f64::max);
    let a_lat_avg = cut.iter().map(|s| toward * s.a_lat).sum::<f64>() / n;

    Ok(CutInCharacteristics {
        duration: trace.ego[end].t - trace.ego[start].t,
        v_lat_avg,
        v_lat_max,
        a_lat_avg,
        initial_cutin_distance: longitudinal_gap(&trace.ego[start], &trace.cutin()[start]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::testutil::cutin_trace;
    use crate::scenario::{segment_phases, PhaseParams};

    #[test]
    fn constant_lateral_speed() {
        let tr = cutin_trace(120, 0.1, 4.0, |t| if t >= 1.0 { -0.6 } else { 0.0 });
        let seg = segment_phases(&tr, &PhaseParams::default()).unwrap();
        let c = characterize_cutin(&tr, &seg).unwrap();
        assert!((c.v_lat_avg - 0.6).abs() < 1e-12);
        assert!((c.v_lat_max - 0.6).abs() < 1e-12);
        assert!((c.initial_cutin_distance - 10.2).abs() < 1e-9);
    }

    #[test]
    fn mirror_invariance() {
        let profile = |t: f64| {
            if (2.0..8.0).contains(&t) {
                -1.3 * (std::f64::consts::PI * (t - 2.0) / 6.0).sin()
            } else {
                0.0
            }
        };
        let left = cutin_trace(150, 0.1, 3.7, profile);
        let mut right = left.clone();
        for s in right.actors.values_mut().flatten() {
            s.y = -s.y;
            s.v_lat = -s.v_lat;
            s.a_lat = -s.a_lat;
            s.heading = -s.heading;
        }
        let p = PhaseParams::default();
        let a = characterize_cutin(&left, &segment_phases(&left, &p).unwrap()).unwrap();
        let b = characterize_cutin(&right, &segment_phases(&right, &p).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn window_outside_trace_is_error() {
        let tr = cutin_trace(50, 0.1, 4.0, |t| if t >= 1.0 { -0.6 } else { 0.0 });
        let seg = PhaseSegmentation {
            t_phase0_start: 0.0,
            t_i_start: 1.0,
            t_ii_start: 2.0,
            t_iii_start: 99.0,
            t_iii_end: 99.0,
        };
        assert!(matches!(characterize_cutin(&tr, &seg), Err(Error::Window(_))));
    }
}
