//! Cut-in phase segmentation.
//!
//! Phase 0 is the two-second baseline before initiation. Phase I starts when
//! the cut-in actor's lateral velocity toward the ego lane exceeds a
//! threshold for a sustained period, Phase II when its near edge crosses
//! into the ego lane, Phase III when its whole footprint is inside the ego
//! lane. Phase III ends at the first subsequent safe TTC (or trace end).

use serde::{Deserialize, Serialize};

use super::{time_to_collision, ScenarioTrace};
use crate::error::{Error, Result};

/// Length of the Phase 0 baseline window in seconds.
pub const PHASE0_WINDOW: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseParams {
    /// Lateral speed toward the ego lane that marks initiation (m/s).
    pub v_lat_init: f64,
    /// How long the lateral speed must stay above `v_lat_init` (s).
    pub sustain: f64,
    /// TTC at or above which Phase III is considered complete (s).
    pub ttc_safe: f64,
}

impl Default for PhaseParams {
    fn default() -> Self {
        Self {
            v_lat_init: 0.2,
            sustain: 0.3,
            ttc_safe: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSegmentation {
    pub t_phase0_start: f64,
    pub t_i_start: f64,
    pub t_ii_start: f64,
    pub t_iii_start: f64,
    pub t_iii_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "III")]
    III,
}

impl Phase {
    pub const SCORED: [Phase; 3] = [Phase::I, Phase::II, Phase::III];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Zero => "0",
            Self::I => "I",
            Self::II => "II",
            Self::III => "III",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl PhaseSegmentation {
    /// Half-open window `[start, end)` of a phase.
    pub fn window(&self, phase: Phase) -> (f64, f64) {
        match phase {
            Phase::Zero => (self.t_phase0_start, self.t_i_start),
            Phase::I => (self.t_i_start, self.t_ii_start),
            Phase::II => (self.t_ii_start, self.t_iii_start),
            Phase::III => (self.t_iii_start, self.t_iii_end),
        }
    }

    /// Phase containing time `t`, if any.
    pub fn phase_at(&self, t: f64) -> Option<Phase> {
        [Phase::Zero, Phase::I, Phase::II, Phase::III]
            .into_iter()
            .find(|p| {
                let (a, b) = self.window(*p);
                in_window(t, a, b)
            })
    }

    pub fn is_ordered(&self) -> bool {
        self.t_phase0_start <= self.t_i_start
            && self.t_i_start < self.t_ii_start
            && self.t_ii_start < self.t_iii_start
            && self.t_iii_start <= self.t_iii_end
    }
}

/// `t` in `[start, end)` with a small tolerance for sampled timestamps.
pub fn in_window(t: f64, start: f64, end: f64) -> bool {
    t >= start - 1e-9 && t < end - 1e-9
}

pub fn segment_phases(trace: &ScenarioTrace, params: &PhaseParams) -> Result<PhaseSegmentation> {
    let cut = trace.cutin();
    let n = trace.len();
    let (lane_lo, lane_hi) = trace.road.ego_lane_bounds();
    let w = trace.road.lane_width;

    let y0 = cut[0].y;
    if !(y0.abs() > 0.5 * w && y0.abs() <= 1.5 * w) {
        return Err(Error::Segmentation(format!(
            "cut-in actor starts at y={y0:.2} m, not in a lane adjacent to the ego lane"
        )));
    }
    let toward = trace.cutin_approach_sign();

    // Initiation: sustained lateral speed toward the ego lane.
    let sustain_steps = ((params.sustain / trace.dt) - 1e-9).ceil().max(0.0) as usize;
    let moving = |i: usize| toward * cut[i].v_lat > params.v_lat_init;
    let i_start = (0..n)
        .find(|&i| i + sustain_steps < n && (i..=i + sustain_steps).all(moving))
        .ok_or(Error::NoCutIn)?;

    // Near / far lateral edge of the footprint relative to the ego lane.
    let near_inside = |i: usize| {
        let (ymin, ymax) = cut[i].footprint().y_extent();
        if toward < 0.0 {
            ymin < lane_hi
        } else {
            ymax > lane_lo
        }
    };
    let fully_inside = |i: usize| {
        let (ymin, ymax) = cut[i].footprint().y_extent();
        ymin >= lane_lo && ymax <= lane_hi
    };

    if near_inside(i_start) {
        return Err(Error::Segmentation(format!(
            "cut-in actor already overlaps the ego lane at initiation (t={})",
            cut[i_start].t
        )));
    }
    let ii_start = (i_start + 1..n)
        .find(|&i| near_inside(i))
        .ok_or_else(|| Error::Segmentation("cut-in actor never enters the ego lane".into()))?;
    let iii_start = (ii_start + 1..n).find(|&i| fully_inside(i)).ok_or_else(|| {
        Error::Segmentation("cut-in actor never fully enters the ego lane".into())
    })?;
    let iii_end = (iii_start..n)
        .find(|&i| {
            time_to_collision(&trace.ego[i], &cut[i]).is_none_or(|ttc| ttc >= params.ttc_safe)
        })
        .unwrap_or(n - 1);

    let back = (PHASE0_WINDOW / trace.dt).round() as usize;
    let p0 = i_start.saturating_sub(back);
    let t = |i: usize| trace.ego[i].t;

    Ok(PhaseSegmentation {
        t_phase0_start: t(p0),
        t_i_start: t(i_start),
        t_ii_start: t(ii_start),
        t_iii_start: t(iii_start),
        t_iii_end: t(iii_end),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::testutil::cutin_trace;

    fn smooth_cutin(t: f64) -> f64 {
        // 0 until 3 s, then a 4 s sine-squared pulse peaking at -1.8 m/s.
        if (3.0..7.0).contains(&t) {
            let u = (t - 3.0) / 4.0;
            -1.8 * (std::f64::consts::PI * u).sin().powi(2)
        } else {
            0.0
        }
    }

    #[test]
    fn parallel_actor_is_no_cutin() {
        let tr = cutin_trace(100, 0.1, 3.7, |_| 0.0);
        assert!(matches!(
            segment_phases(&tr, &PhaseParams::default()),
            Err(Error::NoCutIn)
        ));
    }

    #[test]
    fn brief_lateral_blip_is_not_sustained() {
        let tr = cutin_trace(100, 0.1, 3.7, |t| {
            if (2.0..2.25).contains(&t) {
                -0.5
            } else {
                0.0
            }
        });
        assert!(matches!(
            segment_phases(&tr, &PhaseParams::default()),
            Err(Error::NoCutIn)
        ));
    }

    #[test]
    fn ordered_boundaries_for_smooth_cutin() {
        let tr = cutin_trace(150, 0.1, 3.7, smooth_cutin);
        let seg = segment_phases(&tr, &PhaseParams::default()).unwrap();
        assert!(seg.is_ordered(), "{seg:?}");
        assert!((seg.t_i_start - seg.t_phase0_start - 2.0).abs() < 1e-9);
        assert_eq!(seg.phase_at(seg.t_i_start), Some(Phase::I));
        // No closing speed in this fixture, so Phase III ends immediately.
        assert_eq!(seg.t_iii_end, seg.t_iii_start);
    }

    #[test]
    fn time_shift_moves_boundaries_exactly() {
        let tr = cutin_trace(150, 0.1, 3.7, smooth_cutin);
        let seg = segment_phases(&tr, &PhaseParams::default()).unwrap();
        let mut shifted = tr.clone();
        let delta = 0.25;
        for s in shifted
            .ego
            .iter_mut()
            .chain(shifted.actors.values_mut().flatten())
        {
            s.t += delta;
        }
        let seg2 = segment_phases(&shifted, &PhaseParams::default()).unwrap();
        let pairs = [
            (seg.t_phase0_start, seg2.t_phase0_start),
            (seg.t_i_start, seg2.t_i_start),
            (seg.t_ii_start, seg2.t_ii_start),
            (seg.t_iii_start, seg2.t_iii_start),
            (seg.t_iii_end, seg2.t_iii_end),
        ];
        for (a, b) in pairs {
            let idx_a = tr.index_of(a).unwrap();
            let idx_b = shifted.index_of(b).unwrap();
            assert_eq!(idx_a, idx_b);
            assert_eq!(b, tr.ego[idx_a].t + delta);
        }
    }

    #[test]
    fn rejects_actor_not_in_adjacent_lane() {
        let tr = cutin_trace(50, 0.1, 9.0, |_| -0.5);
        assert!(matches!(
            segment_phases(&tr, &PhaseParams::default()),
            Err(Error::Segmentation(_))
        ));
    }
}
