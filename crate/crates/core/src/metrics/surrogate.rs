use serde::{Deserialize, Serialize};

use crate::scenario::{longitudinal_gap, overlaps_ego_lane, ScenarioTrace, VehicleState};

/// Inverse TTC and THW per frame. Undefined samples are stored as 0 with
/// the matching mask entry set to `false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateTrace {
    pub t: Vec<f64>,
    pub ttc_inv: Vec<f64>,
    pub thw_inv: Vec<f64>,
    pub ttc_valid: Vec<bool>,
    pub thw_valid: Vec<bool>,
}

/// Vehicle the gap is measured to at frame `i`: the cut-in actor once it
/// overlaps the ego lane, otherwise the nearest actor ahead in the ego lane.
fn gap_target(trace: &ScenarioTrace, i: usize) -> Option<&VehicleState> {
    let ego = &trace.ego[i];
    let ahead = |s: &VehicleState| s.x > ego.x && overlaps_ego_lane(&trace.road, s);
    let cut = &trace.cutin()[i];
    if ahead(cut) {
        return Some(cut);
    }
    trace
        .actors
        .values()
        .map(|states| &states[i])
        .filter(|s| ahead(s))
        .min_by(|a, b| a.x.total_cmp(&b.x))
}

pub fn surrogate_metrics(trace: &ScenarioTrace) -> SurrogateTrace {
    let n = trace.len();
    let mut out = SurrogateTrace {
        t: trace.times(),
        ttc_inv: vec![0.0; n],
        thw_inv: vec![0.0; n],
        ttc_valid: vec![false; n],
        thw_valid: vec![false; n],
    };
    for i in 0..n {
        let ego = &trace.ego[i];
        let Some(lead) = gap_target(trace, i) else {
            continue;
        };
        let gap = longitudinal_gap(ego, lead);
        if gap <= 0.0 {
            continue;
        }
        if ego.v_lon > 0.0 {
            out.thw_inv[i] = ego.v_lon / gap;
            out.thw_valid[i] = true;
        }
        let closing = ego.v_lon - lead.v_lon;
        if closing > 0.0 {
            out.ttc_inv[i] = closing / gap;
            out.ttc_valid[i] = true;
        }
    }
    out
}
