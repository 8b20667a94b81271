use std::collections::BTreeMap;

use super::RatingTrace;
use crate::error::{Error, Result};
use crate::scenario::{in_window, Phase, PhaseSegmentation};

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (ss / n as f64).sqrt()
}

/// RMSE between the normalized model series and the mean rating over the
/// half-open window of each scored phase. Both series are sampled at
/// `times`.
pub fn rmse_per_phase(
    model: &[f64],
    mean_srr: &[f64],
    times: &[f64],
    seg: &PhaseSegmentation,
) -> Result<BTreeMap<Phase, f64>> {
    if model.len() != times.len() || mean_srr.len() != times.len() {
        return Err(Error::Invalid(format!(
            "series lengths differ: model {}, rating {}, time grid {}",
            model.len(),
            mean_srr.len(),
            times.len()
        )));
    }
    let mut out = BTreeMap::new();
    for phase in Phase::SCORED {
        let (start, end) = seg.window(phase);
        let idx: Vec<usize> = (0..times.len())
            .filter(|&k| in_window(times[k], start, end))
            .collect();
        if idx.is_empty() {
            return Err(Error::EmptyWindow(format!(
                "phase {phase} window [{start}, {end}) has no samples"
            )));
        }
        let a: Vec<f64> = idx.iter().map(|&k| model[k]).collect();
        let b: Vec<f64> = idx.iter().map(|&k| mean_srr[k]).collect();
        out.insert(phase, rmse(&a, &b));
    }
    Ok(out)
}

/// Rise of the held rating from its Phase-0 mean to its Phase-I maximum.
/// The Phase-0 mean is time-weighted over the step function.
pub fn onset_delta(rating: &RatingTrace, seg: &PhaseSegmentation) -> Result<f64> {
    let (p0, t1) = seg.window(Phase::Zero);
    let (_, t2) = seg.window(Phase::I);
    let first = rating.t[0];
    let last = rating.t[rating.t.len() - 1];
    if first > p0 + 1e-6 || last < t1 - 1e-6 {
        return Err(Error::Window(format!(
            "rating from `{}` spans [{first}, {last}] but phases 0-I need [{p0}, {t1}]",
            rating.rater_id
        )));
    }
    if t1 - p0 <= 0.0 {
        return Err(Error::EmptyWindow("phase 0 has zero length".into()));
    }

    // Breakpoints of the step function inside phase 0.
    let mut area = 0.0;
    let mut a = p0;
    let mut v = rating.value_at(p0);
    for (ts, s) in rating.t.iter().zip(&rating.srr) {
        if *ts > p0 + 1e-9 && *ts < t1 - 1e-9 {
            area += v * (ts - a);
            a = *ts;
            v = *s;
        }
    }
    area += v * (t1 - a);
    let base = area / (t1 - p0);

    let mut peak = rating.value_at(t1);
    for (ts, s) in rating.t.iter().zip(&rating.srr) {
        if in_window(*ts, t1, t2) {
            peak = peak.max(*s);
        }
    }
    Ok(peak - base)
}

pub fn detect_onset(rating: &RatingTrace, seg: &PhaseSegmentation, threshold: f64) -> Result<bool> {
    Ok(onset_delta(rating, seg)? > threshold)
}

/// Fraction of raters whose rating shows an onset.
pub fn onset_fraction(
    ratings: &[RatingTrace],
    seg: &PhaseSegmentation,
    threshold: f64,
) -> Result<f64> {
    if ratings.is_empty() {
        return Err(Error::NoRatings("no ratings for onset detection".into()));
    }
    let mut hits = 0usize;
    for r in ratings {
        if detect_onset(r, seg, threshold)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / ratings.len() as f64)
}
