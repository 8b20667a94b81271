//! Evaluation: surrogate safety metrics, normalization of model output,
//! rating aggregation and scoring against ratings.

mod normalize;
mod ratings;
mod report;
mod scoring;
mod surrogate;

use serde::{Deserialize, Serialize};

pub use normalize::{normalize_risk, NormalizeParams};
pub use ratings::{
    aggregate_ratings, downsample_hold, resample_hold, RatingFile, RatingSample, RatingTrace,
    RATING_SCHEMA,
};
pub use report::{EvalReport, OnsetRecord, ReportKey};
pub use scoring::{detect_onset, onset_delta, onset_fraction, rmse, rmse_per_phase};
pub use surrogate::{surrogate_metrics, SurrogateTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsParams {
    /// Onset threshold on the Phase-I rise of the rating (rating points).
    pub onset_threshold: f64,
    /// Fallback Phase-0 mean rating when no ratings are available.
    pub c_bar: f64,
    /// Normalized span; `None` means `10 - c_bar`.
    pub scale: Option<f64>,
}

impl Default for MetricsParams {
    fn default() -> Self {
        Self {
            onset_threshold: 0.5,
            c_bar: 0.0,
            scale: None,
        }
    }
}

impl MetricsParams {
    pub fn normalize_params(&self, c_bar: f64) -> NormalizeParams {
        NormalizeParams {
            c_bar,
            scale: self.scale.unwrap_or(10.0 - c_bar),
        }
    }
}
