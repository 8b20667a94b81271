use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Population;

pub const RATING_SCHEMA: &str = "avor-rating/1";

/// One rater's subjective risk rating trace for one scenario condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTrace {
    pub rater_id: String,
    pub scenario_id: String,
    pub population: Population,
    pub t: Vec<f64>,
    pub srr: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingSample {
    pub t: f64,
    pub srr: f64,
}

/// On-disk form of a rating trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingFile {
    pub schema: String,
    pub rater_id: String,
    pub scenario_id: String,
    pub population: Population,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_at: Option<String>,
    pub samples: Vec<RatingSample>,
}

impl RatingTrace {
    pub fn validate(&self) -> Result<()> {
        if self.t.is_empty() || self.t.len() != self.srr.len() {
            return Err(Error::Invalid(format!(
                "rating from `{}` needs matching, non-empty t and srr arrays",
                self.rater_id
            )));
        }
        if let Some(v) = self.srr.iter().find(|v| !(**v >= 0.0 && **v <= 10.0)) {
            return Err(Error::Invalid(format!("srr value {v} outside [0, 10]")));
        }
        if self.t.iter().any(|t| !t.is_finite()) || self.t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(format!(
                "rating timestamps from `{}` must be finite and strictly increasing",
                self.rater_id
            )));
        }
        Ok(())
    }

    /// Held rating value at time `t`. Before the first sample the first
    /// value applies.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.t.partition_point(|s| *s <= t + 1e-9);
        self.srr[k.saturating_sub(1)]
    }

    pub fn to_file(&self) -> RatingFile {
        RatingFile {
            schema: RATING_SCHEMA.into(),
            rater_id: self.rater_id.clone(),
            scenario_id: self.scenario_id.clone(),
            population: self.population,
            session_id: None,
            started_at: None,
            samples: self
                .t
                .iter()
                .zip(&self.srr)
                .map(|(t, srr)| RatingSample { t: *t, srr: *srr })
                .collect(),
        }
    }

    pub fn from_file(file: RatingFile) -> Result<Self> {
        if file.schema != RATING_SCHEMA {
            return Err(Error::Parse {
                field: "schema".into(),
                message: format!("expected `{RATING_SCHEMA}`, got `{}`", file.schema),
            });
        }
        let trace = Self {
            rater_id: file.rater_id,
            scenario_id: file.scenario_id,
            population: file.population,
            t: file.samples.iter().map(|s| s.t).collect(),
            srr: file.samples.iter().map(|s| s.srr).collect(),
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_file(RatingFile::parse_unchecked(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

impl RatingFile {
    fn parse_unchecked(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    /// Read a rating file, keeping its session metadata, after the same
    /// checks as [`RatingTrace::load`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file = Self::parse_unchecked(&text)?;
        RatingTrace::from_file(file.clone())?;
        Ok(file)
    }
}

/// Resample by previous-value hold onto `grid_t`.
pub fn resample_hold(rating: &RatingTrace, grid_t: &[f64]) -> Vec<f64> {
    grid_t.iter().map(|t| rating.value_at(*t)).collect()
}

/// Reduce a denser trace to a fixed step by previous-value hold. The
/// output grid is the multiples of `dt` between the first and last sample.
pub fn downsample_hold(rating: &RatingTrace, dt: f64) -> RatingTrace {
    let first = (rating.t[0] / dt - 1e-9).ceil() as i64;
    let last = (rating.t[rating.t.len() - 1] / dt + 1e-9).floor() as i64;
    let t: Vec<f64> = (first..=last).map(|k| k as f64 * dt).collect();
    RatingTrace {
        srr: resample_hold(rating, &t),
        t,
        ..rating.clone()
    }
}

/// Point-wise mean and sample standard deviation across raters.
pub fn aggregate_ratings(ratings: &[RatingTrace], grid_t: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if ratings.is_empty() {
        return Err(Error::NoRatings("no rating traces to aggregate".into()));
    }
    let rows: Vec<Vec<f64>> = ratings.iter().map(|r| resample_hold(r, grid_t)).collect();
    let n = rows.len() as f64;
    let mut mean = Vec::with_capacity(grid_t.len());
    let mut std = Vec::with_capacity(grid_t.len());
    for k in 0..grid_t.len() {
        let m = rows.iter().map(|r| r[k]).sum::<f64>() / n;
        let var = if rows.len() > 1 {
            rows.iter().map(|r| (r[k] - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        mean.push(m);
        std.push(var.sqrt());
    }
    Ok((mean, std))
}
