//! Perceived-risk estimation for highway cut-in scenarios.
//!
//! The crate computes two continuous risk signals per frame of a recorded
//! scenario: the Driver's Risk Field estimate (field-weighted static cost)
//! and the AV-Occupant Risk estimate, which adds a dynamic cost layer
//! anchored at the virtual cut-in collision point. Around the engine sit
//! the scenario model, phase segmentation, surrogate safety metrics, rating
//! aggregation and scoring, a CLI and an HTTP rating service.

pub mod cli;
pub mod config;
pub mod costmap;
pub mod drf;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod metrics;
pub mod scenario;
pub mod service;

pub use config::Config;
pub use error::{Error, Result};
