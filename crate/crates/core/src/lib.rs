//! End-to-end freight load-consolidation engine.
//!
//! The pipeline mines recurring consolidation opportunities from historical
//! load records (route-bearing DBSCAN clustering followed by constrained
//! FP-growth itemset mining) and then computes cost-optimal operational
//! consolidation plans per destination-day with an exact branch-and-bound
//! solver, alongside TL and nearest-neighbor baselines and a metrics harness.

pub mod baseline;
pub mod cluster;
pub mod config;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod geo;
pub mod io;
pub mod mining;
pub mod model;
pub mod pathgen;
pub mod pipeline;
pub mod scalar;
pub mod solver;

/// Great-circle distances in statute miles.
pub type Miles = f64;
/// Travel and dwell durations in minutes.
pub type Minutes = f64;
/// Monetary cost in abstract units (defaults make cost equal distance).
pub type Money = f64;

pub use error::{Error, Result};
