//! Pipeline configuration with serde defaults and validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::ReferenceDirection;
use crate::mining::MinSupport;
use crate::pathgen::CostModel;
use crate::solver::{Budget, CapacityScope};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Clustering radius over route bearings, radians.
    pub eps: f64,
    pub min_pts: usize,
    /// Minimum support for mined itemsets.
    pub min_support: MinSupport,
    /// Keep only maximal mined itemsets.
    pub maximal_only: bool,
    /// Holdout horizon: the final N weeks of history are planned, the rest
    /// is mined.
    pub test_weeks: u32,
    pub speed_mph: f64,
    pub dwell_minutes: f64,
    /// Utilization below this fraction marks a load as partial.
    pub partial_threshold: f64,
    pub cost: CostModel,
    pub capacity_scope: CapacityScope,
    pub reference: ReferenceDirection,
    pub budget: Budget,
    /// Worker threads; 0 lets the runtime choose.
    pub jobs: usize,
    /// Additionally require a load and its hub load to co-occur in one mined
    /// candidate before opening a consolidation path.
    pub require_comembership: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            eps: 0.30,
            min_pts: 2,
            min_support: MinSupport::Count(5),
            maximal_only: false,
            test_weeks: 3,
            speed_mph: 50.0,
            dwell_minutes: 0.0,
            partial_threshold: 0.80,
            cost: CostModel::default(),
            capacity_scope: CapacityScope::All,
            reference: ReferenceDirection::West,
            budget: Budget::default(),
            jobs: 1,
            require_comembership: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.min_pts < 2 {
            return Err(Error::Config(format!(
                "min_pts must be at least 2, got {}",
                self.min_pts
            )));
        }
        if let MinSupport::Fraction(f) = self.min_support {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!(
                    "fractional support must lie in [0, 1], got {f}"
                )));
            }
        }
        if !(self.speed_mph > 0.0) {
            return Err(Error::Config(format!(
                "speed_mph must be positive, got {}",
                self.speed_mph
            )));
        }
        if self.dwell_minutes < 0.0 {
            return Err(Error::Config(format!(
                "dwell_minutes must be nonnegative, got {}",
                self.dwell_minutes
            )));
        }
        if !(self.partial_threshold > 0.0 && self.partial_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "partial_threshold must lie in (0, 1], got {}",
                self.partial_threshold
            )));
        }
        if self.test_weeks == 0 {
            return Err(Error::Config("test_weeks must be at least 1".into()));
        }
        if !(self.budget.max_secs > 0.0) || self.budget.max_nodes == 0 {
            return Err(Error::Config("solver budget must be positive".into()));
        }
        Ok(())
    }
}
