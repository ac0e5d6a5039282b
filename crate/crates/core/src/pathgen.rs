//! Operational feasible-path generation for a single destination-day: the
//! direct route for every load plus consolidation routes through mined
//! consolidation points, with costs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo;
use crate::mining::{AbstractPoint, CandidateSet, TravelTime};
use crate::model::{Load, LoadId, NetworkIndex, Node, TerminalId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Direct,
    Consolidation,
}

/// A feasible route for one load: direct (o, d) or consolidation (o, h, d).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Path {
    pub load_id: LoadId,
    pub kind: PathKind,
    pub hub: Option<Node>,
    /// Origin of the final leg to the destination: the load origin for direct
    /// paths, the hub for consolidation paths.
    pub last_leg_origin: Node,
    /// Detour cost of moving the load to the hub; zero for direct paths.
    pub detour_cost: f64,
    /// Cost of running this load's trailer on the last leg.
    pub last_leg_cost: f64,
    pub hub_load_id: Option<LoadId>,
    pub detour_miles: f64,
    pub last_leg_miles: f64,
}

/// Affine cost model; the defaults make cost equal to distance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostModel {
    pub rates: BTreeMap<String, f64>,
    pub default_rate: f64,
    pub fixed_dispatch: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            rates: BTreeMap::new(),
            default_rate: 1.0,
            fixed_dispatch: 0.0,
        }
    }
}

impl CostModel {
    pub fn cost(&self, miles: f64, trailer_type: &str) -> f64 {
        let rate = match self.rates.get(trailer_type) {
            Some(r) => *r,
            None => {
                if !self.rates.is_empty() {
                    log::warn!("unknown trailer type {trailer_type:?}; using default rate");
                }
                self.default_rate
            }
        };
        rate * miles + self.fixed_dispatch
    }
}

/// Distance and travel-time oracle over terminals.
pub trait RouteMetric: TravelTime {
    fn miles(&self, a: &TerminalId, b: &TerminalId) -> Result<f64>;
}

/// Haversine distances at a constant speed, backed by the network's terminal
/// coordinates.
pub struct HaversineTravel<'a> {
    pub index: &'a NetworkIndex<'a>,
    pub speed_mph: f64,
}

impl TravelTime for HaversineTravel<'_> {
    fn minutes(&self, a: &TerminalId, b: &TerminalId) -> Result<f64> {
        Ok(self.miles(a, b)? / self.speed_mph * 60.0)
    }
}

impl RouteMetric for HaversineTravel<'_> {
    fn miles(&self, a: &TerminalId, b: &TerminalId) -> Result<f64> {
        let ta = self.index.terminal(a)?;
        let tb = self.index.terminal(b)?;
        Ok(geo::terminal_miles(ta, tb))
    }
}

pub fn abstract_point(load: &Load) -> Result<AbstractPoint> {
    Ok(AbstractPoint {
        origin: load.origin.clone(),
        due_dow: load.due_dow(),
        transit_days: load.transit_days()?,
    })
}

/// Loads whose abstract signature appears in at least one mined candidate.
pub fn select_lc<'a>(loads: &[&'a Load], candidates: &[CandidateSet]) -> Result<Vec<&'a Load>> {
    let mut out = Vec::new();
    for load in loads {
        let point = abstract_point(load)?;
        if candidates.iter().any(|c| c.items.contains(&point)) {
            out.push(*load);
        }
    }
    Ok(out)
}

/// Operational pair feasibility: can load `l` reach the hub load's origin
/// before the hub load departs, using actual scheduled timestamps?
pub fn kappa_op(
    load: &Load,
    hub_load: &Load,
    travel: &dyn TravelTime,
    dwell_minutes: f64,
) -> Result<bool> {
    if load.destination != hub_load.destination || load.due_day != hub_load.due_day {
        return Err(Error::Contract(format!(
            "kappa_op requires matching destination and due date ({} vs {})",
            load.id, hub_load.id
        )));
    }
    let tau = travel.minutes(&load.origin.terminal, &hub_load.origin.terminal)?;
    Ok(load.departure as f64 + tau + dwell_minutes <= hub_load.departure as f64)
}

pub struct PathOptions<'a> {
    /// Mined consolidation points; `None` disables the hub filter so every
    /// feasible origin acts as a hub (used for the Num of Paths metric).
    pub hubs: Option<&'a BTreeSet<Node>>,
    /// When set, additionally require the load's and hub load's abstract
    /// items to co-occur in one mined candidate.
    pub comembership: Option<&'a [CandidateSet]>,
    pub dwell_minutes: f64,
}

/// The direct path for a load, priced with the cost model.
pub fn direct_path(load: &Load, metric: &dyn RouteMetric, cost: &CostModel) -> Result<Path> {
    let miles = metric.miles(&load.origin.terminal, &load.destination.terminal)?;
    Ok(Path {
        load_id: load.id.clone(),
        kind: PathKind::Direct,
        hub: None,
        last_leg_origin: load.origin.clone(),
        detour_cost: 0.0,
        last_leg_cost: cost.cost(miles, &load.trailer_type),
        hub_load_id: None,
        detour_miles: 0.0,
        last_leg_miles: miles,
    })
}

/// Paths for every load of a destination-day batch: the direct path plus one
/// consolidation path per distinct eligible hub node. When several loads share
/// a hub node, the hub load is the one with the latest departure still
/// satisfying the operational feasibility check (maximum arrival slack).
pub fn generate_paths(
    loads: &[&Load],
    metric: &dyn RouteMetric,
    cost: &CostModel,
    options: &PathOptions<'_>,
) -> Result<BTreeMap<LoadId, Vec<Path>>> {
    let mut out = BTreeMap::new();
    for load in loads {
        let mut paths = vec![direct_path(load, metric, cost)?];

        // candidate hub loads, grouped by hub node
        let mut by_hub: BTreeMap<&Node, Vec<&Load>> = BTreeMap::new();
        for hub_load in loads {
            if hub_load.id == load.id || hub_load.origin == load.origin {
                continue;
            }
            if let Some(hubs) = options.hubs {
                if !hubs.contains(&hub_load.origin) {
                    continue;
                }
            }
            if !kappa_op(load, hub_load, metric, options.dwell_minutes)? {
                continue;
            }
            if let Some(candidates) = options.comembership {
                let a = abstract_point(load)?;
                let b = abstract_point(hub_load)?;
                if !candidates
                    .iter()
                    .any(|c| c.items.contains(&a) && c.items.contains(&b))
                {
                    continue;
                }
            }
            by_hub.entry(&hub_load.origin).or_default().push(hub_load);
        }

        for (hub, mut hub_loads) in by_hub {
            hub_loads.sort_by(|a, b| b.departure.cmp(&a.departure).then_with(|| a.id.cmp(&b.id)));
            let hub_load = hub_loads[0];
            let detour_miles = metric.miles(&load.origin.terminal, &hub.terminal)?;
            let last_leg_miles = metric.miles(&hub.terminal, &load.destination.terminal)?;
            paths.push(Path {
                load_id: load.id.clone(),
                kind: PathKind::Consolidation,
                hub: Some(hub.clone()),
                last_leg_origin: hub.clone(),
                detour_cost: cost.cost(detour_miles, &load.trailer_type),
                last_leg_cost: cost.cost(last_leg_miles, &load.trailer_type),
                hub_load_id: Some(hub_load.id.clone()),
                detour_miles,
                last_leg_miles,
            });
        }

        out.insert(load.id.clone(), paths);
    }
    Ok(out)
}
