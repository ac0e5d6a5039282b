//! Domain types shared by every other module: terminals, sorts, nodes, loads,
//! and network-level validation.
//!
//! Absolute time is integer minutes since a dataset-declared epoch (midnight
//! of day 0, a Monday, single implicit timezone). Due dates are integer day
//! indices; day-of-week is `due_day mod 7`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MINUTES_PER_DAY: i64 = 1440;
pub const DEFAULT_PARTIAL_THRESHOLD: f64 = 0.80;

macro_rules! id_type {
    ($name:ident) => {
        #[derive(
            Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
        )]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(TerminalId);
id_type!(SortId);
id_type!(LoadId);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    pub id: TerminalId,
    pub lat: f64,
    pub lon: f64,
}

/// A 3-4 hour daily processing window at a terminal. `dep_minutes` is the
/// earliest departure within the day, `arr_minutes` the latest arrival.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sort {
    pub terminal: TerminalId,
    pub sort_id: SortId,
    pub dep_minutes: u32,
    pub arr_minutes: u32,
}

/// A (terminal, sort) pair: the spatio-temporal vertex of the network graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub terminal: TerminalId,
    pub sort: SortId,
}

impl Node {
    pub fn new(terminal: impl Into<TerminalId>, sort: impl Into<SortId>) -> Self {
        Self {
            terminal: terminal.into(),
            sort: sort.into(),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.terminal, self.sort)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub id: LoadId,
    pub origin: Node,
    pub destination: Node,
    /// Scheduled departure, absolute minutes since epoch.
    pub departure: i64,
    /// Due date as a day index since epoch.
    pub due_day: i64,
    /// Planned volume, trailer-volume units.
    pub volume: f64,
    /// Trailer capacity, same units.
    pub capacity: f64,
    pub trailer_type: String,
}

/// Day index containing absolute minute `t`.
pub fn day_of(t: i64) -> i64 {
    t.div_euclid(MINUTES_PER_DAY)
}

impl Load {
    /// Due day minus departure day; the slack that lets longer-horizon loads
    /// detour to meet shorter-horizon ones.
    pub fn transit_days(&self) -> Result<i64> {
        let omega = self.due_day - day_of(self.departure);
        if omega < 0 {
            return Err(Error::InvalidLoad {
                id: self.id.0.clone(),
                reason: format!("negative transit days ({omega})"),
            });
        }
        Ok(omega)
    }

    /// True iff utilization is strictly below `threshold`.
    pub fn is_partial(&self, threshold: f64) -> Result<bool> {
        if self.capacity <= 0.0 {
            return Err(Error::InvalidLoad {
                id: self.id.0.clone(),
                reason: "nonpositive capacity".into(),
            });
        }
        Ok(self.volume / self.capacity < threshold)
    }

    pub fn due_dow(&self) -> u8 {
        (self.due_day.rem_euclid(7)) as u8
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Network {
    pub terminals: Vec<Terminal>,
    pub sorts: Vec<Sort>,
    pub loads: Vec<Load>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub record: String,
    pub rule: String,
    pub severity: Severity,
}

impl Violation {
    fn error(record: impl fmt::Display, rule: impl Into<String>) -> Self {
        Self {
            record: record.to_string(),
            rule: rule.into(),
            severity: Severity::Error,
        }
    }
    fn warning(record: impl fmt::Display, rule: impl Into<String>) -> Self {
        Self {
            record: record.to_string(),
            rule: rule.into(),
            severity: Severity::Warning,
        }
    }
}

/// Lookup tables over a network, built once and shared read-only.
pub struct NetworkIndex<'a> {
    pub terminals: HashMap<&'a TerminalId, &'a Terminal>,
    pub sorts: HashMap<(&'a TerminalId, &'a SortId), &'a Sort>,
}

impl<'a> NetworkIndex<'a> {
    pub fn build(network: &'a Network) -> Self {
        let mut terminals = HashMap::new();
        for t in &network.terminals {
            terminals.insert(&t.id, t);
        }
        let mut sorts = HashMap::new();
        for s in &network.sorts {
            sorts.insert((&s.terminal, &s.sort_id), s);
        }
        Self { terminals, sorts }
    }

    pub fn terminal(&self, id: &TerminalId) -> Result<&'a Terminal> {
        self.terminals
            .get(id)
            .copied()
            .ok_or_else(|| Error::Data(format!("unknown terminal {id}")))
    }

    pub fn sort(&self, node: &Node) -> Result<&'a Sort> {
        self.sorts
            .get(&(&node.terminal, &node.sort))
            .copied()
            .ok_or_else(|| Error::Data(format!("unknown sort {node}")))
    }
}

/// Check every type invariant; violations are data, not failures. The empty
/// report means the network is internally consistent.
pub fn validate_network(network: &Network) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen_terminals = HashSet::new();
    for t in &network.terminals {
        if !seen_terminals.insert(&t.id) {
            out.push(Violation::error(&t.id, "duplicate terminal id"));
        }
        if !t.lat.is_finite() || !(-90.0..=90.0).contains(&t.lat) {
            out.push(Violation::error(&t.id, "latitude out of [-90, 90]"));
        }
        if !t.lon.is_finite() || !(-180.0..=180.0).contains(&t.lon) {
            out.push(Violation::error(&t.id, "longitude out of [-180, 180]"));
        }
    }

    let mut seen_sorts = HashSet::new();
    for s in &network.sorts {
        if !seen_sorts.insert((&s.terminal, &s.sort_id)) {
            out.push(Violation::error(
                format!("{}/{}", s.terminal, s.sort_id),
                "duplicate (terminal, sort) pair",
            ));
        }
        if !seen_terminals.contains(&s.terminal) {
            out.push(Violation::error(
                format!("{}/{}", s.terminal, s.sort_id),
                "sort references unknown terminal",
            ));
        }
        if s.dep_minutes >= MINUTES_PER_DAY as u32 {
            out.push(Violation::error(
                format!("{}/{}", s.terminal, s.sort_id),
                "dep_minutes out of [0, 1440)",
            ));
        }
        if s.arr_minutes >= MINUTES_PER_DAY as u32 {
            out.push(Violation::error(
                format!("{}/{}", s.terminal, s.sort_id),
                "arr_minutes out of [0, 1440)",
            ));
        }
    }

    let idx = NetworkIndex::build(network);
    let mut seen_loads = HashSet::new();
    for l in &network.loads {
        if !seen_loads.insert(&l.id) {
            out.push(Violation::error(&l.id, "duplicate load id"));
        }
        if l.departure < 0 {
            out.push(Violation::error(&l.id, "negative departure time"));
        }
        if l.due_day < day_of(l.departure) {
            out.push(Violation::error(&l.id, "due day before departure day"));
        }
        if !(l.volume >= 0.0) {
            out.push(Violation::error(&l.id, "negative volume"));
        }
        if !(l.capacity > 0.0) {
            out.push(Violation::error(&l.id, "nonpositive capacity"));
        }
        if l.volume > l.capacity {
            out.push(Violation::error(&l.id, "volume exceeds capacity"));
        }
        for (label, node) in [("origin", &l.origin), ("destination", &l.destination)] {
            if idx.sorts.get(&(&node.terminal, &node.sort)).is_none() {
                out.push(Violation::error(
                    &l.id,
                    format!("{label} sort {node} undeclared"),
                ));
            }
        }
        // The departure-vs-sort-window relation in the source material is
        // ambiguous, so a breach is surfaced as a warning, not an error.
        if let Ok(sort) = idx.sort(&l.origin) {
            let within_day = l.departure.rem_euclid(MINUTES_PER_DAY);
            if within_day < sort.dep_minutes as i64 {
                out.push(Violation::warning(
                    &l.id,
                    "departure earlier than origin sort's earliest departure",
                ));
            }
        }
    }

    out
}
