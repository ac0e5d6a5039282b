//! Seeded synthetic freight network generator.
//!
//! The generator builds a continental-US-style network with destination
//! terminals of three volume tiers. Each destination is fed by recurring
//! "corridor pools": groups of origin terminals placed along nearby bearings
//! that ship on the same weekdays with aligned schedules, so the history
//! contains mineable consolidation structure. Scattered non-recurring
//! origins add realistic noise.
//!
//! The module also builds the small hand-checkable worked example used by the
//! golden mining tests: ten origin terminals with a travel-time matrix that
//! realizes an exact, known pairwise-feasibility table.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mining::{MatrixTravel, Transaction};
use crate::model::{day_of, Load, Network, Node, Sort, Terminal, TerminalId, MINUTES_PER_DAY};

/// Volume-tier profile: how many destinations of this tier exist and how much
/// recurring structure feeds each of them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TierProfile {
    pub name: String,
    pub destinations: usize,
    pub pools_per_destination: usize,
    /// Origin terminals per recurring pool.
    pub pool_size: usize,
    /// Scattered non-recurring origin terminals per destination.
    pub extra_origins: usize,
    /// Probability an extra origin ships on a given weekday.
    pub extra_load_prob: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Horizon in days; day 0 is a Monday.
    pub days: u32,
    pub tiers: Vec<TierProfile>,
    /// Probability a pool member ships on one of its active days.
    pub pool_attendance: f64,
    /// Probability a pool load is a partial (under-utilized) load.
    pub pool_partial_prob: f64,
    /// Probability a scattered load is partial.
    pub extra_partial_prob: f64,
    pub small_capacity: f64,
    pub large_capacity: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            days: 60,
            tiers: vec![
                TierProfile {
                    name: "high".into(),
                    destinations: 3,
                    pools_per_destination: 2,
                    pool_size: 6,
                    extra_origins: 4,
                    extra_load_prob: 0.5,
                },
                TierProfile {
                    name: "mid".into(),
                    destinations: 3,
                    pools_per_destination: 1,
                    pool_size: 5,
                    extra_origins: 3,
                    extra_load_prob: 0.5,
                },
                TierProfile {
                    name: "low".into(),
                    destinations: 3,
                    pools_per_destination: 1,
                    pool_size: 3,
                    extra_origins: 2,
                    extra_load_prob: 0.4,
                },
            ],
            pool_attendance: 0.85,
            // Together with the extra-origin mix this lands near a 0.39
            // overall partial fraction.
            pool_partial_prob: 0.45,
            extra_partial_prob: 0.20,
            small_capacity: 100.0,
            large_capacity: 160.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub network: Network,
    /// Destination terminal -> tier name.
    pub tiers: BTreeMap<TerminalId, String>,
}

const MILES_PER_DEG_LAT: f64 = 69.172;

/// Approximate placement `r_miles` away from `(lat, lon)` toward compass-like
/// angle `theta` (0 = north, counterclockwise in this local frame).
fn place(lat: f64, lon: f64, theta: f64, r_miles: f64) -> (f64, f64) {
    let new_lat = lat + (r_miles / MILES_PER_DEG_LAT) * theta.cos();
    let new_lon = lon + (r_miles / (MILES_PER_DEG_LAT * new_lat.to_radians().cos())) * theta.sin();
    (new_lat, new_lon)
}

/// Bearing offsets of a pool's members relative to the pool's corridor angle.
/// Members come in tight sub-groups separated by gaps of ~0.24 and ~0.29
/// radians, so growing the clustering radius from 0.20 through 0.25 to 0.30
/// merges progressively more of the pool.
fn pool_offsets(size: usize) -> Vec<f64> {
    const BASE: [f64; 6] = [0.0, 0.05, 0.29, 0.34, 0.63, 0.68];
    (0..size).map(|i| BASE[i % BASE.len()] + (i / BASE.len()) as f64 * 1.2).collect()
}

struct Builder {
    rng: ChaCha8Rng,
    network: Network,
    tiers: BTreeMap<TerminalId, String>,
    next_load: u64,
}

impl Builder {
    /// Three daily sort windows per terminal, each 180-220 minutes wide.
    fn add_terminal(&mut self, id: &str, lat: f64, lon: f64) -> TerminalId {
        let tid = TerminalId::from(id);
        self.network.terminals.push(Terminal {
            id: tid.clone(),
            lat,
            lon,
        });
        for (sort, dep, arr) in [("day", 480, 700), ("twilight", 840, 1030), ("night", 1100, 1290)]
        {
            self.network.sorts.push(Sort {
                terminal: tid.clone(),
                sort_id: sort.into(),
                dep_minutes: dep,
                arr_minutes: arr,
            });
        }
        tid
    }

    fn add_load(
        &mut self,
        origin: Node,
        destination: Node,
        day: u32,
        dep_window_start: u32,
        transit_days: i64,
        partial_prob: f64,
        small_cap: f64,
        large_cap: f64,
    ) {
        let jitter_max = (1439 - dep_window_start as i64).min(540);
        let jitter = self.rng.gen_range(0..=jitter_max);
        let departure = day as i64 * MINUTES_PER_DAY + dep_window_start as i64 + jitter;
        let (trailer_type, capacity) = if self.rng.gen_bool(0.5) {
            ("pup", small_cap)
        } else {
            ("van", large_cap)
        };
        let partial = self.rng.gen_bool(partial_prob);
        let utilization = if partial {
            self.rng.gen_range(0.25..0.78)
        } else {
            self.rng.gen_range(0.82..0.99)
        };
        self.next_load += 1;
        self.network.loads.push(Load {
            id: format!("L{:06}", self.next_load).as_str().into(),
            origin,
            destination,
            departure,
            due_day: day as i64 + transit_days,
            volume: utilization * capacity,
            capacity,
            trailer_type: trailer_type.into(),
        });
    }
}

/// Generate a seeded synthetic dataset. Identical configs produce identical
/// datasets.
pub fn generate(config: &GenConfig) -> Dataset {
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        network: Network::default(),
        tiers: BTreeMap::new(),
        next_load: 0,
    };

    struct Pool {
        members: Vec<Node>,
        sort_start: u32,
    }
    struct DestPlan {
        destination: Node,
        pools: Vec<Pool>,
        extras: Vec<Node>,
        extra_load_prob: f64,
    }

    let mut plans: Vec<DestPlan> = Vec::new();
    for tier in &config.tiers {
        for d in 0..tier.destinations {
            let lat = b.rng.gen_range(31.0..43.0);
            let lon = b.rng.gen_range(-112.0..-78.0);
            let dest_id = b.add_terminal(&format!("dst-{}-{d}", tier.name), lat, lon);
            b.tiers.insert(dest_id.clone(), tier.name.clone());
            let destination = Node::new(dest_id.clone(), "day");

            let mut pools = Vec::new();
            for p in 0..tier.pools_per_destination {
                let corridor = b.rng.gen_range(0.0..TAU);
                let sort_start = if b.rng.gen_bool(0.5) { 480 } else { 840 };
                let mut members = Vec::new();
                for (k, offset) in pool_offsets(tier.pool_size).iter().enumerate() {
                    let r = b.rng.gen_range(140.0..220.0);
                    let (olat, olon) = place(lat, lon, corridor + offset, r);
                    let oid = b.add_terminal(
                        &format!("org-{}-{d}-p{p}-{k}", tier.name),
                        olat,
                        olon,
                    );
                    let sort = if sort_start == 480 { "day" } else { "twilight" };
                    members.push(Node::new(oid, sort));
                }
                pools.push(Pool {
                    members,
                    sort_start,
                });
            }

            let mut extras = Vec::new();
            for k in 0..tier.extra_origins {
                let theta = b.rng.gen_range(0.0..TAU);
                let r = b.rng.gen_range(100.0..400.0);
                let (olat, olon) = place(lat, lon, theta, r);
                let oid = b.add_terminal(&format!("ext-{}-{d}-{k}", tier.name), olat, olon);
                extras.push(Node::new(oid, "day"));
            }
            plans.push(DestPlan {
                destination,
                pools,
                extras,
                extra_load_prob: tier.extra_load_prob,
            });
        }
    }

    for day in 0..config.days {
        let weekday = day % 7 < 5;
        if !weekday {
            continue;
        }
        for plan in &plans {
            for pool in &plan.pools {
                for member in pool.members.clone() {
                    if b.rng.gen_bool(config.pool_attendance) {
                        b.add_load(
                            member,
                            plan.destination.clone(),
                            day,
                            pool.sort_start,
                            1,
                            config.pool_partial_prob,
                            config.small_capacity,
                            config.large_capacity,
                        );
                    }
                }
            }
            for extra in plan.extras.clone() {
                if b.rng.gen_bool(plan.extra_load_prob) {
                    b.add_load(
                        extra,
                        plan.destination.clone(),
                        day,
                        480,
                        1,
                        config.extra_partial_prob,
                        config.small_capacity,
                        config.large_capacity,
                    );
                }
            }
        }
    }

    Dataset {
        network: b.network,
        tiers: b.tiers,
    }
}

/// Split loads chronologically: the last `test_weeks` full weeks of departure
/// days form the test set; everything earlier is training history.
pub fn split_train_test(network: &Network, test_weeks: u32) -> (Vec<Load>, Vec<Load>) {
    let max_day = network
        .loads
        .iter()
        .map(|l| day_of(l.departure))
        .max()
        .unwrap_or(0);
    let cutoff = max_day + 1 - 7 * test_weeks as i64;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for l in &network.loads {
        if day_of(l.departure) < cutoff {
            train.push(l.clone());
        } else {
            test.push(l.clone());
        }
    }
    (train, test)
}

// ---------------------------------------------------------------------------
// Worked example
// ---------------------------------------------------------------------------

/// The hand-checkable mining fixture: ten origin terminals p1..p10, seven
/// historical cluster transactions, and a travel-time matrix constructed to
/// realize a specific known pairwise-feasibility table.
pub struct WorkedExample {
    pub network: Network,
    pub travel: MatrixTravel,
    /// Seven cluster transactions over the ten origins (one group: same
    /// destination, same day of week).
    pub transactions: Vec<Transaction>,
}

/// The feasibility table realized by the worked example's travel matrix:
/// `(i, [j...])` means origin `p{i}` can feed a hub at each `p{j}`.
pub fn worked_example_feasible_pairs() -> Vec<(u32, Vec<u32>)> {
    vec![
        (1, vec![3, 4, 6, 7, 8]),
        (2, vec![3, 4, 7, 9]),
        (3, vec![4, 5, 6]),
        (4, vec![7]),
        (5, vec![8, 9, 10]),
        (6, vec![9, 10]),
        (7, vec![9]),
    ]
}

/// The seven historical clusters as lists of origin indices.
pub fn worked_example_clusters() -> Vec<Vec<u32>> {
    vec![
        vec![7, 5, 8, 10],
        vec![10, 8, 5, 2, 9],
        vec![8, 3, 10, 6, 1, 4],
        vec![4, 5, 2, 9],
        vec![7, 6, 3],
        vec![3, 6, 5, 9],
        vec![1, 7, 10, 2, 8],
    ]
}

pub fn make_worked_example() -> WorkedExample {
    let mut network = Network::default();
    // One sort per origin, staggered so origin windows are
    // dep_i = 100 i, arr_i = 100 i + 50.
    for i in 1..=10u32 {
        let tid = TerminalId::from(format!("p{i}").as_str());
        network.terminals.push(Terminal {
            id: tid.clone(),
            lat: 30.0 + i as f64,
            lon: -90.0,
        });
        network.sorts.push(Sort {
            terminal: tid,
            sort_id: "s".into(),
            dep_minutes: 100 * i,
            arr_minutes: 100 * i + 50,
        });
    }

    // Travel times: for a feasible (i, j) the trip fits the window with one
    // minute to spare; otherwise it misses it by one minute (or is simply
    // enormous when even zero travel could not miss it).
    let feasible = worked_example_feasible_pairs();
    let is_feasible = |i: u32, j: u32| {
        feasible
            .iter()
            .any(|(a, bs)| *a == i && bs.contains(&j))
    };
    let mut travel = MatrixTravel::default();
    for i in 1..=10u32 {
        for j in 1..=10u32 {
            if i == j {
                continue;
            }
            let gap = (100 * j + 50) as f64 - (100 * i) as f64; // arr_j - dep_i
            let minutes = if is_feasible(i, j) {
                gap - 1.0
            } else if gap + 1.0 > 0.0 {
                gap + 1.0
            } else {
                1.0e6
            };
            travel.minutes.insert(
                (
                    TerminalId::from(format!("p{i}").as_str()),
                    TerminalId::from(format!("p{j}").as_str()),
                ),
                minutes,
            );
        }
    }

    let transactions = worked_example_clusters()
        .into_iter()
        .map(|members| {
            members
                .into_iter()
                .map(|i| crate::mining::AbstractPoint {
                    origin: Node::new(format!("p{i}").as_str(), "s"),
                    due_dow: 0,
                    transit_days: 0,
                })
                .collect()
        })
        .collect();

    WorkedExample {
        network,
        travel,
        transactions,
    }
}
