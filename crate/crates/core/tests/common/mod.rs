//! Independent oracles and random-instance generators for the acceptance
//! suite. Everything here is deliberately implemented from first principles,
//! separately from the library's algorithms.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use consolidator::cluster::EventPoint;
use consolidator::mining::Transaction;
use consolidator::model::{LoadId, Node};
use consolidator::pathgen::PathKind;
use consolidator::solver::{InstLoad, InstPath, Instance};

// ---------------------------------------------------------------------------
// Density clustering oracle: quadratic neighbor scans, explicit core-point
// components, first-come border assignment in canonical (sorted id) order.
// ---------------------------------------------------------------------------

pub type Labeling = (BTreeSet<BTreeSet<LoadId>>, BTreeSet<LoadId>);

pub fn dbscan_oracle(points: &[EventPoint], eps: f64, min_pts: usize) -> Labeling {
    let mut sorted: Vec<&EventPoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.load_id.cmp(&b.load_id));
    let n = sorted.len();

    let wrap = |a: f64, b: f64| -> f64 {
        let d = (a - b).abs() % TAU;
        d.min(TAU - d)
    };
    let neighbor = |i: usize, j: usize| -> bool {
        sorted[i].due_day == sorted[j].due_day
            && wrap(sorted[i].bearing, sorted[j].bearing) <= eps
    };
    let neighbor_count =
        |i: usize| -> usize { (0..n).filter(|&j| neighbor(i, j)).count() };

    let core: Vec<bool> = (0..n).map(|i| neighbor_count(i) >= min_pts).collect();

    // connected components of the core-core neighbor graph
    let mut component = vec![usize::MAX; n];
    let mut n_components = 0;
    for i in 0..n {
        if !core[i] || component[i] != usize::MAX {
            continue;
        }
        let cid = n_components;
        n_components += 1;
        let mut stack = vec![i];
        component[i] = cid;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if core[v] && component[v] == usize::MAX && neighbor(u, v) {
                    component[v] = cid;
                    stack.push(v);
                }
            }
        }
    }

    // border points join the earliest-formed component among their core
    // neighbors; everything else is noise
    let mut clusters: Vec<BTreeSet<LoadId>> = vec![BTreeSet::new(); n_components];
    let mut noise = BTreeSet::new();
    for i in 0..n {
        if core[i] {
            clusters[component[i]].insert(sorted[i].load_id.clone());
            continue;
        }
        let owner = (0..n)
            .filter(|&j| core[j] && neighbor(i, j))
            .map(|j| component[j])
            .min();
        match owner {
            Some(cid) => {
                clusters[cid].insert(sorted[i].load_id.clone());
            }
            None => {
                noise.insert(sorted[i].load_id.clone());
            }
        }
    }
    (clusters.into_iter().filter(|c| !c.is_empty()).collect(), noise)
}

pub fn labeling_of(result: &consolidator::cluster::ClusteringResult) -> Labeling {
    let clusters = result
        .clusters
        .iter()
        .map(|c| c.members.iter().map(|m| m.load_id.clone()).collect())
        .collect();
    let noise = result.noise.iter().cloned().collect();
    (clusters, noise)
}

// ---------------------------------------------------------------------------
// Frequent itemset oracle: enumerate the full powerset of the item universe
// and count supports by direct subset scans.
// ---------------------------------------------------------------------------

pub fn itemset_oracle(transactions: &[Transaction], min_sup: u32) -> Vec<(Transaction, u32)> {
    let universe: Vec<_> = transactions
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert!(universe.len() <= 16, "oracle is exponential in the universe");
    let mut out = Vec::new();
    for mask in 1u32..(1 << universe.len()) {
        let set: Transaction = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, item)| item.clone())
            .collect();
        let support = transactions.iter().filter(|t| set.is_subset(t)).count() as u32;
        if support >= min_sup {
            out.push((set, support));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

// ---------------------------------------------------------------------------
// Random optimization instances
// ---------------------------------------------------------------------------

pub fn random_instance(
    seed: u64,
    max_loads: usize,
    max_cons_paths: usize,
) -> Instance<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_loads);
    let n_groups = rng.gen_range(1..=n);
    let groups: Vec<Node> = (0..n_groups).map(|g| Node::new(format!("g{g:02}"), "s")).collect();

    let mut loads = Vec::with_capacity(n);
    for i in 0..n {
        let capacity = if rng.gen_bool(0.5) { 100.0 } else { 160.0 };
        loads.push(InstLoad {
            id: format!("l{i:02}").as_str().into(),
            origin: groups[rng.gen_range(0..n_groups)].clone(),
            departure: rng.gen_range(0..1000),
            volume: rng.gen_range(10..=95) as f64,
            capacity,
        });
    }

    let group_of = |load: &InstLoad, groups: &[Node]| -> usize {
        groups.iter().position(|g| g == &load.origin).unwrap()
    };

    let mut paths: Vec<Vec<InstPath<i64>>> = Vec::with_capacity(n);
    for i in 0..n {
        let gi = group_of(&loads[i], &groups);
        let mut row = vec![InstPath {
            kind: PathKind::Direct,
            group: gi,
            hub_load: None,
            detour_cost: 0,
            last_leg_cost: rng.gen_range(50..=500),
            detour_miles: 0.0,
            last_leg_miles: 0.0,
        }];
        let mut others: Vec<usize> = (0..n)
            .filter(|&j| j != i && group_of(&loads[j], &groups) != gi)
            .collect();
        while row.len() <= max_cons_paths && !others.is_empty() {
            let j = others.remove(rng.gen_range(0..others.len()));
            if !rng.gen_bool(0.6) {
                continue;
            }
            let detour = rng.gen_range(1..=100);
            let last = rng.gen_range(40..=500);
            row.push(InstPath {
                kind: PathKind::Consolidation,
                group: group_of(&loads[j], &groups),
                hub_load: Some(j),
                detour_cost: detour,
                last_leg_cost: last,
                detour_miles: detour as f64,
                last_leg_miles: last as f64,
            });
        }
        paths.push(row);
    }

    // miles mirror costs so distance metrics stay meaningful
    for row in &mut paths {
        for p in row {
            p.detour_miles = p.detour_cost as f64;
            p.last_leg_miles = p.last_leg_cost as f64;
        }
    }

    let hub_groups: BTreeSet<usize> = (0..n_groups).collect();
    Instance {
        loads,
        paths,
        groups,
        hub_groups,
    }
}

/// Random instance whose consolidation paths only link loads inside blocks
/// of at most `block` loads, mirroring how real destination-days decompose
/// into small independent corridors.
pub fn random_blocked_instance(
    seed: u64,
    max_loads: usize,
    block: usize,
    max_cons_paths: usize,
) -> Instance<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_loads);

    // consecutive blocks of random size; each load gets its own group so any
    // pair inside a block may be linked
    let mut block_of = Vec::with_capacity(n);
    let mut start = 0;
    let mut b = 0;
    while start < n {
        let size = rng.gen_range(2..=block).min(n - start);
        for _ in 0..size {
            block_of.push(b);
        }
        start += size;
        b += 1;
    }

    let groups: Vec<Node> = (0..n).map(|g| Node::new(format!("g{g:02}"), "s")).collect();
    let mut loads = Vec::with_capacity(n);
    for i in 0..n {
        let capacity = if rng.gen_bool(0.5) { 100.0 } else { 160.0 };
        loads.push(InstLoad {
            id: format!("l{i:02}").as_str().into(),
            origin: groups[i].clone(),
            departure: rng.gen_range(0..1000),
            volume: rng.gen_range(10..=95) as f64,
            capacity,
        });
    }

    let mut paths: Vec<Vec<InstPath<i64>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![InstPath {
            kind: PathKind::Direct,
            group: i,
            hub_load: None,
            detour_cost: 0,
            last_leg_cost: rng.gen_range(50..=500),
            detour_miles: 0.0,
            last_leg_miles: 0.0,
        }];
        let mut others: Vec<usize> = (0..n)
            .filter(|&j| j != i && block_of[j] == block_of[i])
            .collect();
        while row.len() <= max_cons_paths && !others.is_empty() {
            let j = others.remove(rng.gen_range(0..others.len()));
            if !rng.gen_bool(0.7) {
                continue;
            }
            let detour = rng.gen_range(1..=100);
            let last = rng.gen_range(40..=500);
            row.push(InstPath {
                kind: PathKind::Consolidation,
                group: j,
                hub_load: Some(j),
                detour_cost: detour,
                last_leg_cost: last,
                detour_miles: detour as f64,
                last_leg_miles: last as f64,
            });
        }
        paths.push(row);
    }

    for row in &mut paths {
        for p in row {
            p.detour_miles = p.detour_cost as f64;
            p.last_leg_miles = p.last_leg_cost as f64;
        }
    }

    Instance {
        loads,
        paths,
        groups,
        hub_groups: (0..n).collect(),
    }
}

pub fn to_f64_instance(inst: &Instance<i64>) -> Instance<f64> {
    Instance {
        loads: inst.loads.clone(),
        paths: inst
            .paths
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| InstPath {
                        kind: p.kind,
                        group: p.group,
                        hub_load: p.hub_load,
                        detour_cost: p.detour_cost as f64,
                        last_leg_cost: p.last_leg_cost as f64,
                        detour_miles: p.detour_miles,
                        last_leg_miles: p.last_leg_miles,
                    })
                    .collect()
            })
            .collect(),
        groups: inst.groups.clone(),
        hub_groups: inst.hub_groups.clone(),
    }
}

/// Random clustering inputs: up to `max_points` event points over a few due
/// days with bearings drawn from a mix of tight bundles and uniform noise.
pub fn random_event_points(seed: u64, max_points: usize) -> Vec<EventPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_points);
    let n_bundles = rng.gen_range(1..=5);
    let centers: Vec<f64> = (0..n_bundles).map(|_| rng.gen_range(0.0..TAU)).collect();
    (0..n)
        .map(|i| {
            let bearing = if rng.gen_bool(0.7) {
                let c = centers[rng.gen_range(0..centers.len())];
                (c + rng.gen_range(-0.15..0.15)).rem_euclid(TAU)
            } else {
                rng.gen_range(0.0..TAU)
            };
            EventPoint {
                load_id: format!("l{i:03}").as_str().into(),
                origin: Node::new(format!("t{i:03}"), "s"),
                due_day: rng.gen_range(0..3),
                bearing,
            }
        })
        .collect()
}

/// Random transactions over a small item universe for the mining oracle.
pub fn random_transactions(seed: u64, max_items: usize, max_txns: usize) -> Vec<Transaction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(2..=max_items);
    let universe: Vec<_> = (0..k)
        .map(|i| consolidator::mining::AbstractPoint {
            origin: Node::new(format!("i{i:02}"), "s"),
            due_dow: 0,
            transit_days: 0,
        })
        .collect();
    let n = rng.gen_range(1..=max_txns);
    (0..n)
        .map(|_| {
            universe
                .iter()
                .filter(|_| rng.gen_bool(0.35))
                .cloned()
                .collect()
        })
        .filter(|t: &Transaction| !t.is_empty())
        .collect()
}

/// Canonical map view of mined supports for comparison.
pub fn support_map(sets: &[(Transaction, u32)]) -> BTreeMap<Transaction, u32> {
    sets.iter().cloned().collect()
}
