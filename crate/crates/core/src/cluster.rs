//! Spatio-temporal DBSCAN over partial loads sharing a destination.
//!
//! Two event points are neighbors when they share a due date and their route
//! bearings are within `eps` radians (wrapped difference). Because the
//! temporal condition is exact equality, clustering runs independently per
//! due day, which is equivalent to the joint predicate and trivially
//! parallel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geo::{self, BearingAngle, ReferenceDirection};
use crate::model::{Load, LoadId, Node, NetworkIndex};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventPoint {
    pub load_id: LoadId,
    pub origin: Node,
    pub due_day: i64,
    /// Route bearing of origin -> destination, radians in [0, 2pi).
    pub bearing: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cluster {
    pub destination: Node,
    pub due_day: i64,
    /// Member points, sorted by load id.
    pub members: Vec<EventPoint>,
}

impl Cluster {
    pub fn member_ids(&self) -> Vec<&LoadId> {
        self.members.iter().map(|m| &m.load_id).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub load_id: LoadId,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub clusters: Vec<Cluster>,
    /// Points that belong to no cluster; they may still travel direct.
    pub noise: Vec<LoadId>,
}

/// One event point per load destined for `destination`; loads whose origin
/// terminal coincides with the destination terminal have no bearing and are
/// reported as skipped.
pub fn build_event_points(
    loads: &[&Load],
    destination: &Node,
    index: &NetworkIndex<'_>,
    reference: ReferenceDirection,
) -> Result<(Vec<EventPoint>, Vec<SkippedPoint>)> {
    let dest_terminal = index.terminal(&destination.terminal)?;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for load in loads {
        debug_assert_eq!(&load.destination, destination);
        if load.origin.terminal == destination.terminal {
            skipped.push(SkippedPoint {
                load_id: load.id.clone(),
                reason: "origin terminal coincides with destination terminal".into(),
            });
            continue;
        }
        let origin_terminal = index.terminal(&load.origin.terminal)?;
        match geo::terminal_bearing(origin_terminal, dest_terminal, reference) {
            Ok(bearing) => points.push(EventPoint {
                load_id: load.id.clone(),
                origin: load.origin.clone(),
                due_day: load.due_day,
                bearing: bearing.radians(),
            }),
            Err(_) => skipped.push(SkippedPoint {
                load_id: load.id.clone(),
                reason: "degenerate bearing (coincident coordinates)".into(),
            }),
        }
    }
    Ok((points, skipped))
}

/// DBSCAN with the same-due-day + bearing-within-eps neighborhood predicate.
///
/// Deterministic under input permutation: points are visited in canonical
/// (sorted by load id) order, and cluster membership is canonicalized.
pub fn st_dbscan(
    points: &[EventPoint],
    destination: &Node,
    eps: f64,
    min_pts: usize,
) -> ClusteringResult {
    assert!(eps > 0.0, "eps must be positive");
    assert!(min_pts >= 2, "min_pts must be at least 2");

    let mut by_day: BTreeMap<i64, Vec<&EventPoint>> = BTreeMap::new();
    for p in points {
        by_day.entry(p.due_day).or_default().push(p);
    }

    let mut clusters = Vec::new();
    let mut noise = Vec::new();
    for (due_day, mut group) in by_day {
        group.sort_by(|a, b| a.load_id.cmp(&b.load_id));
        let (day_clusters, day_noise) = dbscan_group(&group, eps, min_pts);
        for members in day_clusters {
            clusters.push(Cluster {
                destination: destination.clone(),
                due_day,
                members: members.into_iter().cloned().collect(),
            });
        }
        noise.extend(day_noise.into_iter().cloned());
    }
    ClusteringResult { clusters, noise }
}

fn dbscan_group<'a>(
    group: &[&'a EventPoint],
    eps: f64,
    min_pts: usize,
) -> (Vec<Vec<&'a EventPoint>>, Vec<&'a LoadId>) {
    const UNVISITED: usize = usize::MAX;
    const NOISE: usize = usize::MAX - 1;
    let n = group.len();
    let mut label = vec![UNVISITED; n];

    let neighbors = |i: usize| -> Vec<usize> {
        let bi = BearingAngle::new(group[i].bearing);
        (0..n)
            .filter(|&j| geo::angle_distance(bi, BearingAngle::new(group[j].bearing)) <= eps)
            .collect()
    };

    let mut next_cluster = 0usize;
    for i in 0..n {
        if label[i] != UNVISITED {
            continue;
        }
        let seeds = neighbors(i);
        if seeds.len() < min_pts {
            label[i] = NOISE;
            continue;
        }
        let cid = next_cluster;
        next_cluster += 1;
        label[i] = cid;
        let mut queue: Vec<usize> = seeds;
        let mut qi = 0;
        while qi < queue.len() {
            let j = queue[qi];
            qi += 1;
            if label[j] == NOISE {
                label[j] = cid; // border point
            }
            if label[j] != UNVISITED {
                continue;
            }
            label[j] = cid;
            let jn = neighbors(j);
            if jn.len() >= min_pts {
                queue.extend(jn);
            }
        }
    }

    let mut clusters = vec![Vec::new(); next_cluster];
    let mut noise = Vec::new();
    for i in 0..n {
        match label[i] {
            NOISE => noise.push(&group[i].load_id),
            cid => clusters[cid].push(group[i]),
        }
    }
    // Members arrive in canonical order already; keep clusters ordered by
    // their smallest member id.
    clusters.sort_by(|a, b| a[0].load_id.cmp(&b[0].load_id));
    (clusters, noise)
}
