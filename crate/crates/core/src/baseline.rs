//! Baseline planners: direct trailer-per-load (TL) and a greedy
//! nearest-neighbor consolidation heuristic that pairs each departing load
//! with the closest feasible hub load, never chaining consolidations.

use crate::pathgen::PathKind;
use crate::scalar::CostScalar;
use crate::solver::{all_direct_plan, Instance, Plan, PlanChoice, SolveStats};

/// Every load runs direct on its own trailer.
pub fn plan_tl<C: CostScalar>(instance: &Instance<C>) -> Plan<C> {
    all_direct_plan(instance)
}

/// Greedy pairwise consolidation. Loads are processed in departure order;
/// each unconsumed load takes its nearest (by detour distance) consolidation
/// path whose hub load is still unconsumed and whose combined volume fits in
/// the larger of the two trailers. The larger trailer survives and runs the
/// last leg; ties keep the hub load's trailer. Consolidations never chain:
/// both loads of a pair leave the pool.
pub fn plan_nnch<C: CostScalar>(instance: &Instance<C>) -> Plan<C> {
    let n = instance.loads.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let la = &instance.loads[a];
        let lb = &instance.loads[b];
        la.departure.cmp(&lb.departure).then_with(|| la.id.cmp(&lb.id))
    });

    let mut consumed = vec![false; n];
    let mut choices: Vec<PlanChoice> = Vec::with_capacity(n);

    for &o in &order {
        if consumed[o] {
            continue;
        }
        // candidate consolidation paths with a remaining hub load
        let mut candidates: Vec<(usize, usize)> = instance.paths[o]
            .iter()
            .enumerate()
            .filter_map(|(pi, p)| match (p.kind, p.hub_load) {
                (PathKind::Consolidation, Some(h)) if !consumed[h] && h != o => Some((pi, h)),
                _ => None,
            })
            .collect();
        candidates.sort_by(|&(pa, ha), &(pb, hb)| {
            let da = instance.paths[o][pa].detour_miles;
            let db = instance.paths[o][pb].detour_miles;
            da.partial_cmp(&db)
                .unwrap()
                .then_with(|| instance.loads[ha].id.cmp(&instance.loads[hb].id))
        });

        let lo = &instance.loads[o];
        let mut paired = None;
        for (pi, h) in candidates {
            let lh = &instance.loads[h];
            if lo.volume + lh.volume <= lo.capacity.max(lh.capacity) {
                paired = Some((pi, h));
                break;
            }
        }

        match paired {
            Some((pi, h)) => {
                let survivor_is_hub = instance.loads[h].capacity >= instance.loads[o].capacity;
                // departing load takes the consolidation path; the hub load
                // stays on its direct path; exactly one trailer is activated
                choices.push(PlanChoice {
                    load: o,
                    path: pi,
                    activated: !survivor_is_hub,
                });
                choices.push(PlanChoice {
                    load: h,
                    path: 0,
                    activated: survivor_is_hub,
                });
                consumed[o] = true;
                consumed[h] = true;
            }
            None => {
                choices.push(PlanChoice {
                    load: o,
                    path: 0,
                    activated: true,
                });
                consumed[o] = true;
            }
        }
    }

    choices.sort_by_key(|c| c.load);
    let objective = instance.objective(&choices);
    Plan {
        choices,
        objective,
        optimal: false,
        stats: SolveStats::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Node;
    use crate::pathgen::PathKind;
    use crate::solver::{verify_plan, CapacityScope, InstLoad, InstPath};
    use std::collections::BTreeSet;

    struct Spec<'a> {
        loads: Vec<(&'a str, &'a str, i64, f64, f64)>,
        // per load: (last-leg terminal, hub load index or usize::MAX, detour, last)
        paths: Vec<Vec<(&'a str, usize, f64, f64)>>,
    }

    fn build(spec: Spec<'_>) -> Instance<f64> {
        let loads: Vec<InstLoad> = spec
            .loads
            .iter()
            .map(|(id, origin, dep, q, cap)| InstLoad {
                id: (*id).into(),
                origin: Node::new(*origin, "s"),
                departure: *dep,
                volume: *q,
                capacity: *cap,
            })
            .collect();
        let mut group_nodes: BTreeSet<Node> = BTreeSet::new();
        for row in &spec.paths {
            for (t, _, _, _) in row {
                group_nodes.insert(Node::new(*t, "s"));
            }
        }
        let groups: Vec<Node> = group_nodes.into_iter().collect();
        let gidx = |t: &str| groups.iter().position(|n| n.terminal.as_str() == t).unwrap();
        let paths = spec
            .paths
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(i, (t, hub, detour, last))| InstPath {
                        kind: if i == 0 {
                            PathKind::Direct
                        } else {
                            PathKind::Consolidation
                        },
                        group: gidx(t),
                        hub_load: (*hub != usize::MAX).then_some(*hub),
                        detour_cost: *detour,
                        last_leg_cost: *last,
                        detour_miles: *detour,
                        last_leg_miles: *last,
                    })
                    .collect()
            })
            .collect();
        let hub_groups = (0..groups.len()).collect();
        Instance {
            loads,
            paths,
            groups,
            hub_groups,
        }
    }

    const NONE: usize = usize::MAX;

    #[test]
    fn without_consolidation_paths_nnch_equals_tl() {
        let inst = build(Spec {
            loads: vec![("l1", "A", 0, 30.0, 100.0), ("l2", "B", 10, 40.0, 100.0)],
            paths: vec![vec![("A", NONE, 0.0, 100.0)], vec![("B", NONE, 0.0, 150.0)]],
        });
        let tl = plan_tl(&inst);
        let nnch = plan_nnch(&inst);
        assert_eq!(tl.objective, 250.0);
        assert_eq!(nnch.objective, 250.0);
        assert_eq!(nnch.choices, tl.choices);
        assert!(verify_plan(&inst, &nnch, CapacityScope::All).is_empty());
    }

    #[test]
    fn pairs_two_loads_and_drops_one_trailer() {
        // l1 departs first and can detour to l2's origin for 10 miles.
        let inst = build(Spec {
            loads: vec![("l1", "A", 0, 30.0, 100.0), ("l2", "B", 100, 40.0, 120.0)],
            paths: vec![
                vec![("A", NONE, 0.0, 100.0), ("B", 1, 10.0, 100.0)],
                vec![("B", NONE, 0.0, 100.0)],
            ],
        });
        let nnch = plan_nnch(&inst);
        // l1 rides through B (detour 10); l2's larger trailer survives.
        assert_eq!(nnch.objective, 110.0);
        assert_eq!(nnch.choices[0], PlanChoice { load: 0, path: 1, activated: false });
        assert_eq!(nnch.choices[1], PlanChoice { load: 1, path: 0, activated: true });
        assert!(verify_plan(&inst, &nnch, CapacityScope::All).is_empty());
        assert!(nnch.objective <= plan_tl(&inst).objective);
    }

    #[test]
    fn survivor_is_larger_trailer() {
        // departing load has the strictly larger trailer, so it keeps running
        let inst = build(Spec {
            loads: vec![("l1", "A", 0, 30.0, 160.0), ("l2", "B", 100, 40.0, 100.0)],
            paths: vec![
                vec![("A", NONE, 0.0, 100.0), ("B", 1, 10.0, 100.0)],
                vec![("B", NONE, 0.0, 100.0)],
            ],
        });
        let nnch = plan_nnch(&inst);
        assert_eq!(nnch.choices[0], PlanChoice { load: 0, path: 1, activated: true });
        assert_eq!(nnch.choices[1], PlanChoice { load: 1, path: 0, activated: false });
        assert!(verify_plan(&inst, &nnch, CapacityScope::All).is_empty());
    }

    #[test]
    fn consumed_nearest_hub_falls_through_to_next() {
        // l1 departs first and grabs hub load l2; l3 would prefer l2 (detour
        // 5) but must fall back to pairing with l4 (detour 50).
        let inst = build(Spec {
            loads: vec![
                ("l1", "A", 0, 30.0, 100.0),
                ("l2", "B", 200, 40.0, 100.0),
                ("l3", "C", 10, 30.0, 100.0),
                ("l4", "E", 300, 20.0, 100.0),
            ],
            paths: vec![
                vec![("A", NONE, 0.0, 100.0), ("B", 1, 10.0, 100.0)],
                vec![("B", NONE, 0.0, 100.0)],
                vec![("C", NONE, 0.0, 100.0), ("B", 1, 5.0, 100.0), ("E", 3, 50.0, 100.0)],
                vec![("E", NONE, 0.0, 100.0)],
            ],
        });
        let nnch = plan_nnch(&inst);
        assert!(verify_plan(&inst, &nnch, CapacityScope::All).is_empty());
        // l1 paired with l2 (detour 10), l3 paired with l4 (detour 50)
        assert_eq!(nnch.choices[0].path, 1);
        assert!(!nnch.choices[0].activated);
        assert_eq!(nnch.choices[2].path, 2);
        assert!(!nnch.choices[2].activated);
        assert_eq!(nnch.objective, 10.0 + 100.0 + 50.0 + 100.0);
    }

    #[test]
    fn capacity_overflow_forces_direct() {
        let inst = build(Spec {
            loads: vec![("l1", "A", 0, 70.0, 100.0), ("l2", "B", 100, 60.0, 100.0)],
            paths: vec![
                vec![("A", NONE, 0.0, 100.0), ("B", 1, 10.0, 100.0)],
                vec![("B", NONE, 0.0, 100.0)],
            ],
        });
        // 70 + 60 = 130 > max(100, 100): no pairing possible
        let nnch = plan_nnch(&inst);
        assert_eq!(nnch.objective, 200.0);
        assert!(nnch.choices.iter().all(|c| c.path == 0 && c.activated));
    }
}
