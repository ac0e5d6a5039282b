//! Plan evaluation and cross-method comparison metrics.
//!
//! Metrics are computed per destination-day record and aggregated per volume
//! tier from summed totals (never averages of averages). Travel distance and
//! cost reduction are normalized against the trailer-per-load (TL) baseline;
//! undefined ratios (for example, no partial loads) surface as nulls rather
//! than zeros.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::mining::{AbstractPoint, Transaction};
use crate::model::Node;
use crate::pathgen::PathKind;
use crate::solver::{Instance, Plan};

pub const METHOD_EXACT: &str = "exact";
pub const METHOD_NNCH: &str = "nnch";
pub const METHOD_TL: &str = "tl";

/// Per-method raw tallies for one destination-day.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MethodDay {
    /// Detour miles of chosen paths plus last-leg miles of activated trailers.
    pub miles: f64,
    pub cost: f64,
    /// Loads whose trailer does not run the last leg.
    pub n_cut: usize,
    /// Distinct loads touched by consolidation: choosers plus their hub loads.
    pub n_covered: usize,
    /// Distinct last-leg origins receiving at least one consolidated load.
    pub hubs_used: usize,
    /// Sum over used hubs of the loads routed through them (the hub's own
    /// direct loads included).
    pub loads_through_hubs: usize,
    /// Sum and count of per-consolidation-route historical pair frequencies,
    /// as fractions of the group's training transactions.
    pub path_freq_sum: f64,
    pub path_freq_n: usize,
}

/// One destination-day evaluation record across all methods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DayRecord {
    pub destination: Node,
    pub due_day: i64,
    pub tier: String,
    pub n_partial: usize,
    pub distinct_partial_origins: usize,
    pub n_full: usize,
    /// Direct miles and cost of the full loads, added to every method.
    pub full_miles: f64,
    pub full_cost: f64,
    /// Consolidation paths surviving the mined-hub filter vs without it.
    pub n_paths_filtered: usize,
    pub n_paths_unfiltered: usize,
    /// Whether the exact method proved optimality.
    pub exact_optimal: bool,
    pub methods: BTreeMap<String, MethodDay>,
}

/// Total miles and cost of a plan: detour legs of every chosen path plus
/// last legs of activated trailers.
pub fn distance_and_cost(instance: &Instance<f64>, plan: &Plan<f64>) -> (f64, f64) {
    let mut miles = 0.0;
    let mut cost = 0.0;
    for ch in &plan.choices {
        let p = &instance.paths[ch.load][ch.path];
        miles += p.detour_miles;
        cost += p.detour_cost;
        if ch.activated {
            miles += p.last_leg_miles;
            cost += p.last_leg_cost;
        }
    }
    (miles, cost)
}

/// Evaluate one method's plan. `abstract_points` aligns with
/// `instance.loads`; `transactions` is the training history of the
/// destination/day-of-week group (used for the historical path frequency).
pub fn evaluate_method(
    instance: &Instance<f64>,
    plan: &Plan<f64>,
    abstract_points: &[AbstractPoint],
    transactions: &[Transaction],
) -> MethodDay {
    let (miles, cost) = distance_and_cost(instance, plan);

    let mut covered: BTreeSet<usize> = BTreeSet::new();
    let mut hub_groups: BTreeSet<usize> = BTreeSet::new();
    let mut group_of_choice: Vec<usize> = Vec::with_capacity(plan.choices.len());
    let mut path_freq_sum = 0.0;
    let mut path_freq_n = 0usize;

    for ch in &plan.choices {
        let p = &instance.paths[ch.load][ch.path];
        group_of_choice.push(p.group);
        if p.kind == PathKind::Consolidation {
            covered.insert(ch.load);
            if let Some(h) = p.hub_load {
                covered.insert(h);
            }
            hub_groups.insert(p.group);
            if !transactions.is_empty() {
                if let Some(h) = p.hub_load {
                    let a = &abstract_points[ch.load];
                    let b = &abstract_points[h];
                    let both = transactions
                        .iter()
                        .filter(|t| t.contains(a) && t.contains(b))
                        .count();
                    path_freq_sum += both as f64 / transactions.len() as f64;
                    path_freq_n += 1;
                }
            }
        }
    }

    let loads_through_hubs = group_of_choice
        .iter()
        .filter(|g| hub_groups.contains(g))
        .count();

    MethodDay {
        miles,
        cost,
        n_cut: plan.choices.iter().filter(|c| !c.activated).count(),
        n_covered: covered.len(),
        hubs_used: hub_groups.len(),
        loads_through_hubs,
        path_freq_sum,
        path_freq_n,
    }
}

/// Tier-level (or overall) aggregate for one method, built from summed
/// totals. Percentages are `None` when the denominator is empty.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub total_miles: f64,
    pub total_cost: f64,
    /// Total miles as a percentage of the TL baseline's miles.
    pub travel_distance_pct: Option<f64>,
    /// Cost saved relative to TL, percent.
    pub cost_reduction_pct: Option<f64>,
    /// Partial loads whose trailer was eliminated, percent of partials.
    pub loads_cut_pct: Option<f64>,
    /// Partial loads participating in some consolidation, percent.
    pub coverage_pct: Option<f64>,
    /// Used consolidation points per distinct partial-load origin, percent.
    pub cp_ratio_pct: Option<f64>,
    /// Mean loads flowing through a used consolidation point per day.
    pub daily_loads_per_cp: Option<f64>,
    /// Mean historical co-occurrence frequency of chosen routes, percent.
    pub path_freq_pct: Option<f64>,
    /// Consolidation paths surviving the mined-hub filter, percent of the
    /// unfiltered count.
    pub num_paths_pct: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Report {
    /// tier -> method -> aggregate.
    pub tiers: BTreeMap<String, BTreeMap<String, MethodAggregate>>,
    pub overall: BTreeMap<String, MethodAggregate>,
    pub days: usize,
    pub exact_optimal_days: usize,
}

fn ratio(n: f64, d: f64) -> Option<f64> {
    if d > 0.0 {
        Some(n / d)
    } else {
        None
    }
}

fn aggregate_group(records: &[&DayRecord]) -> BTreeMap<String, MethodAggregate> {
    let mut methods: BTreeSet<&String> = BTreeSet::new();
    for r in records {
        methods.extend(r.methods.keys());
    }

    let full_miles: f64 = records.iter().map(|r| r.full_miles).sum();
    let full_cost: f64 = records.iter().map(|r| r.full_cost).sum();
    let n_partial: usize = records.iter().map(|r| r.n_partial).sum();
    let origins: usize = records.iter().map(|r| r.distinct_partial_origins).sum();
    let filtered: usize = records.iter().map(|r| r.n_paths_filtered).sum();
    let unfiltered: usize = records.iter().map(|r| r.n_paths_unfiltered).sum();

    let tl_totals: Option<(f64, f64)> = {
        let has = records.iter().all(|r| r.methods.contains_key(METHOD_TL));
        has.then(|| {
            let m: f64 = records
                .iter()
                .map(|r| r.methods[METHOD_TL].miles)
                .sum::<f64>()
                + full_miles;
            let c: f64 = records
                .iter()
                .map(|r| r.methods[METHOD_TL].cost)
                .sum::<f64>()
                + full_cost;
            (m, c)
        })
    };

    let mut out = BTreeMap::new();
    for method in methods {
        let days: Vec<&MethodDay> = records
            .iter()
            .filter_map(|r| r.methods.get(method))
            .collect();
        let total_miles: f64 = days.iter().map(|d| d.miles).sum::<f64>() + full_miles;
        let total_cost: f64 = days.iter().map(|d| d.cost).sum::<f64>() + full_cost;
        let n_cut: usize = days.iter().map(|d| d.n_cut).sum();
        let n_covered: usize = days.iter().map(|d| d.n_covered).sum();
        let hubs: usize = days.iter().map(|d| d.hubs_used).sum();
        let through: usize = days.iter().map(|d| d.loads_through_hubs).sum();
        let pf_sum: f64 = days.iter().map(|d| d.path_freq_sum).sum();
        let pf_n: usize = days.iter().map(|d| d.path_freq_n).sum();

        out.insert(
            method.clone(),
            MethodAggregate {
                total_miles,
                total_cost,
                travel_distance_pct: tl_totals
                    .and_then(|(m, _)| ratio(total_miles, m))
                    .map(|r| r * 100.0),
                cost_reduction_pct: tl_totals
                    .and_then(|(_, c)| ratio(total_cost, c))
                    .map(|r| (1.0 - r) * 100.0),
                loads_cut_pct: ratio(n_cut as f64, n_partial as f64).map(|r| r * 100.0),
                coverage_pct: ratio(n_covered as f64, n_partial as f64).map(|r| r * 100.0),
                cp_ratio_pct: ratio(hubs as f64, origins as f64).map(|r| r * 100.0),
                daily_loads_per_cp: ratio(through as f64, hubs as f64),
                path_freq_pct: ratio(pf_sum, pf_n as f64).map(|r| r * 100.0),
                num_paths_pct: ratio(filtered as f64, unfiltered as f64).map(|r| r * 100.0),
            },
        );
    }
    out
}

/// Build the full comparison report from per-day records.
pub fn compare_report(records: &[DayRecord]) -> Report {
    let mut by_tier: BTreeMap<String, Vec<&DayRecord>> = BTreeMap::new();
    for r in records {
        by_tier.entry(r.tier.clone()).or_default().push(r);
    }
    let tiers = by_tier
        .into_iter()
        .map(|(tier, rs)| (tier, aggregate_group(&rs)))
        .collect();
    let all: Vec<&DayRecord> = records.iter().collect();
    Report {
        tiers,
        overall: aggregate_group(&all),
        days: records.len(),
        exact_optimal_days: records.iter().filter(|r| r.exact_optimal).count(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:10.2}"),
        None => format!("{:>10}", "n/a"),
    }
}

/// Human-readable comparison table.
pub fn render_table(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "destination-days evaluated: {} (exact optimal on {})\n",
        report.days, report.exact_optimal_days
    ));
    let mut sections: Vec<(&str, &BTreeMap<String, MethodAggregate>)> = report
        .tiers
        .iter()
        .map(|(t, m)| (t.as_str(), m))
        .collect();
    sections.push(("overall", &report.overall));
    for (name, methods) in sections {
        out.push_str(&format!("\n[{name}]\n"));
        out.push_str(&format!(
            "{:<8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
            "method",
            "dist%",
            "costred%",
            "cut%",
            "coverage%",
            "cpratio%",
            "loads/cp",
            "pathfrq%",
            "paths%"
        ));
        for (method, a) in methods {
            out.push_str(&format!(
                "{:<8} {} {} {} {} {} {} {} {}\n",
                method,
                fmt_opt(a.travel_distance_pct),
                fmt_opt(a.cost_reduction_pct),
                fmt_opt(a.loads_cut_pct),
                fmt_opt(a.coverage_pct),
                fmt_opt(a.cp_ratio_pct),
                fmt_opt(a.daily_loads_per_cp),
                fmt_opt(a.path_freq_pct),
                fmt_opt(a.num_paths_pct),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{InstLoad, InstPath, PlanChoice, SolveStats};
    use std::collections::BTreeSet as Set;

    fn two_load_instance() -> Instance<f64> {
        // l1 at A can detour 10 miles to B; both direct legs exist.
        let groups = vec![Node::new("A", "s"), Node::new("B", "s")];
        Instance {
            loads: vec![
                InstLoad {
                    id: "l1".into(),
                    origin: Node::new("A", "s"),
                    departure: 0,
                    volume: 30.0,
                    capacity: 100.0,
                },
                InstLoad {
                    id: "l2".into(),
                    origin: Node::new("B", "s"),
                    departure: 100,
                    volume: 40.0,
                    capacity: 100.0,
                },
            ],
            paths: vec![
                vec![
                    InstPath {
                        kind: PathKind::Direct,
                        group: 0,
                        hub_load: None,
                        detour_cost: 0.0,
                        last_leg_cost: 500.0,
                        detour_miles: 0.0,
                        last_leg_miles: 500.0,
                    },
                    InstPath {
                        kind: PathKind::Consolidation,
                        group: 1,
                        hub_load: Some(1),
                        detour_cost: 10.0,
                        last_leg_cost: 400.0,
                        detour_miles: 10.0,
                        last_leg_miles: 400.0,
                    },
                ],
                vec![InstPath {
                    kind: PathKind::Direct,
                    group: 1,
                    hub_load: None,
                    detour_cost: 0.0,
                    last_leg_cost: 400.0,
                    detour_miles: 0.0,
                    last_leg_miles: 400.0,
                }],
            ],
            groups,
            hub_groups: [1usize].into_iter().collect(),
        }
    }

    fn plan(choices: Vec<PlanChoice>, inst: &Instance<f64>) -> Plan<f64> {
        let objective = inst.objective(&choices);
        Plan {
            choices,
            objective,
            optimal: true,
            stats: SolveStats::default(),
        }
    }

    fn ap(t: &str) -> AbstractPoint {
        AbstractPoint {
            origin: Node::new(t, "s"),
            due_dow: 0,
            transit_days: 0,
        }
    }

    #[test]
    fn tl_metrics() {
        let inst = two_load_instance();
        let tl = plan(
            vec![
                PlanChoice { load: 0, path: 0, activated: true },
                PlanChoice { load: 1, path: 0, activated: true },
            ],
            &inst,
        );
        let m = evaluate_method(&inst, &tl, &[ap("A"), ap("B")], &[]);
        assert_eq!(m.miles, 900.0);
        assert_eq!(m.cost, 900.0);
        assert_eq!(m.n_cut, 0);
        assert_eq!(m.n_covered, 0);
        assert_eq!(m.hubs_used, 0);
    }

    #[test]
    fn consolidated_metrics_and_path_freq() {
        let inst = two_load_instance();
        let cons = plan(
            vec![
                PlanChoice { load: 0, path: 1, activated: false },
                PlanChoice { load: 1, path: 0, activated: true },
            ],
            &inst,
        );
        // 3 of 4 historical transactions contain both items
        let txns: Vec<Transaction> = vec![
            [ap("A"), ap("B")].into_iter().collect::<Set<_>>(),
            [ap("A"), ap("B"), ap("C")].into_iter().collect(),
            [ap("A")].into_iter().collect(),
            [ap("A"), ap("B")].into_iter().collect(),
        ];
        let m = evaluate_method(&inst, &cons, &[ap("A"), ap("B")], &txns);
        assert_eq!(m.miles, 10.0 + 400.0);
        assert_eq!(m.cost, 410.0);
        assert_eq!(m.n_cut, 1);
        assert_eq!(m.n_covered, 2);
        assert_eq!(m.hubs_used, 1);
        // the hub group carries both the chooser and the hub's own load
        assert_eq!(m.loads_through_hubs, 2);
        assert_eq!(m.path_freq_n, 1);
        assert!((m.path_freq_sum - 0.75).abs() < 1e-12);
    }

    #[test]
    fn report_normalizes_against_tl() {
        let inst = two_load_instance();
        let tl = plan(
            vec![
                PlanChoice { load: 0, path: 0, activated: true },
                PlanChoice { load: 1, path: 0, activated: true },
            ],
            &inst,
        );
        let cons = plan(
            vec![
                PlanChoice { load: 0, path: 1, activated: false },
                PlanChoice { load: 1, path: 0, activated: true },
            ],
            &inst,
        );
        let points = [ap("A"), ap("B")];
        let mut methods = BTreeMap::new();
        methods.insert(METHOD_TL.to_string(), evaluate_method(&inst, &tl, &points, &[]));
        methods.insert(METHOD_EXACT.to_string(), evaluate_method(&inst, &cons, &points, &[]));
        let record = DayRecord {
            destination: Node::new("D", "s"),
            due_day: 1,
            tier: "high".into(),
            n_partial: 2,
            distinct_partial_origins: 2,
            n_full: 1,
            full_miles: 100.0,
            full_cost: 100.0,
            n_paths_filtered: 1,
            n_paths_unfiltered: 2,
            exact_optimal: true,
            methods,
        };
        let report = compare_report(&[record]);
        let tier = &report.tiers["high"];
        let tl_agg = &tier[METHOD_TL];
        let ex_agg = &tier[METHOD_EXACT];
        // TL is its own reference: 100% distance, 0% reduction.
        assert!((tl_agg.travel_distance_pct.unwrap() - 100.0).abs() < 1e-9);
        assert!(tl_agg.cost_reduction_pct.unwrap().abs() < 1e-9);
        // full-load constants are added to both methods
        assert_eq!(tl_agg.total_miles, 1000.0);
        assert_eq!(ex_agg.total_miles, 510.0);
        assert!((ex_agg.travel_distance_pct.unwrap() - 51.0).abs() < 1e-9);
        assert!((ex_agg.cost_reduction_pct.unwrap() - 49.0).abs() < 1e-9);
        assert!((ex_agg.loads_cut_pct.unwrap() - 50.0).abs() < 1e-9);
        assert!((ex_agg.coverage_pct.unwrap() - 100.0).abs() < 1e-9);
        assert!((ex_agg.num_paths_pct.unwrap() - 50.0).abs() < 1e-9);
        assert_eq!(report.days, 1);
        assert_eq!(report.exact_optimal_days, 1);
        // table renders without panicking and mentions both methods
        let table = render_table(&report);
        assert!(table.contains("exact") && table.contains("tl"));
    }

    #[test]
    fn zero_partials_yield_nulls_not_zeros() {
        let record = DayRecord {
            destination: Node::new("D", "s"),
            due_day: 1,
            tier: "low".into(),
            n_partial: 0,
            distinct_partial_origins: 0,
            n_full: 2,
            full_miles: 300.0,
            full_cost: 300.0,
            n_paths_filtered: 0,
            n_paths_unfiltered: 0,
            exact_optimal: true,
            methods: BTreeMap::from([
                (METHOD_TL.to_string(), MethodDay::default()),
                (METHOD_EXACT.to_string(), MethodDay::default()),
            ]),
        };
        let report = compare_report(&[record]);
        let agg = &report.tiers["low"][METHOD_EXACT];
        assert!(agg.loads_cut_pct.is_none());
        assert!(agg.coverage_pct.is_none());
        assert!(agg.cp_ratio_pct.is_none());
        assert!(agg.daily_loads_per_cp.is_none());
        assert!(agg.path_freq_pct.is_none());
        assert!(agg.num_paths_pct.is_none());
        // distance is still defined via the full-load constants
        assert!((agg.travel_distance_pct.unwrap() - 100.0).abs() < 1e-9);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("null"));
    }
}
