//! End-to-end orchestration: validate, split history, mine consolidation
//! structure on the training window, then plan and evaluate every
//! destination-day of the holdout window.
//!
//! All parallel stages collect into ordered maps keyed by destination or
//! destination-day and all floating-point accumulation happens in that
//! canonical order, so outputs are byte-identical across runs and worker
//! counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{plan_nnch, plan_tl};
use crate::cluster::{build_event_points, st_dbscan, Cluster, ClusteringResult};
use crate::config::PipelineConfig;
use crate::datagen::split_train_test;
use crate::error::{Error, Result};
use crate::eval::{
    compare_report, evaluate_method, render_table, DayRecord, Report, METHOD_EXACT, METHOD_NNCH,
    METHOD_TL,
};
use crate::io;
use crate::mining::{
    abstract_clusters, fp_growth_constrained, union_cp, CandidateSet, FeasibilityContext,
    GroupKey, SortTable, Transaction,
};
use crate::model::{
    validate_network, Load, LoadId, Network, NetworkIndex, Node, Severity, TerminalId,
};
use crate::pathgen::{
    abstract_point, direct_path, generate_paths, select_lc, HaversineTravel, Path as RoutePath,
    PathKind, PathOptions,
};
use crate::solver::{solve_exact, verify_plan, InstLoad, Instance, Plan};

/// Mining output for one (destination, day-of-week) group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinedGroupData {
    pub transactions: Vec<Transaction>,
    pub candidates: Vec<CandidateSet>,
    pub rejected: Vec<Transaction>,
    pub hubs: BTreeSet<Node>,
}

/// Everything learned from the training window.
#[derive(Debug, Clone, Default)]
pub struct TrainedModel {
    pub clustering: BTreeMap<Node, ClusteringResult>,
    pub groups: BTreeMap<GroupKey, MinedGroupData>,
}

/// One planned destination-day of the holdout window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DayOutput {
    pub destination: Node,
    pub due_day: i64,
    pub tier: String,
    pub instance: Instance<f64>,
    pub plans: BTreeMap<String, Plan<f64>>,
    pub record: DayRecord,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub days: Vec<DayOutput>,
    pub report: Report,
}

fn tier_of(tiers: &BTreeMap<TerminalId, String>, destination: &Node) -> String {
    tiers
        .get(&destination.terminal)
        .cloned()
        .unwrap_or_else(|| "default".to_string())
}

/// Mine the training history: cluster each destination's partial loads, then
/// run constrained itemset mining per (destination, day-of-week) group.
pub fn train(
    network: &Network,
    train_loads: &[Load],
    config: &PipelineConfig,
) -> Result<TrainedModel> {
    let index = NetworkIndex::build(network);

    let mut by_destination: BTreeMap<&Node, Vec<&Load>> = BTreeMap::new();
    for load in train_loads {
        if load.is_partial(config.partial_threshold)? {
            by_destination.entry(&load.destination).or_default().push(load);
        }
    }

    let entries: Vec<(&Node, Vec<&Load>)> = by_destination.into_iter().collect();
    let clustered: Vec<Result<(Node, ClusteringResult)>> = entries
        .par_iter()
        .map(|(destination, loads)| {
            let (points, skipped) =
                build_event_points(loads, destination, &index, config.reference)?;
            for s in &skipped {
                log::warn!("load {} skipped for clustering: {}", s.load_id, s.reason);
            }
            let result = st_dbscan(&points, destination, config.eps, config.min_pts);
            Ok(((*destination).clone(), result))
        })
        .collect();
    let mut clustering = BTreeMap::new();
    for r in clustered {
        let (destination, result) = r?;
        clustering.insert(destination, result);
    }

    let all_clusters: Vec<Cluster> = clustering
        .values()
        .flat_map(|r| r.clusters.iter().cloned())
        .collect();
    let loads_by_id: HashMap<&LoadId, &Load> =
        train_loads.iter().map(|l| (&l.id, l)).collect();
    let grouped = abstract_clusters(&all_clusters, &loads_by_id)?;

    let sorts = SortTable::from_network(network);
    let travel = HaversineTravel {
        index: &index,
        speed_mph: config.speed_mph,
    };
    let group_entries: Vec<(GroupKey, Vec<Transaction>)> = grouped.into_iter().collect();
    let mined: Vec<Result<(GroupKey, MinedGroupData)>> = group_entries
        .into_par_iter()
        .map(|(key, transactions)| {
            let ctx = FeasibilityContext {
                sorts: &sorts,
                travel: &travel,
            };
            let mined = fp_growth_constrained(
                &transactions,
                config.min_support,
                &ctx,
                config.maximal_only,
            )?;
            let hubs = union_cp(&mined.candidates);
            Ok((
                key,
                MinedGroupData {
                    transactions,
                    candidates: mined.candidates,
                    rejected: mined.rejected,
                    hubs,
                },
            ))
        })
        .collect();
    let mut groups = BTreeMap::new();
    for r in mined {
        let (key, data) = r?;
        groups.insert(key, data);
    }

    Ok(TrainedModel { clustering, groups })
}

static EMPTY_TXNS: Vec<Transaction> = Vec::new();
static EMPTY_CANDS: Vec<CandidateSet> = Vec::new();

fn plan_one_day(
    destination: &Node,
    due_day: i64,
    day_loads: &[&Load],
    network: &Network,
    model: &TrainedModel,
    tiers: &BTreeMap<TerminalId, String>,
    config: &PipelineConfig,
) -> Result<DayOutput> {
    let index = NetworkIndex::build(network);
    let metric = HaversineTravel {
        index: &index,
        speed_mph: config.speed_mph,
    };

    let mut partial: Vec<&Load> = Vec::new();
    let mut full_miles = 0.0;
    let mut full_cost = 0.0;
    let mut n_full = 0usize;
    for load in day_loads {
        if load.is_partial(config.partial_threshold)? {
            partial.push(load);
        } else {
            let p = direct_path(load, &metric, &config.cost)?;
            full_miles += p.last_leg_miles;
            full_cost += p.last_leg_cost;
            n_full += 1;
        }
    }
    partial.sort_by(|a, b| a.id.cmp(&b.id));

    let key = GroupKey {
        destination: destination.clone(),
        due_dow: (due_day.rem_euclid(7)) as u8,
    };
    let group = model.groups.get(&key);
    let candidates = group.map_or(&EMPTY_CANDS[..], |g| &g.candidates);
    let hubs: BTreeSet<Node> = group.map(|g| g.hubs.clone()).unwrap_or_default();
    let transactions = group.map_or(&EMPTY_TXNS[..], |g| &g.transactions);

    // Loads whose abstract signature is part of a mined candidate get
    // consolidation paths; everything else travels direct.
    let lc = select_lc(&partial, candidates)?;
    let comembership = config.require_comembership.then_some(candidates);
    let mut path_map = generate_paths(
        &lc,
        &metric,
        &config.cost,
        &PathOptions {
            hubs: Some(&hubs),
            comembership,
            dwell_minutes: config.dwell_minutes,
        },
    )?;
    let unfiltered = generate_paths(
        &lc,
        &metric,
        &config.cost,
        &PathOptions {
            hubs: None,
            comembership,
            dwell_minutes: config.dwell_minutes,
        },
    )?;
    let count_cons = |m: &BTreeMap<LoadId, Vec<RoutePath>>| {
        m.values()
            .flatten()
            .filter(|p| p.kind == PathKind::Consolidation)
            .count()
    };
    let n_paths_filtered = count_cons(&path_map);
    let n_paths_unfiltered = count_cons(&unfiltered);

    for load in &partial {
        path_map
            .entry(load.id.clone())
            .or_insert(vec![direct_path(load, &metric, &config.cost)?]);
    }

    let inst_loads: Vec<InstLoad> = partial
        .iter()
        .map(|l| InstLoad {
            id: l.id.clone(),
            origin: l.origin.clone(),
            departure: l.departure,
            volume: l.volume,
            capacity: l.capacity,
        })
        .collect();
    let instance = Instance::build(inst_loads, path_map, &hubs)?;

    let abstract_points: Vec<_> = partial
        .iter()
        .map(|l| abstract_point(l))
        .collect::<Result<Vec<_>>>()?;

    let mut plans = BTreeMap::new();
    plans.insert(
        METHOD_EXACT.to_string(),
        solve_exact(&instance, &config.budget, config.capacity_scope),
    );
    plans.insert(METHOD_NNCH.to_string(), plan_nnch(&instance));
    plans.insert(METHOD_TL.to_string(), plan_tl(&instance));

    for (method, plan) in &plans {
        let violations = verify_plan(&instance, plan, config.capacity_scope);
        if !violations.is_empty() {
            return Err(Error::Contract(format!(
                "{method} plan for {destination} day {due_day} violates the model: {violations:?}"
            )));
        }
    }

    let mut methods = BTreeMap::new();
    for (method, plan) in &plans {
        methods.insert(
            method.clone(),
            evaluate_method(&instance, plan, &abstract_points, transactions),
        );
    }

    let distinct_partial_origins = partial
        .iter()
        .map(|l| &l.origin)
        .collect::<BTreeSet<_>>()
        .len();

    let record = DayRecord {
        destination: destination.clone(),
        due_day,
        tier: tier_of(tiers, destination),
        n_partial: partial.len(),
        distinct_partial_origins,
        n_full,
        full_miles,
        full_cost,
        n_paths_filtered,
        n_paths_unfiltered,
        exact_optimal: plans[METHOD_EXACT].optimal,
        methods,
    };

    Ok(DayOutput {
        destination: destination.clone(),
        due_day,
        tier: record.tier.clone(),
        instance,
        plans,
        record,
    })
}

/// Plan and evaluate every destination-day present in `test_loads`.
pub fn plan_days(
    network: &Network,
    test_loads: &[Load],
    model: &TrainedModel,
    tiers: &BTreeMap<TerminalId, String>,
    config: &PipelineConfig,
) -> Result<Vec<DayOutput>> {
    let mut by_day: BTreeMap<(&Node, i64), Vec<&Load>> = BTreeMap::new();
    for load in test_loads {
        by_day
            .entry((&load.destination, load.due_day))
            .or_default()
            .push(load);
    }
    let entries: Vec<((&Node, i64), Vec<&Load>)> = by_day.into_iter().collect();
    let outputs: Vec<Result<DayOutput>> = entries
        .par_iter()
        .map(|((destination, due_day), loads)| {
            plan_one_day(destination, *due_day, loads, network, model, tiers, config)
        })
        .collect();
    // entries were iterated in canonical order; rayon preserves it
    outputs.into_iter().collect()
}

#[derive(Debug, Serialize)]
struct ClusterArtifact<'a> {
    destination: &'a Node,
    result: &'a ClusteringResult,
}

#[derive(Debug, Serialize)]
struct GroupArtifact<'a> {
    destination: &'a Node,
    due_dow: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    transactions: Option<&'a Vec<Transaction>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    candidates: Option<&'a Vec<CandidateSet>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejected: Option<&'a Vec<Transaction>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hubs: Option<&'a BTreeSet<Node>>,
}

#[derive(Debug, Serialize)]
struct PlanSummaryRow<'a> {
    destination: &'a Node,
    due_day: i64,
    tier: &'a str,
    n_partial: usize,
    n_full: usize,
    objectives: BTreeMap<&'a str, f64>,
    exact_optimal: bool,
}

fn write_artifacts(out_dir: &Path, model: &TrainedModel, outcome: &PipelineOutcome) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;

    let clusters: Vec<ClusterArtifact<'_>> = model
        .clustering
        .iter()
        .map(|(destination, result)| ClusterArtifact {
            destination,
            result,
        })
        .collect();
    io::write_jsonl(&out_dir.join("clusters.jsonl"), &clusters)?;

    let txns: Vec<GroupArtifact<'_>> = model
        .groups
        .iter()
        .map(|(k, g)| GroupArtifact {
            destination: &k.destination,
            due_dow: k.due_dow,
            transactions: Some(&g.transactions),
            candidates: None,
            rejected: None,
            hubs: None,
        })
        .collect();
    io::write_jsonl(&out_dir.join("transactions.jsonl"), &txns)?;

    let cands: Vec<GroupArtifact<'_>> = model
        .groups
        .iter()
        .map(|(k, g)| GroupArtifact {
            destination: &k.destination,
            due_dow: k.due_dow,
            transactions: None,
            candidates: Some(&g.candidates),
            rejected: Some(&g.rejected),
            hubs: None,
        })
        .collect();
    io::write_jsonl(&out_dir.join("candidates.jsonl"), &cands)?;

    let cps: Vec<GroupArtifact<'_>> = model
        .groups
        .iter()
        .map(|(k, g)| GroupArtifact {
            destination: &k.destination,
            due_dow: k.due_dow,
            transactions: None,
            candidates: None,
            rejected: None,
            hubs: Some(&g.hubs),
        })
        .collect();
    io::write_json_pretty(&out_dir.join("cps.json"), &cps)?;

    #[derive(Serialize)]
    struct DayInstance<'a> {
        destination: &'a Node,
        due_day: i64,
        tier: &'a str,
        instance: &'a Instance<f64>,
    }
    let instances: Vec<DayInstance<'_>> = outcome
        .days
        .iter()
        .map(|d| DayInstance {
            destination: &d.destination,
            due_day: d.due_day,
            tier: &d.tier,
            instance: &d.instance,
        })
        .collect();
    io::write_jsonl(&out_dir.join("paths.jsonl"), &instances)?;

    #[derive(Serialize)]
    struct DayPlans<'a> {
        destination: &'a Node,
        due_day: i64,
        plans: &'a BTreeMap<String, Plan<f64>>,
    }
    let plans: Vec<DayPlans<'_>> = outcome
        .days
        .iter()
        .map(|d| DayPlans {
            destination: &d.destination,
            due_day: d.due_day,
            plans: &d.plans,
        })
        .collect();
    io::write_jsonl(&out_dir.join("plan.jsonl"), &plans)?;

    let summary: Vec<PlanSummaryRow<'_>> = outcome
        .days
        .iter()
        .map(|d| PlanSummaryRow {
            destination: &d.destination,
            due_day: d.due_day,
            tier: &d.tier,
            n_partial: d.record.n_partial,
            n_full: d.record.n_full,
            objectives: d
                .plans
                .iter()
                .map(|(m, p)| (m.as_str(), p.objective))
                .collect(),
            exact_optimal: d.record.exact_optimal,
        })
        .collect();
    io::write_json_pretty(&out_dir.join("plan_summary.json"), &summary)?;

    io::write_json_pretty(&out_dir.join("report.json"), &outcome.report)?;
    std::fs::write(out_dir.join("report.txt"), render_table(&outcome.report))?;
    Ok(())
}

/// Run the whole pipeline. When `out_dir` is given, every stage's artifact is
/// written there.
pub fn run_pipeline(
    network: &Network,
    tiers: &BTreeMap<TerminalId, String>,
    config: &PipelineConfig,
    out_dir: Option<&Path>,
) -> Result<PipelineOutcome> {
    config.validate()?;

    let violations = validate_network(network);
    let errors: Vec<_> = violations
        .iter()
        .filter(|v| v.severity == Severity::Error)
        .collect();
    if !errors.is_empty() {
        return Err(Error::Data(format!(
            "network validation failed with {} errors; first: {} ({})",
            errors.len(),
            errors[0].record,
            errors[0].rule
        )));
    }
    for v in violations.iter().filter(|v| v.severity == Severity::Warning) {
        log::warn!("validation warning for {}: {}", v.record, v.rule);
    }

    let (train_loads, test_loads) = split_train_test(network, config.test_weeks);
    log::info!(
        "history split: {} training loads, {} holdout loads",
        train_loads.len(),
        test_loads.len()
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let (model, days) = pool.install(|| -> Result<_> {
        let model = train(network, &train_loads, config)?;
        let days = plan_days(network, &test_loads, &model, tiers, config)?;
        Ok((model, days))
    })?;

    let records: Vec<DayRecord> = days.iter().map(|d| d.record.clone()).collect();
    let report = compare_report(&records);
    let outcome = PipelineOutcome { days, report };

    if let Some(dir) = out_dir {
        write_artifacts(dir, &model, &outcome)?;
    }
    Ok(outcome)
}
