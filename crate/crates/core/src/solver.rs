//! Exact optimization of the consolidation model: choose one path per load
//! and a set of trailer activations minimizing total cost, subject to
//! per-last-leg-origin capacity.
//!
//! `solve_exact` is a branch-and-bound over load-to-path assignments with a
//! connected-component decomposition; for a complete assignment the optimal
//! activation per capacity group is a small covering knapsack solved exactly.
//! `solve_bruteforce` is the independent enumeration oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LoadId, Node};
use crate::pathgen::{Path, PathKind};
use crate::scalar::CostScalar;

pub const DEFAULT_BUDGET_NODES: u64 = 10_000_000;
pub const DEFAULT_BUDGET_SECS: f64 = 60.0;

const CAPACITY_TOL: f64 = 1e-6;

/// Which last-leg origins carry a capacity constraint.
///
/// `All` constrains every distinct last-leg origin, closing the cost-free
/// phantom-trailer gap a direct load outside the mined hub set would
/// otherwise exploit. `MinedHubs` constrains only the mined hub set
/// (config value `"paper"`), the narrower classical formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityScope {
    #[default]
    All,
    #[serde(rename = "paper")]
    MinedHubs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstLoad {
    pub id: LoadId,
    pub origin: Node,
    pub departure: i64,
    pub volume: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstPath<C> {
    pub kind: PathKind,
    /// Index into `Instance::groups`: the capacity group of the last leg.
    pub group: usize,
    /// Index of the hub load, for consolidation paths.
    pub hub_load: Option<usize>,
    pub detour_cost: C,
    pub last_leg_cost: C,
    pub detour_miles: f64,
    pub last_leg_miles: f64,
}

/// A destination-day optimization instance. Path index 0 of every load is its
/// direct path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance<C> {
    pub loads: Vec<InstLoad>,
    pub paths: Vec<Vec<InstPath<C>>>,
    /// Distinct last-leg origin nodes, sorted.
    pub groups: Vec<Node>,
    /// Groups that are mined consolidation points.
    pub hub_groups: BTreeSet<usize>,
}

impl Instance<f64> {
    /// Assemble an instance from generated paths. `loads` and the path map
    /// must cover the same destination-day batch.
    pub fn build(
        loads: Vec<InstLoad>,
        mut path_map: BTreeMap<LoadId, Vec<Path>>,
        mined_hubs: &BTreeSet<Node>,
    ) -> Result<Self> {
        let mut group_nodes: BTreeSet<Node> = BTreeSet::new();
        for paths in path_map.values() {
            for p in paths {
                group_nodes.insert(p.last_leg_origin.clone());
            }
        }
        let groups: Vec<Node> = group_nodes.into_iter().collect();
        let group_idx: BTreeMap<&Node, usize> = groups.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let load_idx: BTreeMap<&LoadId, usize> =
            loads.iter().enumerate().map(|(i, l)| (&l.id, i)).collect();

        let mut paths = Vec::with_capacity(loads.len());
        for load in &loads {
            let raw = path_map
                .remove(&load.id)
                .ok_or_else(|| Error::Data(format!("no paths for load {}", load.id)))?;
            let mut row: Vec<InstPath<f64>> = Vec::with_capacity(raw.len());
            let mut direct = 0;
            for p in &raw {
                if p.kind == PathKind::Direct {
                    direct += 1;
                }
                let hub_load = match &p.hub_load_id {
                    Some(id) => Some(*load_idx.get(id).ok_or_else(|| {
                        Error::Data(format!("hub load {id} not in instance"))
                    })?),
                    None => None,
                };
                row.push(InstPath {
                    kind: p.kind,
                    group: group_idx[&p.last_leg_origin],
                    hub_load,
                    detour_cost: p.detour_cost,
                    last_leg_cost: p.last_leg_cost,
                    detour_miles: p.detour_miles,
                    last_leg_miles: p.last_leg_miles,
                });
            }
            if direct != 1 {
                return Err(Error::Data(format!(
                    "load {} has {direct} direct paths (want exactly 1)",
                    load.id
                )));
            }
            // direct first, then consolidation paths by group index
            row.sort_by_key(|p| (p.kind == PathKind::Consolidation, p.group));
            paths.push(row);
        }

        let hub_groups = groups
            .iter()
            .enumerate()
            .filter(|(_, n)| mined_hubs.contains(n))
            .map(|(i, _)| i)
            .collect();

        Ok(Self {
            loads,
            paths,
            groups,
            hub_groups,
        })
    }
}

impl<C: CostScalar> Instance<C> {
    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    /// Groups carrying a capacity constraint under `scope`, as a boolean mask.
    pub fn scoped_groups(&self, scope: CapacityScope) -> Vec<bool> {
        match scope {
            CapacityScope::All => vec![true; self.groups.len()],
            CapacityScope::MinedHubs => (0..self.groups.len())
                .map(|g| self.hub_groups.contains(&g))
                .collect(),
        }
    }

    pub fn objective(&self, choices: &[PlanChoice]) -> C {
        let mut total = C::zero();
        for ch in choices {
            let p = &self.paths[ch.load][ch.path];
            total = total + p.detour_cost;
            if ch.activated {
                total = total + p.last_leg_cost;
            }
        }
        total
    }
}

/// One load's decision: the chosen path and whether its trailer runs the
/// last leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanChoice {
    pub load: usize,
    pub path: usize,
    pub activated: bool,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Plan<C> {
    /// Exactly one choice per load, sorted by load index.
    pub choices: Vec<PlanChoice>,
    pub objective: C,
    pub optimal: bool,
    pub stats: SolveStats,
}

impl<C: CostScalar> Plan<C> {
    pub fn activated_count(&self) -> usize {
        self.choices.iter().filter(|c| c.activated).count()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanViolation {
    pub rule: String,
    pub detail: String,
}

/// Check a plan against the model constraints: one path per load, trailer
/// capacity per scoped group, and structural consistency.
pub fn verify_plan<C: CostScalar>(
    instance: &Instance<C>,
    plan: &Plan<C>,
    scope: CapacityScope,
) -> Vec<PlanViolation> {
    let mut out = Vec::new();
    let mut per_load = vec![0usize; instance.loads.len()];
    for ch in &plan.choices {
        if ch.load >= instance.loads.len() {
            out.push(PlanViolation {
                rule: "unknown-load".into(),
                detail: format!("choice references load index {}", ch.load),
            });
            continue;
        }
        per_load[ch.load] += 1;
        if ch.path >= instance.paths[ch.load].len() {
            out.push(PlanViolation {
                rule: "unknown-path".into(),
                detail: format!("load {} path index {}", instance.loads[ch.load].id, ch.path),
            });
        }
    }
    for (i, n) in per_load.iter().enumerate() {
        if *n != 1 {
            out.push(PlanViolation {
                rule: "one-path-per-load".into(),
                detail: format!("load {} has {n} chosen paths", instance.loads[i].id),
            });
        }
    }
    if !out.is_empty() {
        return out;
    }

    let scoped = instance.scoped_groups(scope);
    let mut volume = vec![0.0f64; instance.groups.len()];
    let mut capacity = vec![0.0f64; instance.groups.len()];
    for ch in &plan.choices {
        let p = &instance.paths[ch.load][ch.path];
        volume[p.group] += instance.loads[ch.load].volume;
        if ch.activated {
            capacity[p.group] += instance.loads[ch.load].capacity;
        }
    }
    for g in 0..instance.groups.len() {
        if scoped[g] && volume[g] > capacity[g] + CAPACITY_TOL {
            out.push(PlanViolation {
                rule: "capacity".into(),
                detail: format!(
                    "group {} volume {:.3} exceeds activated capacity {:.3} (slack {:.3})",
                    instance.groups[g],
                    volume[g],
                    capacity[g],
                    volume[g] - capacity[g]
                ),
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Covering knapsack: cheapest trailer subset with enough capacity.
// ---------------------------------------------------------------------------

/// Exact minimum-cost cover: pick a subset of `trailers` (capacity, cost)
/// with total capacity >= demand, minimizing total cost; among ties prefer
/// fewer trailers, then the lexicographically smallest index set.
fn min_cover<C: CostScalar>(trailers: &[(f64, C)], demand: f64) -> (C, Vec<bool>) {
    if demand <= CAPACITY_TOL {
        return (C::zero(), vec![false; trailers.len()]);
    }
    // Order by cost-per-capacity for bounding; indices keep identity.
    let mut order: Vec<usize> = (0..trailers.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = trailers[a].1.as_f64() / trailers[a].0.max(1e-12);
        let rb = trailers[b].1.as_f64() / trailers[b].0.max(1e-12);
        ra.partial_cmp(&rb).unwrap().then(a.cmp(&b))
    });
    // Suffix best ratio for the bound.
    let mut suffix_ratio = vec![f64::INFINITY; order.len() + 1];
    for i in (0..order.len()).rev() {
        let t = trailers[order[i]];
        suffix_ratio[i] = suffix_ratio[i + 1].min(t.1.as_f64() / t.0.max(1e-12));
    }

    struct Search<'a, C: CostScalar> {
        trailers: &'a [(f64, C)],
        order: &'a [usize],
        suffix_ratio: &'a [f64],
        best: Option<(C, usize, Vec<bool>)>,
        chosen: Vec<bool>,
    }

    impl<C: CostScalar> Search<'_, C> {
        fn consider(&mut self, cost: C) {
            let count = self.chosen.iter().filter(|&&b| b).count();
            let better = match &self.best {
                None => true,
                Some((bc, bn, bs)) => {
                    cost < *bc
                        || (cost == *bc && count < *bn)
                        || (cost == *bc && count == *bn && self.chosen < *bs)
                }
            };
            if better {
                self.best = Some((cost, count, self.chosen.clone()));
            }
        }

        fn dfs(&mut self, i: usize, remaining: f64, cost: C) {
            if remaining <= CAPACITY_TOL {
                self.consider(cost);
                return;
            }
            if i >= self.order.len() {
                return;
            }
            // bound: fractional cover of the remaining demand
            if let Some((bc, _, _)) = &self.best {
                let lb = cost.as_f64() + remaining * self.suffix_ratio[i];
                if lb > bc.as_f64() + 1e-12 {
                    return;
                }
            }
            let idx = self.order[i];
            let (q, f) = self.trailers[idx];
            // include
            self.chosen[idx] = true;
            self.dfs(i + 1, remaining - q, cost + f);
            self.chosen[idx] = false;
            // exclude (only if the rest can still cover)
            let rest: f64 = self.order[i + 1..]
                .iter()
                .map(|&j| self.trailers[j].0)
                .sum();
            if rest + CAPACITY_TOL >= remaining {
                self.dfs(i + 1, remaining, cost);
            }
        }
    }

    let mut search = Search {
        trailers,
        order: &order,
        suffix_ratio: &suffix_ratio,
        best: None,
        chosen: vec![false; trailers.len()],
    };
    search.dfs(0, demand, C::zero());
    let (cost, _, chosen) = search
        .best
        .expect("total capacity always covers demand (q <= Q per load)");
    (cost, chosen)
}

/// Given a complete path assignment, compute the optimal activations and the
/// total objective.
fn complete_assignment<C: CostScalar>(
    instance: &Instance<C>,
    assignment: &[(usize, usize)],
    scoped: &[bool],
) -> (C, Vec<PlanChoice>) {
    let mut detour = C::zero();
    let mut per_group: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &(load, path) in assignment {
        let p = &instance.paths[load][path];
        detour = detour + p.detour_cost;
        per_group.entry(p.group).or_default().push((load, path));
    }

    let mut activated: BTreeMap<usize, bool> = BTreeMap::new();
    let mut activation_cost = C::zero();
    for (group, members) in &per_group {
        if !scoped[*group] {
            for &(load, _) in members {
                activated.insert(load, false);
            }
            continue;
        }
        let demand: f64 = members.iter().map(|&(l, _)| instance.loads[l].volume).sum();
        let trailers: Vec<(f64, C)> = members
            .iter()
            .map(|&(l, p)| (instance.loads[l].capacity, instance.paths[l][p].last_leg_cost))
            .collect();
        let (cost, chosen) = min_cover(&trailers, demand);
        activation_cost = activation_cost + cost;
        for (slot, &(load, _)) in members.iter().enumerate() {
            activated.insert(load, chosen[slot]);
        }
    }

    let mut choices: Vec<PlanChoice> = assignment
        .iter()
        .map(|&(load, path)| PlanChoice {
            load,
            path,
            activated: activated[&load],
        })
        .collect();
    choices.sort_by_key(|c| c.load);
    (detour + activation_cost, choices)
}

// ---------------------------------------------------------------------------
// Brute force oracle
// ---------------------------------------------------------------------------

pub const BRUTEFORCE_MAX_LOADS: usize = 10;

/// Exhaustive enumeration over all path assignments with exact per-group
/// activation, for small instances. Independent of the branch-and-bound path.
pub fn solve_bruteforce<C: CostScalar>(
    instance: &Instance<C>,
    scope: CapacityScope,
) -> Result<Plan<C>> {
    if instance.loads.len() > BRUTEFORCE_MAX_LOADS {
        return Err(Error::Contract(format!(
            "brute force limited to {BRUTEFORCE_MAX_LOADS} loads, got {}",
            instance.loads.len()
        )));
    }
    let start = Instant::now();
    let scoped = instance.scoped_groups(scope);
    let n = instance.loads.len();
    let mut assignment: Vec<(usize, usize)> = (0..n).map(|l| (l, 0)).collect();
    let mut best: Option<(C, usize, Vec<PlanChoice>)> = None;
    let mut nodes = 0u64;

    loop {
        nodes += 1;
        let (objective, choices) = complete_assignment(instance, &assignment, &scoped);
        let count = choices.iter().filter(|c| c.activated).count();
        let better = match &best {
            None => true,
            Some((bo, bn, _)) => {
                objective < *bo || (objective == *bo && count < *bn)
            }
        };
        if better {
            best = Some((objective, count, choices));
        }

        // next assignment in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                let (objective, _, choices) = best.unwrap_or((C::zero(), 0, Vec::new()));
                return Ok(Plan {
                    choices,
                    objective,
                    optimal: true,
                    stats: SolveStats {
                        nodes,
                        wall_ms: start.elapsed().as_millis() as u64,
                    },
                });
            }
            i -= 1;
            if assignment[i].1 + 1 < instance.paths[i].len() {
                assignment[i].1 += 1;
                for a in assignment.iter_mut().skip(i + 1) {
                    a.1 = 0;
                }
                break;
            }
        }
        if n == 0 {
            // single empty assignment already evaluated
            let (objective, _, choices) = best.unwrap();
            return Ok(Plan {
                choices,
                objective,
                optimal: true,
                stats: SolveStats {
                    nodes,
                    wall_ms: start.elapsed().as_millis() as u64,
                },
            });
        }
    }
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_secs: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_BUDGET_NODES,
            max_secs: DEFAULT_BUDGET_SECS,
        }
    }
}

struct BnB<'a, C: CostScalar> {
    instance: &'a Instance<C>,
    scoped: &'a [bool],
    /// Component loads in branching order.
    loads: Vec<usize>,
    /// Children (path indices) per depth, in exploration order.
    child_order: Vec<Vec<usize>>,
    /// Optimistic marginal cost per (depth, path).
    optimistic: Vec<Vec<f64>>,
    /// Suffix sums of the per-load optimistic minima.
    suffix_min: Vec<f64>,
    assignment: Vec<(usize, usize)>,
    incumbent: Option<(C, usize, Vec<PlanChoice>)>,
    nodes: u64,
    max_nodes: u64,
    deadline: Instant,
    timed_out: bool,
}

impl<'a, C: CostScalar> BnB<'a, C> {
    fn new(
        instance: &'a Instance<C>,
        scoped: &'a [bool],
        mut loads: Vec<usize>,
        budget: &Budget,
        deadline: Instant,
    ) -> Self {
        loads.sort_unstable();

        let n_groups = instance.groups.len();
        let mut group_ratio = vec![f64::INFINITY; n_groups];
        for &l in &loads {
            for p in &instance.paths[l] {
                if scoped[p.group] {
                    let ratio = p.last_leg_cost.as_f64() / instance.loads[l].capacity.max(1e-12);
                    if ratio < group_ratio[p.group] {
                        group_ratio[p.group] = ratio;
                    }
                }
            }
        }
        for r in &mut group_ratio {
            if !r.is_finite() {
                *r = 0.0;
            }
        }

        let mut optimistic = Vec::with_capacity(loads.len());
        let mut child_order = Vec::with_capacity(loads.len());
        for &l in &loads {
            let opts: Vec<f64> = instance.paths[l]
                .iter()
                .map(|p| {
                    let ratio = if scoped[p.group] { group_ratio[p.group] } else { 0.0 };
                    p.detour_cost.as_f64() + instance.loads[l].volume * ratio
                })
                .collect();
            let mut order: Vec<usize> = (0..opts.len()).collect();
            order.sort_by(|&a, &b| opts[a].partial_cmp(&opts[b]).unwrap().then(a.cmp(&b)));
            child_order.push(order);
            optimistic.push(opts);
        }
        let mut suffix_min = vec![0.0; loads.len() + 1];
        for d in (0..loads.len()).rev() {
            let best = optimistic[d]
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            suffix_min[d] = suffix_min[d + 1] + best;
        }

        Self {
            instance,
            scoped,
            loads,
            child_order,
            optimistic,
            suffix_min,
            assignment: Vec::new(),
            incumbent: None,
            nodes: 0,
            max_nodes: budget.max_nodes,
            deadline,
            timed_out: false,
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        if self.nodes >= self.max_nodes {
            self.timed_out = true;
            return true;
        }
        if self.nodes % 1024 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
            return true;
        }
        false
    }

    fn consider_leaf(&mut self) {
        let (objective, choices) =
            complete_assignment(self.instance, &self.assignment, self.scoped);
        let count = choices.iter().filter(|c| c.activated).count();
        let better = match &self.incumbent {
            None => true,
            Some((bo, bn, _)) => objective < *bo || (objective == *bo && count < *bn),
        };
        if better {
            self.incumbent = Some((objective, count, choices));
        }
    }

    /// Admissible lower bound: committed detours plus a fractional trailer
    /// bound on committed volume plus each unassigned load's cheapest
    /// optimistic marginal cost.
    fn bound(&self, depth: usize, committed_detour: f64, committed_ratio: f64) -> f64 {
        committed_detour + committed_ratio + self.suffix_min[depth]
    }

    fn dfs(&mut self, depth: usize, committed_detour: f64, committed_ratio: f64) {
        self.nodes += 1;
        if self.out_of_budget() {
            return;
        }
        if depth == self.loads.len() {
            self.consider_leaf();
            return;
        }
        if let Some((bo, _, _)) = &self.incumbent {
            if self.bound(depth, committed_detour, committed_ratio) >= bo.as_f64() + 1e-12 {
                return;
            }
        }
        let load = self.loads[depth];
        let children = self.child_order[depth].clone();
        for path in children {
            let p = &self.instance.paths[load][path];
            let detour = p.detour_cost.as_f64();
            let ratio_term = self.optimistic[depth][path] - detour;
            self.assignment.push((load, path));
            self.dfs(
                depth + 1,
                committed_detour + detour,
                committed_ratio + ratio_term,
            );
            self.assignment.pop();
            if self.timed_out {
                return;
            }
        }
    }
}

/// Branch-and-bound exact solve with connected-component decomposition.
/// Returns the proven optimum, or the best incumbent with `optimal: false`
/// when the budget runs out.
pub fn solve_exact<C: CostScalar>(
    instance: &Instance<C>,
    budget: &Budget,
    scope: CapacityScope,
) -> Plan<C> {
    let start = Instant::now();
    let deadline = start
        + std::time::Duration::from_secs_f64(budget.max_secs.max(0.0));
    let scoped = instance.scoped_groups(scope);
    let n = instance.loads.len();
    if n == 0 {
        return Plan {
            choices: Vec::new(),
            objective: C::zero(),
            optimal: true,
            stats: SolveStats {
                nodes: 0,
                wall_ms: start.elapsed().as_millis() as u64,
            },
        };
    }

    // Loads interact only through scoped capacity groups: union-find over
    // shared reachable groups.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let mut group_owner: BTreeMap<usize, usize> = BTreeMap::new();
    for l in 0..n {
        for p in &instance.paths[l] {
            if !scoped[p.group] {
                continue;
            }
            match group_owner.get(&p.group) {
                Some(&o) => {
                    let (a, b) = (find(&mut parent, o), find(&mut parent, l));
                    if a != b {
                        parent[a] = b;
                    }
                }
                None => {
                    group_owner.insert(p.group, l);
                }
            }
        }
    }
    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for l in 0..n {
        let root = find(&mut parent, l);
        components.entry(root).or_default().push(l);
    }

    let mut all_choices: Vec<PlanChoice> = Vec::with_capacity(n);
    let mut objective = C::zero();
    let mut nodes = 0u64;
    let mut optimal = true;
    let mut remaining_nodes = budget.max_nodes;

    for (_, members) in components {
        let comp_budget = Budget {
            max_nodes: remaining_nodes,
            max_secs: budget.max_secs,
        };
        let mut bnb = BnB::new(instance, &scoped, members.clone(), &comp_budget, deadline);
        // Seed the incumbent with the all-direct plan: always feasible.
        bnb.assignment = members.iter().map(|&l| (l, 0)).collect();
        bnb.consider_leaf();
        bnb.assignment.clear();

        bnb.dfs(0, 0.0, 0.0);
        nodes += bnb.nodes;
        remaining_nodes = remaining_nodes.saturating_sub(bnb.nodes);
        if bnb.timed_out {
            optimal = false;
        }
        let (obj, _, choices) = bnb.incumbent.expect("all-direct incumbent always exists");
        objective = objective + obj;
        all_choices.extend(choices);
    }

    all_choices.sort_by_key(|c| c.load);
    Plan {
        choices: all_choices,
        objective,
        optimal,
        stats: SolveStats {
            nodes,
            wall_ms: start.elapsed().as_millis() as u64,
        },
    }
}

/// The all-direct, all-active plan: the trivially feasible baseline plan
/// shape used for seeding and the TL baseline.
pub fn all_direct_plan<C: CostScalar>(instance: &Instance<C>) -> Plan<C> {
    let choices: Vec<PlanChoice> = (0..instance.loads.len())
        .map(|load| PlanChoice {
            load,
            path: 0,
            activated: true,
        })
        .collect();
    let objective = instance.objective(&choices);
    Plan {
        choices,
        objective,
        optimal: true,
        stats: SolveStats::default(),
    }
}
