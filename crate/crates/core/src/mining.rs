//! Constrained frequent itemset mining over abstracted clusters.
//!
//! Clusters become transactions of abstract points (origin node, day of week,
//! transit days), grouped per (destination, day-of-week). FP-growth mines all
//! frequent itemsets of size >= 2; the time-feasibility check kappa then
//! discards candidates with no feasible ordered consolidation pair, and the
//! consolidation points of each surviving candidate are the origins reachable
//! in time from some other member.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Load, LoadId, Node, TerminalId, MINUTES_PER_DAY};
use crate::cluster::Cluster;

/// Abstracted load signature: two loads with the same (origin, day of week,
/// transit days) are the same item.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbstractPoint {
    pub origin: Node,
    pub due_dow: u8,
    pub transit_days: i64,
}

pub type Transaction = BTreeSet<AbstractPoint>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub destination: Node,
    pub due_dow: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateSet {
    pub items: Transaction,
    pub support_count: u32,
    pub consolidation_points: BTreeSet<Node>,
}

/// Support threshold: absolute count or fraction of transactions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinSupport {
    Count(u32),
    Fraction(f64),
}

impl MinSupport {
    pub fn resolve(self, n_transactions: usize) -> u32 {
        match self {
            MinSupport::Count(c) => c.max(1),
            MinSupport::Fraction(f) => {
                let c = (f * n_transactions as f64 - 1e-9).ceil();
                (c.max(1.0)) as u32
            }
        }
    }
}

/// Travel time between two terminals, in minutes.
pub trait TravelTime {
    fn minutes(&self, a: &TerminalId, b: &TerminalId) -> Result<f64>;
}

/// Travel-time lookup table; used by worked-example fixtures.
#[derive(Debug, Clone, Default)]
pub struct MatrixTravel {
    pub minutes: HashMap<(TerminalId, TerminalId), f64>,
}

impl TravelTime for MatrixTravel {
    fn minutes(&self, a: &TerminalId, b: &TerminalId) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        self.minutes
            .get(&(a.clone(), b.clone()))
            .copied()
            .ok_or_else(|| Error::Data(format!("no travel time for {a} -> {b}")))
    }
}

/// Sort-window lookup: (terminal, sort) -> (earliest departure, latest arrival).
#[derive(Debug, Clone, Default)]
pub struct SortTable {
    windows: HashMap<(TerminalId, crate::model::SortId), (u32, u32)>,
}

impl SortTable {
    pub fn from_network(network: &crate::model::Network) -> Self {
        let mut windows = HashMap::new();
        for s in &network.sorts {
            windows.insert(
                (s.terminal.clone(), s.sort_id.clone()),
                (s.dep_minutes, s.arr_minutes),
            );
        }
        Self { windows }
    }

    pub fn insert(&mut self, node: &Node, dep: u32, arr: u32) {
        self.windows
            .insert((node.terminal.clone(), node.sort.clone()), (dep, arr));
    }

    pub fn window(&self, node: &Node) -> Result<(u32, u32)> {
        self.windows
            .get(&(node.terminal.clone(), node.sort.clone()))
            .copied()
            .ok_or_else(|| Error::Data(format!("unresolvable sort {node}")))
    }
}

/// Everything needed to evaluate the sort-level feasibility predicates.
pub struct FeasibilityContext<'a> {
    pub sorts: &'a SortTable,
    pub travel: &'a dyn TravelTime,
}

/// Directed pair feasibility: can `i` reach `j`'s origin in time, at sort
/// granularity? The transit-day slack is converted to minutes.
pub fn kappa_pair(i: &AbstractPoint, j: &AbstractPoint, ctx: &FeasibilityContext<'_>) -> Result<bool> {
    let (dep_i, _) = ctx.sorts.window(&i.origin)?;
    let (_, arr_j) = ctx.sorts.window(&j.origin)?;
    let tau = ctx.travel.minutes(&i.origin.terminal, &j.origin.terminal)?;
    let slack = (i.transit_days - j.transit_days) as f64 * MINUTES_PER_DAY as f64;
    Ok(dep_i as f64 + tau <= arr_j as f64 + slack)
}

/// Set-level feasibility: at least one ordered pair is time-feasible.
pub fn kappa_set(items: &Transaction, ctx: &FeasibilityContext<'_>) -> Result<bool> {
    if items.len() < 2 {
        return Err(Error::Contract(
            "kappa is undefined for singleton itemsets".into(),
        ));
    }
    for i in items {
        for j in items {
            if i != j && kappa_pair(i, j, ctx)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Consolidation points of a feasible candidate: origins that at least one
/// other member can reach in time.
pub fn extract_cp(items: &Transaction, ctx: &FeasibilityContext<'_>) -> Result<BTreeSet<Node>> {
    let mut cps = BTreeSet::new();
    for j in items {
        for i in items {
            if i != j && kappa_pair(i, j, ctx)? {
                cps.insert(j.origin.clone());
                break;
            }
        }
    }
    if cps.is_empty() {
        return Err(Error::Contract(
            "extract_cp called on a candidate with no feasible pair".into(),
        ));
    }
    Ok(cps)
}

/// Union of consolidation points over all candidates.
pub fn union_cp(candidates: &[CandidateSet]) -> BTreeSet<Node> {
    candidates
        .iter()
        .flat_map(|c| c.consolidation_points.iter().cloned())
        .collect()
}

/// Abstract clusters into transactions, grouped by (destination, day of week).
/// Duplicate abstract points within a cluster collapse under set semantics.
pub fn abstract_clusters(
    clusters: &[Cluster],
    loads_by_id: &HashMap<&LoadId, &Load>,
) -> Result<BTreeMap<GroupKey, Vec<Transaction>>> {
    let mut groups: BTreeMap<GroupKey, Vec<Transaction>> = BTreeMap::new();
    for cluster in clusters {
        let mut txn = Transaction::new();
        for member in &cluster.members {
            let load = loads_by_id
                .get(&member.load_id)
                .ok_or_else(|| Error::Data(format!("unknown load {}", member.load_id)))?;
            txn.insert(AbstractPoint {
                origin: load.origin.clone(),
                due_dow: load.due_dow(),
                transit_days: load.transit_days()?,
            });
        }
        let key = GroupKey {
            destination: cluster.destination.clone(),
            due_dow: (cluster.due_day.rem_euclid(7)) as u8,
        };
        groups.entry(key).or_default().push(txn);
    }
    Ok(groups)
}

// ---------------------------------------------------------------------------
// FP-growth
// ---------------------------------------------------------------------------

/// Global item order: descending appearance count, ties by ascending item.
/// Returns (item, count) pairs for items meeting `min_sup_count`.
pub fn item_order(transactions: &[Transaction], min_sup_count: u32) -> Vec<(AbstractPoint, u32)> {
    let mut counts: BTreeMap<&AbstractPoint, u32> = BTreeMap::new();
    for t in transactions {
        for item in t {
            *counts.entry(item).or_insert(0) += 1;
        }
    }
    let mut ordered: Vec<(AbstractPoint, u32)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_sup_count)
        .map(|(i, c)| (i.clone(), c))
        .collect();
    ordered.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ordered
}

/// A transaction rewritten into the global item order (infrequent items
/// dropped). This is the FP-tree insertion order.
pub fn reorganize(
    transaction: &Transaction,
    rank: &HashMap<&AbstractPoint, usize>,
) -> Vec<AbstractPoint> {
    let mut items: Vec<&AbstractPoint> = transaction
        .iter()
        .filter(|i| rank.contains_key(*i))
        .collect();
    items.sort_by_key(|i| rank[*i]);
    items.into_iter().cloned().collect()
}

struct FpNode {
    item: usize, // rank index; usize::MAX for root
    count: u32,
    parent: usize,
    children: BTreeMap<usize, usize>,
}

struct FpTree {
    nodes: Vec<FpNode>,
    /// For each item rank, nodes carrying that item.
    header: Vec<Vec<usize>>,
}

impl FpTree {
    fn new(n_items: usize) -> Self {
        Self {
            nodes: vec![FpNode {
                item: usize::MAX,
                count: 0,
                parent: usize::MAX,
                children: BTreeMap::new(),
            }],
            header: vec![Vec::new(); n_items],
        }
    }

    fn insert(&mut self, items: &[usize], count: u32) {
        let mut cur = 0usize;
        for &item in items {
            let next = match self.nodes[cur].children.get(&item) {
                Some(&n) => {
                    self.nodes[n].count += count;
                    n
                }
                None => {
                    let n = self.nodes.len();
                    self.nodes.push(FpNode {
                        item,
                        count,
                        parent: cur,
                        children: BTreeMap::new(),
                    });
                    self.nodes[cur].children.insert(item, n);
                    self.header[item].push(n);
                    n
                }
            };
            cur = next;
        }
    }

    fn item_support(&self, item: usize) -> u32 {
        self.header[item].iter().map(|&n| self.nodes[n].count).sum()
    }

    /// Conditional pattern base for `item`: prefix paths with their counts.
    fn conditional_base(&self, item: usize) -> Vec<(Vec<usize>, u32)> {
        let mut base = Vec::new();
        for &leaf in &self.header[item] {
            let count = self.nodes[leaf].count;
            let mut path = Vec::new();
            let mut cur = self.nodes[leaf].parent;
            while cur != 0 && cur != usize::MAX {
                path.push(self.nodes[cur].item);
                cur = self.nodes[cur].parent;
            }
            path.reverse();
            if !path.is_empty() {
                base.push((path, count));
            }
        }
        base
    }
}

fn mine_tree(
    tree: &FpTree,
    n_items: usize,
    min_sup: u32,
    suffix: &[usize],
    out: &mut Vec<(Vec<usize>, u32)>,
) {
    // Items are processed from least frequent (highest rank) to most.
    for item in (0..n_items).rev() {
        if tree.header[item].is_empty() {
            continue;
        }
        let support = tree.item_support(item);
        if support < min_sup {
            continue;
        }
        let mut itemset = vec![item];
        itemset.extend_from_slice(suffix);
        out.push((itemset.clone(), support));

        let base = tree.conditional_base(item);
        if base.is_empty() {
            continue;
        }
        // Recount within the conditional base and rebuild a conditional tree.
        let mut counts = vec![0u32; n_items];
        for (path, c) in &base {
            for &i in path {
                counts[i] += c;
            }
        }
        let mut cond = FpTree::new(n_items);
        for (path, c) in &base {
            let filtered: Vec<usize> =
                path.iter().copied().filter(|&i| counts[i] >= min_sup).collect();
            if !filtered.is_empty() {
                cond.insert(&filtered, *c);
            }
        }
        mine_tree(&cond, item, min_sup, &itemset, out);
    }
}

/// All frequent itemsets (any size >= 1) with their exact support counts,
/// mined with FP-growth. Output is canonically sorted.
pub fn frequent_itemsets(
    transactions: &[Transaction],
    min_sup_count: u32,
) -> Vec<(Transaction, u32)> {
    let ordered = item_order(transactions, min_sup_count);
    let items: Vec<AbstractPoint> = ordered.iter().map(|(i, _)| i.clone()).collect();
    let rank: HashMap<&AbstractPoint, usize> =
        items.iter().enumerate().map(|(r, i)| (i, r)).collect();

    let mut tree = FpTree::new(items.len());
    for t in transactions {
        let row: Vec<usize> = reorganize(t, &rank).iter().map(|i| rank[i]).collect();
        if !row.is_empty() {
            tree.insert(&row, 1);
        }
    }

    let mut raw = Vec::new();
    mine_tree(&tree, items.len(), min_sup_count, &[], &mut raw);

    let mut out: Vec<(Transaction, u32)> = raw
        .into_iter()
        .map(|(ranks, support)| {
            let set: Transaction = ranks.into_iter().map(|r| items[r].clone()).collect();
            (set, support)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MinedGroup {
    pub candidates: Vec<CandidateSet>,
    /// Frequent itemsets discarded by the feasibility check.
    pub rejected: Vec<Transaction>,
}

/// FP-growth with the monotone feasibility constraint: all itemsets with
/// |S| >= 2, support >= threshold, and kappa(S) true, each with its
/// consolidation points. `maximal_only` keeps only itemsets with no emitted
/// strict superset.
pub fn fp_growth_constrained(
    transactions: &[Transaction],
    min_support: MinSupport,
    ctx: &FeasibilityContext<'_>,
    maximal_only: bool,
) -> Result<MinedGroup> {
    let min_sup_count = min_support.resolve(transactions.len());
    let frequent = frequent_itemsets(transactions, min_sup_count);

    let mut kept: Vec<(Transaction, u32)> = Vec::new();
    let mut rejected = Vec::new();
    for (items, support) in frequent {
        if items.len() < 2 {
            continue;
        }
        if kappa_set(&items, ctx)? {
            kept.push((items, support));
        } else {
            rejected.push(items);
        }
    }

    if maximal_only {
        let all: Vec<Transaction> = kept.iter().map(|(i, _)| i.clone()).collect();
        kept.retain(|(items, _)| {
            !all.iter()
                .any(|other| other.len() > items.len() && items.is_subset(other))
        });
    }

    let mut candidates = Vec::with_capacity(kept.len());
    for (items, support_count) in kept {
        let consolidation_points = extract_cp(&items, ctx)?;
        candidates.push(CandidateSet {
            items,
            support_count,
            consolidation_points,
        });
    }
    Ok(MinedGroup {
        candidates,
        rejected,
    })
}
