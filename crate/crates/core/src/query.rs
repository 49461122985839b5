//! Distance queries.
//!
//! Both endpoints compute a cost array over their common ancestors. An
//! untruncated endpoint simply reads its label. A truncated endpoint scans
//! its ancestors from its own rank upward: vertices reached so far either
//! contribute their label (when untruncated) or relax their upward
//! shortcuts (when truncated). The distance is the best sum over the shared
//! prefix.

use crate::graph::{add_cost, EdgeId, Vertex, Weight, INFINITY, NAN};
use crate::labeling::Labeling;
use crate::order::VertexOrder;
use crate::path::Variant;
use crate::shortcuts::{CustomizedShortcuts, ShortcutGraph};

/// Borrowed view of one customized index over the core graph.
#[derive(Debug, Clone, Copy)]
pub struct IndexView<'a> {
    pub order: &'a VertexOrder,
    pub graph: &'a ShortcutGraph,
    pub shortcuts: &'a CustomizedShortcuts,
    pub labels: &'a Labeling,
    pub variant: Variant,
}

/// Instrumentation counters, accumulated over the lifetime of an agent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub queries: u64,
    /// Labels merged during truncated scans.
    pub label_merges: u64,
    /// Upward shortcuts relaxed during truncated scans.
    pub shortcut_relaxations: u64,
    /// Label entries combined in the final join.
    pub join_entries: u64,
    /// Adjacency searches needed to locate an edge between two vertices.
    pub dictionary_lookups: u64,
    pub chain_steps: u64,
    /// Shortcut-graph edges expanded into original edges.
    pub expanded_edges: u64,
}

impl QueryStats {
    pub fn merge(&mut self, other: &QueryStats) {
        self.queries += other.queries;
        self.label_merges += other.label_merges;
        self.shortcut_relaxations += other.shortcut_relaxations;
        self.join_entries += other.join_entries;
        self.dictionary_lookups += other.dictionary_lookups;
        self.chain_steps += other.chain_steps;
        self.expanded_edges += other.expanded_edges;
    }
}

/// Outcome of a distance query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistanceResult {
    pub distance: Weight,
    /// Rank of the hub attaining the distance; 0 when unreachable.
    pub hub_rank: u32,
}

impl DistanceResult {
    pub fn is_reachable(&self) -> bool {
        self.distance != INFINITY
    }
}

/// Per-endpoint scratch of the truncated scan, indexed by rank - 1.
#[derive(Debug, Clone)]
pub(crate) struct Scan {
    pub vertex: Vertex,
    pub truncated: bool,
    pub cost: Vec<Weight>,
    pub reached: Vec<Vertex>,
    /// Predecessor of each rank: the scanned vertex that last improved it
    /// and the shortcut used, or `NAN` as edge when it came from a label.
    pub pred: Vec<(Vertex, EdgeId)>,
}

impl Scan {
    fn new(size: usize) -> Self {
        Scan {
            vertex: NAN,
            truncated: false,
            cost: vec![INFINITY; size],
            reached: vec![NAN; size],
            pred: vec![(NAN, NAN); size],
        }
    }
}

/// Query state owned by one thread: scratch arrays sized to the maximum
/// rank, reused across queries.
pub struct QueryAgent<'a> {
    pub(crate) index: IndexView<'a>,
    pub(crate) scans: [Scan; 2],
    pub stats: QueryStats,
}

impl<'a> QueryAgent<'a> {
    pub fn new(index: IndexView<'a>) -> Self {
        let size = index.order.max_rank() as usize + 1;
        QueryAgent { index, scans: [Scan::new(size), Scan::new(size)], stats: QueryStats::default() }
    }

    pub fn index(&self) -> IndexView<'a> {
        self.index
    }

    /// Fills the cost array of `v` for ranks `1..=h` into scan `side`.
    pub(crate) fn get_cost(&mut self, side: usize, v: Vertex, h: u32) {
        let ix = self.index;
        let scan = &mut self.scans[side];
        scan.vertex = v;
        scan.truncated = ix.labels.is_truncated(v);
        if !scan.truncated {
            return;
        }
        let tv = ix.order.rank(v) as usize;
        scan.cost[..tv].fill(INFINITY);
        scan.reached[..tv].fill(NAN);
        scan.pred[..tv].fill((NAN, NAN));
        scan.cost[tv - 1] = 0;
        scan.reached[tv - 1] = v;
        let cost = &ix.shortcuts.cost;
        for i in (0..tv).rev() {
            let w = scan.reached[i];
            if w == NAN {
                continue;
            }
            let ci = scan.cost[i];
            let tw = ix.order.rank(w);
            if let Some(cw) = ix.labels.label(w, tw) {
                self.stats.label_merges += 1;
                let limit = (tw - 1).min(h) as usize;
                for (j, &cj) in cw[..limit].iter().enumerate() {
                    if cj == INFINITY {
                        continue;
                    }
                    let d = add_cost(ci, cj);
                    if d <= scan.cost[j] {
                        scan.cost[j] = d;
                        scan.reached[j] = NAN;
                        scan.pred[j] = (w, NAN);
                    }
                }
            } else {
                for e in ix.graph.up_edges(w) {
                    self.stats.shortcut_relaxations += 1;
                    let d = add_cost(ci, cost[e as usize]);
                    let n = ix.graph.head(e);
                    let r = ix.order.rank(n) as usize - 1;
                    if d < scan.cost[r] {
                        scan.cost[r] = d;
                        scan.reached[r] = n;
                        scan.pred[r] = (w, e);
                    }
                }
            }
        }
    }

    /// Cost array of the endpoint in scan `side`, indexed by rank - 1.
    pub(crate) fn costs(&self, side: usize) -> &[Weight] {
        let scan = &self.scans[side];
        let ix = self.index;
        match ix.labels.label(scan.vertex, ix.order.rank(scan.vertex)) {
            Some(label) => label,
            None => &scan.cost,
        }
    }

    /// Shortest distance between core vertices `s` and `t`, with the
    /// smallest hub rank attaining it.
    pub fn find_distance(&mut self, s: Vertex, t: Vertex) -> DistanceResult {
        self.stats.queries += 1;
        let order = self.index.order;
        if s == t {
            self.get_cost(0, s, order.rank(s));
            self.get_cost(1, t, order.rank(t));
            return DistanceResult { distance: 0, hub_rank: order.rank(s) };
        }
        let h = order.lca_height(s, t);
        self.get_cost(0, s, h);
        self.get_cost(1, t, h);
        let (cs, ct) = (self.costs(0), self.costs(1));
        let mut best = DistanceResult { distance: INFINITY, hub_rank: 0 };
        for i in 0..h as usize {
            let (a, b) = (cs[i], ct[i]);
            if a == INFINITY || b == INFINITY {
                continue;
            }
            let d = a + b;
            if d < best.distance {
                best = DistanceResult { distance: d, hub_rank: i as u32 + 1 };
            }
        }
        self.stats.join_entries += h as u64;
        best
    }

    /// Cost from endpoint `side` of the last query to its rank-`i` ancestor.
    pub fn side_cost(&self, side: usize, i: u32) -> Weight {
        self.costs(side)[i as usize - 1]
    }
}
