//! Distance labels over the vertex hierarchy.
//!
//! An untruncated vertex `v` stores `C(v)`, one cost per ancestor rank: the
//! entry for rank `i` is the distance from `v` to its rank-`i` ancestor
//! using only vertices in that ancestor's subtree. Vertices with at most θ
//! descendants are truncated and store nothing; queries reach past them
//! through upward shortcuts instead. Optional path arrays remember the first
//! upward neighbor on each optimal label path.

use crate::graph::{add_cost, EdgeId, Vertex, Weight, INFINITY, NAN};
use crate::order::VertexOrder;
use crate::schedule;
use crate::shortcuts::ShortcutGraph;

/// Offset marking a vertex without a label.
const NO_LABEL: u64 = u64::MAX;

/// Bytes per stored path-record reference.
pub const REFERENCE_BYTES: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathFlavor {
    None,
    /// First upward neighbor only.
    Basic,
    /// First upward neighbor and the edge (record) leading to it.
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TruncationPolicy {
    pub theta: u32,
}

impl TruncationPolicy {
    pub fn new(theta: u32) -> Self {
        TruncationPolicy { theta }
    }

    #[inline]
    pub fn truncated(self, descendant_count: u32) -> bool {
        descendant_count <= self.theta
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    policy: TruncationPolicy,
    flavor: PathFlavor,
    offset: Vec<u64>,
    cost: Vec<Weight>,
    path_offset: Vec<u64>,
    path_vertex: Vec<Vertex>,
    path_edge: Vec<EdgeId>,
}

/// Entry counts and byte totals of a labeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMemoryReport {
    /// Cost entries stored by vertices of each rank (index 0 = rank 1).
    pub per_level: Vec<u64>,
    pub labeled_vertices: u64,
    pub cost_entries: u64,
    pub path_entries: u64,
    pub bytes: u64,
}

impl Labeling {
    /// Builds labels in ascending rank. Each untruncated vertex starts with
    /// zero for itself and ∞ elsewhere, then relaxes through every upward
    /// neighbor `u` over all ranks up to `τ(u)`. Only strict improvements
    /// overwrite, so the first optimal neighbor in rank order is kept.
    pub fn customize(
        graph: &ShortcutGraph,
        cost: &[Weight],
        order: &VertexOrder,
        policy: TruncationPolicy,
        flavor: PathFlavor,
        threads: usize,
    ) -> Labeling {
        let n = order.vertex_count();
        let untruncated = |v: Vertex| !policy.truncated(order.descendant_count(v));
        let mut offset = vec![NO_LABEL; n];
        let mut path_offset = vec![NO_LABEL; n];
        let (mut total, mut path_total) = (0u64, 0u64);
        let mut level_end = Vec::with_capacity(order.max_rank() as usize + 1);
        level_end.push((0u64, 0u64));
        for r in 1..=order.max_rank() {
            for &v in order.level(r) {
                if untruncated(v) {
                    offset[v as usize] = total;
                    path_offset[v as usize] = path_total;
                    total += r as u64;
                    path_total += r as u64 - 1;
                }
            }
            level_end.push((total, path_total));
        }
        let has_paths = flavor != PathFlavor::None;
        let path_len = if has_paths { path_total as usize } else { 0 };
        let mut labels = Labeling {
            policy,
            flavor,
            offset,
            cost: vec![INFINITY; total as usize],
            path_offset,
            path_vertex: vec![NAN; path_len],
            path_edge: vec![NAN; if flavor == PathFlavor::Extended { path_len } else { 0 }],
        };
        let pool = schedule::pool(threads);
        for r in 1..=order.max_rank() {
            let (lo, plo) = level_end[r as usize - 1];
            let (hi, phi) = level_end[r as usize];
            if lo == hi {
                continue;
            }
            let members: Vec<Vertex> = order.level(r).iter().copied().filter(|&v| untruncated(v)).collect();
            let (done, rest) = labels.cost.split_at_mut(lo as usize);
            let costs = schedule::split_lengths(&mut rest[..(hi - lo) as usize], members.iter().map(|_| r as usize));
            let plen = if has_paths { r as usize - 1 } else { 0 };
            let prange = if has_paths { plo as usize..phi as usize } else { 0..0 };
            let pv = schedule::split_lengths(&mut labels.path_vertex[prange.clone()], members.iter().map(|_| plen));
            let elen = if flavor == PathFlavor::Extended { plen } else { 0 };
            let erange = if flavor == PathFlavor::Extended { prange } else { 0..0 };
            let pe = schedule::split_lengths(&mut labels.path_edge[erange], members.iter().map(|_| elen));
            let offsets = &labels.offset;
            let items: Vec<_> =
                members.iter().zip(costs).zip(pv).zip(pe).map(|(((&v, c), p), e)| (v, c, p, e)).collect();
            schedule::for_each(items, pool.as_ref(), |(v, c, p, e)| {
                c[r as usize - 1] = 0;
                for edge in graph.up_edges(v) {
                    let w = cost[edge as usize];
                    if w == INFINITY {
                        continue;
                    }
                    let u = graph.head(edge);
                    let at = offsets[u as usize] as usize;
                    let cu = &done[at..at + graph.rank(u) as usize];
                    for (i, &d) in cu.iter().enumerate() {
                        if d == INFINITY {
                            continue;
                        }
                        let via = add_cost(w, d);
                        if via < c[i] {
                            c[i] = via;
                            if let Some(slot) = p.get_mut(i) {
                                *slot = u;
                            }
                            if let Some(slot) = e.get_mut(i) {
                                *slot = edge;
                            }
                        }
                    }
                }
            });
        }
        labels
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn flavor(&self) -> PathFlavor {
        self.flavor
    }

    #[inline]
    pub fn is_truncated(&self, v: Vertex) -> bool {
        self.offset[v as usize] == NO_LABEL
    }

    /// `C(v)`, indexed by rank - 1, or `None` when `v` is truncated.
    #[inline]
    pub fn label(&self, v: Vertex, rank: u32) -> Option<&[Weight]> {
        let at = self.offset[v as usize];
        (at != NO_LABEL).then(|| &self.cost[at as usize..at as usize + rank as usize])
    }

    /// First upward neighbor on the label path from `v` to its rank-`i`
    /// ancestor; `NAN` when unreachable or when no path arrays exist.
    #[inline]
    pub fn path_vertex(&self, v: Vertex, i: u32) -> Vertex {
        let at = self.path_offset[v as usize];
        if self.flavor == PathFlavor::None || at == NO_LABEL {
            return NAN;
        }
        self.path_vertex[at as usize + i as usize - 1]
    }

    /// Edge to [`Self::path_vertex`], stored by the extended flavor only.
    #[inline]
    pub fn path_edge(&self, v: Vertex, i: u32) -> Option<EdgeId> {
        let at = self.path_offset[v as usize];
        if self.flavor != PathFlavor::Extended || at == NO_LABEL {
            return None;
        }
        Some(self.path_edge[at as usize + i as usize - 1]).filter(|&e| e != NAN)
    }

    pub fn cost_entries(&self) -> usize {
        self.cost.len()
    }

    pub fn memory_report(&self, order: &VertexOrder) -> LabelMemoryReport {
        let mut per_level = vec![0u64; order.max_rank() as usize];
        let mut labeled = 0;
        for v in 0..order.vertex_count() as Vertex {
            if !self.is_truncated(v) {
                labeled += 1;
                per_level[order.rank(v) as usize - 1] += order.rank(v) as u64;
            }
        }
        let cost_entries = self.cost.len() as u64;
        let path_entries = match self.flavor {
            PathFlavor::None => 0,
            _ => self.path_vertex.len() as u64,
        };
        let path_bytes = match self.flavor {
            PathFlavor::None => 0,
            PathFlavor::Basic => 4,
            PathFlavor::Extended => 4 + REFERENCE_BYTES,
        };
        LabelMemoryReport {
            per_level,
            labeled_vertices: labeled,
            cost_entries,
            path_entries,
            bytes: cost_entries * 4 + path_entries * path_bytes,
        }
    }

    pub(crate) fn raw(&self) -> (&[u64], &[Weight], &[Vertex], &[EdgeId]) {
        (&self.offset, &self.cost, &self.path_vertex, &self.path_edge)
    }

    /// Reassembles a labeling from persisted arrays. Path offsets are
    /// recomputed from the label offsets and ranks.
    pub(crate) fn from_raw(
        order: &VertexOrder,
        policy: TruncationPolicy,
        flavor: PathFlavor,
        offset: Vec<u64>,
        cost: Vec<Weight>,
        path_vertex: Vec<Vertex>,
        path_edge: Vec<EdgeId>,
    ) -> Option<Labeling> {
        let n = order.vertex_count();
        if offset.len() != n {
            return None;
        }
        let mut path_offset = vec![NO_LABEL; n];
        let mut expected = 0u64;
        let mut path_total = 0u64;
        for &v in order.by_rank() {
            let untruncated = !policy.truncated(order.descendant_count(v));
            let at = offset[v as usize];
            if untruncated != (at != NO_LABEL) {
                return None;
            }
            if untruncated {
                if at != expected {
                    return None;
                }
                path_offset[v as usize] = path_total;
                expected += order.rank(v) as u64;
                path_total += order.rank(v) as u64 - 1;
            }
        }
        let path_len = if flavor == PathFlavor::None { 0 } else { path_total };
        let edge_len = if flavor == PathFlavor::Extended { path_total } else { 0 };
        if cost.len() as u64 != expected || path_vertex.len() as u64 != path_len || path_edge.len() as u64 != edge_len {
            return None;
        }
        Some(Labeling { policy, flavor, offset, cost, path_offset, path_vertex, path_edge })
    }
}
