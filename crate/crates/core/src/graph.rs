//! Undirected road network topology and the metrics bound to it.

use std::collections::VecDeque;

use crate::error::GraphError;

/// Vertex identifier. Dense, zero-based.
pub type Vertex = u32;
/// Edge cost in input units.
pub type Weight = u32;
/// Edge identifier, index into [`RoadNetwork::edges`].
pub type EdgeId = u32;

/// Unreachable / unknown cost. Additions saturate to this value.
pub const INFINITY: Weight = Weight::MAX;
/// Reserved "not a node" identifier. Never a valid vertex id.
pub const NAN: Vertex = u32::MAX;

/// Adds two costs, saturating at [`INFINITY`].
#[inline(always)]
pub fn add_cost(a: Weight, b: Weight) -> Weight {
    a.saturating_add(b)
}

/// Undirected simple graph in adjacency-array form.
///
/// Edges are stored once as `(u, v)` with `u < v`; the adjacency array lists
/// every edge from both sides, neighbors sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoadNetwork {
    edges: Vec<(Vertex, Vertex)>,
    first_out: Vec<u32>,
    head: Vec<Vertex>,
    edge_of: Vec<EdgeId>,
}

impl RoadNetwork {
    /// Builds a network from an arbitrary list of vertex pairs. Self-loops are
    /// rejected; duplicate and antiparallel pairs collapse to a single edge.
    ///
    /// Returns the network together with, for every input pair, the id of the
    /// edge it was merged into.
    pub fn from_pairs(vertex_count: usize, pairs: &[(Vertex, Vertex)]) -> Result<(Self, Vec<EdgeId>), GraphError> {
        if vertex_count >= NAN as usize {
            return Err(GraphError::TooManyVertices(vertex_count));
        }
        let mut keyed: Vec<(Vertex, Vertex, usize)> = Vec::with_capacity(pairs.len());
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(GraphError::VertexOutOfRange { vertex: u.max(v), vertex_count });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            keyed.push((u.min(v), u.max(v), i));
        }
        keyed.sort_unstable();
        let mut edges = Vec::with_capacity(keyed.len());
        let mut input_to_edge = vec![0; pairs.len()];
        for &(u, v, i) in &keyed {
            if edges.last() != Some(&(u, v)) {
                edges.push((u, v));
            }
            input_to_edge[i] = (edges.len() - 1) as EdgeId;
        }
        Ok((Self::from_sorted_edges(vertex_count, edges), input_to_edge))
    }

    /// `edges` must be sorted, deduplicated and normalized to `u < v`.
    fn from_sorted_edges(vertex_count: usize, edges: Vec<(Vertex, Vertex)>) -> Self {
        let mut degree = vec![0u32; vertex_count + 1];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut first_out = Vec::with_capacity(vertex_count + 1);
        let mut acc = 0u32;
        for d in degree.iter().take(vertex_count) {
            first_out.push(acc);
            acc += d;
        }
        first_out.push(acc);
        let mut fill = first_out.clone();
        let mut head = vec![0; acc as usize];
        let mut edge_of = vec![0; acc as usize];
        for (id, &(u, v)) in edges.iter().enumerate() {
            for (a, b) in [(u, v), (v, u)] {
                let slot = fill[a as usize] as usize;
                head[slot] = b;
                edge_of[slot] = id as EdgeId;
                fill[a as usize] += 1;
            }
        }
        // Edges are visited in (min, max) order, so heads of each vertex come
        // out sorted for the lower endpoint but not the upper; sort explicitly.
        for v in 0..vertex_count {
            let range = first_out[v] as usize..first_out[v + 1] as usize;
            let mut pairs: Vec<(Vertex, EdgeId)> = range.clone().map(|i| (head[i], edge_of[i])).collect();
            pairs.sort_unstable();
            for (slot, (h, e)) in range.zip(pairs) {
                head[slot] = h;
                edge_of[slot] = e;
            }
        }
        RoadNetwork { edges, first_out, head, edge_of }
    }

    pub fn vertex_count(&self) -> usize {
        self.first_out.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge endpoints `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        (self.first_out[v as usize + 1] - self.first_out[v as usize]) as usize
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.head[self.first_out[v as usize] as usize..self.first_out[v as usize + 1] as usize]
    }

    /// `(neighbor, edge id)` pairs of `v`, neighbors ascending.
    pub fn arcs(&self, v: Vertex) -> impl Iterator<Item = (Vertex, EdgeId)> + '_ {
        let range = self.first_out[v as usize] as usize..self.first_out[v as usize + 1] as usize;
        self.head[range.clone()].iter().copied().zip(self.edge_of[range].iter().copied())
    }

    pub fn edge_between(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        let start = self.first_out[u as usize] as usize;
        self.neighbors(u).binary_search(&v).ok().map(|i| self.edge_of[start + i])
    }

    /// Connected component label per vertex plus the component count. Labels
    /// are assigned in order of the smallest vertex id of each component.
    pub fn components(&self) -> (Vec<u32>, usize) {
        let n = self.vertex_count();
        let mut label = vec![NAN; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for root in 0..n {
            if label[root] != NAN {
                continue;
            }
            label[root] = count as u32;
            queue.push_back(root as Vertex);
            while let Some(v) = queue.pop_front() {
                for &w in self.neighbors(v) {
                    if label[w as usize] == NAN {
                        label[w as usize] = count as u32;
                        queue.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() <= 1 || self.components().1 == 1
    }

    /// Subgraph induced by `vertices` (given in the order that defines the new
    /// ids). Returns the subgraph and, for each new edge, the original edge id.
    pub fn induced(&self, vertices: &[Vertex]) -> (RoadNetwork, Vec<EdgeId>) {
        let mut local = vec![NAN; self.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v as usize] = i as Vertex;
        }
        let mut keyed = Vec::new();
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            let (lu, lv) = (local[u as usize], local[v as usize]);
            if lu != NAN && lv != NAN {
                keyed.push((lu.min(lv), lu.max(lv), id as EdgeId));
            }
        }
        keyed.sort_unstable();
        let origin = keyed.iter().map(|k| k.2).collect();
        let edges = keyed.into_iter().map(|(u, v, _)| (u, v)).collect();
        (Self::from_sorted_edges(vertices.len(), edges), origin)
    }
}

/// Positive cost per edge of a bound [`RoadNetwork`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metric {
    cost: Vec<Weight>,
}

impl Metric {
    pub fn new(network: &RoadNetwork, cost: Vec<Weight>) -> Result<Self, GraphError> {
        if cost.len() != network.edge_count() {
            return Err(GraphError::MetricSize { expected: network.edge_count(), actual: cost.len() });
        }
        if let Some(e) = cost.iter().position(|&c| c == 0 || c == INFINITY) {
            return Err(GraphError::InvalidCost { edge: e as EdgeId, cost: cost[e] });
        }
        Ok(Metric { cost })
    }

    /// Metric of an induced subgraph, given the original edge id of each of its edges.
    pub fn restrict(&self, origin: &[EdgeId]) -> Metric {
        Metric { cost: origin.iter().map(|&e| self.cost[e as usize]).collect() }
    }

    #[inline(always)]
    pub fn cost(&self, e: EdgeId) -> Weight {
        self.cost[e as usize]
    }

    pub fn costs(&self) -> &[Weight] {
        &self.cost
    }

    /// Cost of a vertex sequence, or `None` if some step is not an edge.
    pub fn path_cost(&self, network: &RoadNetwork, path: &[Vertex]) -> Option<u64> {
        path.windows(2).map(|w| network.edge_between(w[0], w[1]).map(|e| self.cost(e) as u64)).sum()
    }
}

/// A source/target pair, both referring to the same network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QueryPair {
    pub source: Vertex,
    pub target: Vertex,
}

impl QueryPair {
    pub fn new(source: Vertex, target: Vertex) -> Self {
        QueryPair { source, target }
    }
}

/// Per-vertex planar position in the dataset's native units.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    pub xy: Vec<(f64, f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_and_antiparallel_pairs_merge() {
        let (g, map) = RoadNetwork::from_pairs(3, &[(0, 1), (1, 0), (2, 1), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(map, vec![0, 0, 1, 0]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.edge_between(2, 1), Some(1));
        assert_eq!(g.edge_between(0, 2), None);
    }

    #[test]
    fn rejects_self_loops_and_bad_ids() {
        assert!(matches!(RoadNetwork::from_pairs(2, &[(1, 1)]), Err(GraphError::SelfLoop(1))));
        assert!(RoadNetwork::from_pairs(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn adjacency_is_symmetric_and_sorted() {
        let pairs = [(4, 0), (3, 1), (0, 2), (2, 4), (1, 4), (0, 3)];
        let (g, _) = RoadNetwork::from_pairs(5, &pairs).unwrap();
        for v in 0..5 {
            let nb = g.neighbors(v);
            assert!(nb.windows(2).all(|w| w[0] < w[1]));
            for &w in nb {
                assert!(g.neighbors(w).contains(&v));
            }
        }
    }

    #[test]
    fn metric_rejects_zero_cost() {
        let (g, _) = RoadNetwork::from_pairs(2, &[(0, 1)]).unwrap();
        assert!(Metric::new(&g, vec![0]).is_err());
        assert!(Metric::new(&g, vec![3, 4]).is_err());
        assert_eq!(Metric::new(&g, vec![3]).unwrap().path_cost(&g, &[1, 0]), Some(3));
    }

    #[test]
    fn components_and_induced_subgraph() {
        let (g, _) = RoadNetwork::from_pairs(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let (label, count) = g.components();
        assert_eq!(count, 2);
        assert_eq!(label, vec![0, 0, 0, 1, 1]);
        let (sub, origin) = g.induced(&[2, 1, 4]);
        assert_eq!(sub.edges(), &[(0, 1)]);
        assert_eq!(origin, vec![1]);
    }
}
