//! Restriction to the largest connected component followed by repeated
//! removal of degree-one vertices. Removed vertices hang off the remaining
//! core in trees; each records its parent edge so that distances and paths
//! involving it can be recovered exactly from a core query.

use crate::graph::{add_cost, EdgeId, Metric, RoadNetwork, Vertex, Weight, NAN};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    /// Original vertex → core id, `NAN` when not in the core.
    core_of: Vec<Vertex>,
    /// Core id → original vertex (ascending).
    core_vertices: Vec<Vertex>,
    /// Core edge → original edge.
    core_edge_origin: Vec<EdgeId>,
    /// Next vertex toward the core for removed vertices, `NAN` otherwise.
    parent: Vec<Vertex>,
    parent_edge: Vec<EdgeId>,
    /// Core id of the vertex a removed vertex ultimately hangs off. `NAN` for
    /// vertices outside the indexed component.
    anchor: Vec<Vertex>,
    hops: Vec<u32>,
    /// Removed vertices in removal order (leaves first).
    removed: Vec<Vertex>,
}

/// Where a query endpoint sits relative to the core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Outside the indexed component.
    Outside,
    /// In the core (given as a core id) or hanging off it.
    Anchored { anchor: Vertex },
}

impl Reduction {
    /// Keeps the largest connected component (lowest label on ties) and peels
    /// degree-one vertices until the core has minimum degree two or is a
    /// single vertex. Returns the core network alongside the map.
    pub fn contract(network: &RoadNetwork) -> (RoadNetwork, Reduction) {
        let n = network.vertex_count();
        let (label, count) = network.components();
        let mut size = vec![0usize; count];
        for &l in &label {
            size[l as usize] += 1;
        }
        let main = (0..count).max_by_key(|&c| (size[c], std::cmp::Reverse(c))).unwrap_or(0) as u32;

        let mut in_main: Vec<bool> = label.iter().map(|&l| l == main).collect();
        let mut degree: Vec<u32> =
            (0..n as Vertex).map(|v| if in_main[v as usize] { network.degree(v) as u32 } else { 0 }).collect();
        let mut queue: Vec<Vertex> = (0..n as Vertex).filter(|&v| degree[v as usize] == 1).collect();
        let mut parent = vec![NAN; n];
        let mut parent_edge = vec![NAN; n];
        let mut removed = Vec::new();
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            if degree[v as usize] != 1 {
                continue;
            }
            let (p, e) =
                network.arcs(v).find(|&(w, _)| in_main[w as usize]).expect("degree one implies a live neighbor");
            in_main[v as usize] = false;
            degree[v as usize] = 0;
            parent[v as usize] = p;
            parent_edge[v as usize] = e;
            removed.push(v);
            degree[p as usize] -= 1;
            if degree[p as usize] == 1 {
                queue.push(p);
            }
        }

        let core_vertices: Vec<Vertex> = (0..n as Vertex).filter(|&v| in_main[v as usize]).collect();
        let mut core_of = vec![NAN; n];
        for (i, &v) in core_vertices.iter().enumerate() {
            core_of[v as usize] = i as Vertex;
        }
        let mut anchor = core_of.clone();
        let mut hops = vec![0u32; n];
        for &v in removed.iter().rev() {
            let p = parent[v as usize];
            anchor[v as usize] = anchor[p as usize];
            hops[v as usize] = hops[p as usize] + 1;
        }
        let (core, core_edge_origin) = network.induced(&core_vertices);
        let reduction =
            Reduction { core_of, core_vertices, core_edge_origin, parent, parent_edge, anchor, hops, removed };
        (core, reduction)
    }

    pub fn original_vertex_count(&self) -> usize {
        self.core_of.len()
    }

    pub fn core_vertex_count(&self) -> usize {
        self.core_vertices.len()
    }

    pub fn removed_count(&self) -> usize {
        self.removed.len()
    }

    pub fn core_id(&self, v: Vertex) -> Option<Vertex> {
        Some(self.core_of[v as usize]).filter(|&c| c != NAN)
    }

    pub fn original_id(&self, core: Vertex) -> Vertex {
        self.core_vertices[core as usize]
    }

    pub fn core_vertices(&self) -> &[Vertex] {
        &self.core_vertices
    }

    pub fn core_edge_origin(&self) -> &[EdgeId] {
        &self.core_edge_origin
    }

    pub fn placement(&self, v: Vertex) -> Placement {
        match self.anchor[v as usize] {
            NAN => Placement::Outside,
            anchor => Placement::Anchored { anchor },
        }
    }

    /// Parent toward the core, for removed vertices.
    pub fn parent(&self, v: Vertex) -> Option<(Vertex, EdgeId)> {
        let p = self.parent[v as usize];
        (p != NAN).then(|| (p, self.parent_edge[v as usize]))
    }

    /// Metric restricted to the core.
    pub fn core_metric(&self, metric: &Metric) -> Metric {
        metric.restrict(&self.core_edge_origin)
    }

    /// Cost from every vertex to its anchor under `metric` (0 for core
    /// vertices and vertices outside the indexed component).
    pub fn pendant_costs(&self, metric: &Metric) -> Vec<Weight> {
        let mut cost = vec![0; self.core_of.len()];
        for &v in self.removed.iter().rev() {
            let p = self.parent[v as usize];
            cost[v as usize] = add_cost(cost[p as usize], metric.cost(self.parent_edge[v as usize]));
        }
        cost
    }

    /// Vertices from `v` up to (and including) its anchor, in original ids.
    pub fn climb(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        std::iter::successors(Some(v), move |&x| Some(self.parent[x as usize]).filter(|&p| p != NAN))
    }

    /// Lowest common vertex of two vertices hanging off the same anchor.
    pub fn meeting_vertex(&self, mut s: Vertex, mut t: Vertex) -> Vertex {
        debug_assert_eq!(self.anchor[s as usize], self.anchor[t as usize]);
        while self.hops[s as usize] > self.hops[t as usize] {
            s = self.parent[s as usize];
        }
        while self.hops[t as usize] > self.hops[s as usize] {
            t = self.parent[t as usize];
        }
        while s != t {
            s = self.parent[s as usize];
            t = self.parent[t as usize];
        }
        s
    }

    pub(crate) fn parts(&self) -> ReductionParts<'_> {
        ReductionParts {
            core_of: &self.core_of,
            parent: &self.parent,
            parent_edge: &self.parent_edge,
            removed: &self.removed,
        }
    }

    /// Reassembles a reduction from its persisted parts; derived fields are
    /// recomputed. Returns `None` when the parts are inconsistent.
    pub(crate) fn from_parts(
        network: &RoadNetwork,
        core_of: Vec<Vertex>,
        parent: Vec<Vertex>,
        parent_edge: Vec<EdgeId>,
        removed: Vec<Vertex>,
    ) -> Option<Reduction> {
        let n = network.vertex_count();
        if core_of.len() != n || parent.len() != n || parent_edge.len() != n {
            return None;
        }
        let core_vertices: Vec<Vertex> = (0..n as Vertex).filter(|&v| core_of[v as usize] != NAN).collect();
        if core_vertices.iter().enumerate().any(|(i, &v)| core_of[v as usize] != i as Vertex) {
            return None;
        }
        let mut anchor = core_of.clone();
        let mut hops = vec![0u32; n];
        for &v in removed.iter().rev() {
            let p = *parent.get(v as usize)?;
            if p as usize >= n || parent_edge[v as usize] as usize >= network.edge_count() {
                return None;
            }
            anchor[v as usize] = anchor[p as usize];
            hops[v as usize] = hops[p as usize] + 1;
        }
        let (_, core_edge_origin) = network.induced(&core_vertices);
        Some(Reduction { core_of, core_vertices, core_edge_origin, parent, parent_edge, anchor, hops, removed })
    }
}

pub(crate) struct ReductionParts<'a> {
    pub core_of: &'a [Vertex],
    pub parent: &'a [Vertex],
    pub parent_edge: &'a [EdgeId],
    pub removed: &'a [Vertex],
}
