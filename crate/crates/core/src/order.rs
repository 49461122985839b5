//! Vertex ranks derived from a tree hierarchy.
//!
//! Vertices are ranked top-down: the root node's vertices get ranks
//! `1..=|root|`, and each child continues where its parent stopped. Within a
//! node, vertices are ranked by ascending id. The ancestors of `v` are the
//! vertices of every node on the root path plus the vertices of `v`'s own
//! node ranked at or above `v`; they form a chain containing exactly one
//! vertex per rank `1..=τ(v)`.

use crate::graph::{Vertex, NAN};
use crate::hierarchy::TreeHierarchy;

/// Root-to-node position of a tree node, packed as bits (level `l` at bit
/// `l`) together with the depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeIdentifier {
    pub bits: u64,
    pub len: u8,
}

impl NodeIdentifier {
    pub fn common_prefix_len(self, other: NodeIdentifier) -> u32 {
        let limit = self.len.min(other.len) as u32;
        let diff = self.bits ^ other.bits;
        diff.trailing_zeros().min(limit)
    }

    pub fn bit(self, level: u32) -> u8 {
        ((self.bits >> level) & 1) as u8
    }
}

impl std::fmt::Display for NodeIdentifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.len == 0 {
            return f.write_str("ε");
        }
        for l in 0..self.len as u32 {
            write!(f, "{}", self.bit(l))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrder {
    rank: Vec<u32>,
    node_of: Vec<u32>,
    /// Ancestor chain of each node's vertices, indexed by rank - 1.
    chain: Vec<Vertex>,
    chain_offset: Vec<usize>,
    /// Highest rank inside each node, plus the root-path list of these.
    node_top: Vec<u32>,
    node_path: Vec<u32>,
    path_offset: Vec<usize>,
    node_id: Vec<NodeIdentifier>,
    descendants: Vec<u32>,
    /// Vertices sorted by rank, then id; `level_offset[r - 1]..level_offset[r]`
    /// holds rank `r`.
    by_rank: Vec<Vertex>,
    level_offset: Vec<usize>,
}

impl VertexOrder {
    pub fn from_hierarchy(h: &TreeHierarchy) -> Self {
        let n = h.vertex_count();
        let nodes = h.nodes();
        let mut rank = vec![0u32; n];
        let mut node_top = vec![0u32; nodes.len()];
        let mut chain = Vec::new();
        let mut chain_offset = Vec::with_capacity(nodes.len() + 1);
        let mut node_path = Vec::new();
        let mut path_offset = Vec::with_capacity(nodes.len() + 1);
        let mut node_id = Vec::with_capacity(nodes.len());
        for (id, node) in nodes.iter().enumerate() {
            // Preorder guarantees the parent has been handled already.
            let (base, parent_chain, parent_path) = if node.parent == NAN {
                (0, 0..0, 0..0)
            } else {
                let p = node.parent as usize;
                (
                    node_top[p],
                    chain_offset[p]..chain_offset[p] + node_top[p] as usize,
                    path_offset[p]..path_offset[p] + node.depth as usize,
                )
            };
            chain_offset.push(chain.len());
            chain.extend_from_within(parent_chain);
            chain.extend_from_slice(&node.vertices);
            for (i, &v) in node.vertices.iter().enumerate() {
                rank[v as usize] = base + i as u32 + 1;
            }
            node_top[id] = base + node.vertices.len() as u32;
            path_offset.push(node_path.len());
            node_path.extend_from_within(parent_path);
            node_path.push(node_top[id]);
            node_id.push(NodeIdentifier { bits: node.bits, len: node.depth as u8 });
        }
        chain_offset.push(chain.len());
        path_offset.push(node_path.len());

        let mut descendants = vec![0u32; n];
        for node in nodes {
            let below: u32 = node.subtree_size - node.vertices.len() as u32;
            let count = node.vertices.len() as u32;
            for (i, &v) in node.vertices.iter().enumerate() {
                descendants[v as usize] = below + (count - i as u32);
            }
        }

        let max_rank = rank.iter().copied().max().unwrap_or(0) as usize;
        let mut by_rank: Vec<Vertex> = (0..n as Vertex).collect();
        by_rank.sort_by_key(|&v| (rank[v as usize], v));
        let mut level_offset = vec![0usize; max_rank + 1];
        for &r in &rank {
            level_offset[r as usize] += 1;
        }
        for r in 1..=max_rank {
            level_offset[r] += level_offset[r - 1];
        }

        VertexOrder {
            rank,
            node_of: (0..n as Vertex).map(|v| h.node_of(v)).collect(),
            chain,
            chain_offset,
            node_top,
            node_path,
            path_offset,
            node_id,
            descendants,
            by_rank,
            level_offset,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.rank.len()
    }

    /// Height of the order (largest rank).
    pub fn max_rank(&self) -> u32 {
        (self.level_offset.len() - 1) as u32
    }

    #[inline]
    pub fn rank(&self, v: Vertex) -> u32 {
        self.rank[v as usize]
    }

    pub fn ranks(&self) -> &[u32] {
        &self.rank
    }

    pub fn node_of(&self, v: Vertex) -> u32 {
        self.node_of[v as usize]
    }

    /// Ancestors of `v` (including `v`) ordered by rank.
    #[inline]
    pub fn ancestors(&self, v: Vertex) -> &[Vertex] {
        let start = self.chain_offset[self.node_of[v as usize] as usize];
        &self.chain[start..start + self.rank[v as usize] as usize]
    }

    /// The ancestor of `v` with rank `r`.
    #[inline]
    pub fn ancestor_at(&self, v: Vertex, r: u32) -> Vertex {
        debug_assert!(r >= 1 && r <= self.rank(v));
        self.chain[self.chain_offset[self.node_of[v as usize] as usize] + r as usize - 1]
    }

    pub fn is_ancestor(&self, w: Vertex, v: Vertex) -> bool {
        let r = self.rank(w);
        r <= self.rank(v) && self.ancestor_at(v, r) == w
    }

    /// Number of descendants of `v`, counting `v` itself.
    pub fn descendant_count(&self, v: Vertex) -> u32 {
        self.descendants[v as usize]
    }

    pub fn identifier(&self, v: Vertex) -> NodeIdentifier {
        self.node_id[self.node_of[v as usize] as usize]
    }

    /// Ranks of the highest vertex of each strict ancestor node of `v`,
    /// root first, followed by `τ(v)`.
    pub fn rank_array(&self, v: Vertex) -> Vec<u32> {
        let node = self.node_of[v as usize] as usize;
        let path = &self.node_path[self.path_offset[node]..self.path_offset[node + 1]];
        let mut out = path[..path.len() - 1].to_vec();
        out.push(self.rank(v));
        out
    }

    /// Rank of the lowest common ancestor of `s` and `t`, i.e. the number of
    /// hubs shared by both chains.
    #[inline]
    pub fn lca_height(&self, s: Vertex, t: Vertex) -> u32 {
        let (ns, nt) = (self.node_of[s as usize] as usize, self.node_of[t as usize] as usize);
        let (is, it) = (self.node_id[ns], self.node_id[nt]);
        let cpl = is.common_prefix_len(it);
        let (full_s, full_t) = (cpl == is.len as u32, cpl == it.len as u32);
        match (full_s, full_t) {
            (true, true) => self.rank(s).min(self.rank(t)),
            (true, false) => self.rank(s),
            (false, true) => self.rank(t),
            (false, false) => self.node_path[self.path_offset[ns] + cpl as usize],
        }
    }

    /// Vertices of rank `r` (1-based), ascending by id.
    pub fn level(&self, r: u32) -> &[Vertex] {
        &self.by_rank[self.level_offset[r as usize - 1]..self.level_offset[r as usize]]
    }

    /// All vertices sorted by (rank, id).
    pub fn by_rank(&self) -> &[Vertex] {
        &self.by_rank
    }

    /// Highest rank inside the tree node `node`.
    pub fn node_top(&self, node: u32) -> u32 {
        self.node_top[node as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RoadNetwork;
    use crate::hierarchy::HierarchyConfig;
    use crate::synthetic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn order_of(g: &RoadNetwork, leaf_size: usize) -> (TreeHierarchy, VertexOrder) {
        let h = TreeHierarchy::build(g, HierarchyConfig { leaf_size, ..Default::default() }).unwrap();
        let o = VertexOrder::from_hierarchy(&h);
        (h, o)
    }

    /// LCA rank by intersecting ancestor chains.
    fn lca_brute(o: &VertexOrder, s: Vertex, t: Vertex) -> u32 {
        let (a, b) = (o.ancestors(s), o.ancestors(t));
        a.iter().zip(b).take_while(|(x, y)| x == y).count() as u32
    }

    #[test]
    fn identifier_prefixes() {
        let a = NodeIdentifier { bits: 0b0110, len: 4 };
        let b = NodeIdentifier { bits: 0b1110, len: 4 };
        let c = NodeIdentifier { bits: 0b10, len: 2 };
        assert_eq!(a.common_prefix_len(b), 3);
        assert_eq!(a.common_prefix_len(c), 2);
        assert_eq!(a.common_prefix_len(NodeIdentifier { bits: 0, len: 0 }), 0);
        assert_eq!(a.to_string(), "0110");
    }

    #[test]
    fn path_of_seven() {
        let pairs: Vec<_> = (0..6).map(|i| (i, i + 1)).collect();
        let (g, _) = RoadNetwork::from_pairs(7, &pairs).unwrap();
        let (_, o) = order_of(&g, 1);
        assert_eq!(o.rank(3), 1);
        assert_eq!(o.max_rank(), 3);
        assert_eq!(o.descendant_count(3), 7);
        // vertices in different halves share only the root
        assert_eq!(o.lca_height(0, 6), 1);
        assert_eq!(o.lca_height(3, 6), 1);
        assert_eq!(o.lca_height(1, 2), 2);
        assert_eq!(o.lca_height(5, 5), o.rank(5));
    }

    #[test]
    fn ranks_form_chains() {
        for seed in 0..3 {
            let (g, _) = synthetic::road_like(700, seed);
            let (h, o) = order_of(&g, 16);
            let mut per_rank = vec![0; o.max_rank() as usize + 1];
            for v in 0..700 {
                let anc = o.ancestors(v);
                assert_eq!(anc.len() as u32, o.rank(v));
                assert_eq!(*anc.last().unwrap(), v);
                for (i, &a) in anc.iter().enumerate() {
                    assert_eq!(o.rank(a), i as u32 + 1);
                    assert!(h.is_ancestor_node(o.node_of(a), o.node_of(v)));
                }
                per_rank[o.rank(v) as usize] += 1;
                let ra = o.rank_array(v);
                assert_eq!(ra.len(), o.identifier(v).len as usize + 1);
                assert_eq!(*ra.last().unwrap(), o.rank(v));
            }
            for r in 1..=o.max_rank() {
                assert_eq!(o.level(r).len(), per_rank[r as usize]);
                assert!(o.level(r).iter().all(|&v| o.rank(v) == r));
            }
        }
    }

    #[test]
    fn edges_join_ancestor_pairs() {
        let (g, _) = synthetic::road_like(900, 4);
        let (_, o) = order_of(&g, 16);
        for &(u, v) in g.edges() {
            assert!(o.is_ancestor(u, v) || o.is_ancestor(v, u));
        }
    }

    #[test]
    fn descendant_counts_match_brute_force() {
        let (g, _) = synthetic::road_like(300, 2);
        let (_, o) = order_of(&g, 8);
        let mut count = vec![0u32; 300];
        for v in 0..300 {
            for &a in o.ancestors(v) {
                count[a as usize] += 1;
            }
        }
        for v in 0..300 {
            assert_eq!(o.descendant_count(v), count[v as usize]);
        }
    }

    #[test]
    fn lca_height_matches_chain_intersection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..4 {
            let (g, _) = synthetic::road_like(1000, seed);
            let (_, o) = order_of(&g, [1, 4, 16, 40][seed as usize]);
            for _ in 0..3000 {
                let s = rng.random_range(0..1000);
                let t = if rng.random_bool(0.1) { s } else { rng.random_range(0..1000) };
                assert_eq!(o.lca_height(s, t), lca_brute(&o, s, t), "s={s} t={t}");
                assert_eq!(o.lca_height(s, t), o.lca_height(t, s));
            }
        }
    }
}
