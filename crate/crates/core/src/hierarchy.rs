//! Balanced separator tree over the vertices of a connected network.
//!
//! Each tree node holds a vertex separator of the part of the graph it was
//! built from; the two children hold the remaining sides. Parts no larger
//! than the leaf size become a single leaf node. Any path between vertices in
//! different subtrees must cross a common ancestor node, which is what makes
//! the ancestors of a vertex usable as its hubs.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::HierarchyError;
use crate::graph::{RoadNetwork, Vertex, NAN};

pub const DEFAULT_BETA: f64 = 0.25;
pub const DEFAULT_LEAF_SIZE: usize = 16;
/// Seed attempts per part before accepting an unbalanced split.
pub const SEPARATOR_ATTEMPTS: u32 = 8;
/// Identifiers are packed into one 64-bit word.
pub const MAX_DEPTH: usize = 64;

/// Parts up to this size fall back to an exhaustive separator search.
const EXHAUSTIVE_LIMIT: usize = 12;

const CUT_FRACTIONS: [f64; 7] = [0.5, 0.45, 0.55, 0.4, 0.6, 0.35, 0.65];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyConfig {
    pub beta: f64,
    pub leaf_size: usize,
    pub seed: u64,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig { beta: DEFAULT_BETA, leaf_size: DEFAULT_LEAF_SIZE, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// Vertices mapped to this node, ascending.
    pub vertices: Vec<Vertex>,
    pub parent: u32,
    /// Left and right child, `NAN` when absent. A single child is always left.
    pub children: [u32; 2],
    pub depth: u32,
    /// Position bits, level `l` stored at bit `l` (0 = left, 1 = right).
    pub bits: u64,
    /// Number of vertices in the subtree rooted here, this node included.
    pub subtree_size: u32,
}

/// Binary separator tree with nodes stored in preorder (root first).
#[derive(Debug, Clone, PartialEq)]
pub struct TreeHierarchy {
    beta: f64,
    leaf_size: usize,
    nodes: Vec<TreeNode>,
    node_of: Vec<u32>,
    unbalanced: usize,
}

impl TreeHierarchy {
    pub fn build(network: &RoadNetwork, config: HierarchyConfig) -> Result<Self, HierarchyError> {
        if !(config.beta > 0.0 && config.beta < 0.5) {
            return Err(HierarchyError::InvalidBeta(config.beta));
        }
        let n = network.vertex_count();
        if n == 0 {
            return Err(HierarchyError::Empty);
        }
        if !network.is_connected() {
            return Err(HierarchyError::Disconnected);
        }
        let mut builder = Builder {
            network,
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            stamp: vec![0; n],
            local: vec![0; n],
            current: 0,
            nodes: Vec::new(),
            node_of: vec![NAN; n],
            unbalanced: 0,
        };
        builder.recurse((0..n as Vertex).collect(), NAN, 0, 0)?;
        let mut hierarchy = TreeHierarchy {
            beta: config.beta,
            leaf_size: config.leaf_size.max(1),
            nodes: builder.nodes,
            node_of: builder.node_of,
            unbalanced: builder.unbalanced,
        };
        hierarchy.compute_subtree_sizes();
        if hierarchy.unbalanced > 0 {
            log::warn!("{} tree nodes could not be balanced (beta = {})", hierarchy.unbalanced, config.beta);
        }
        Ok(hierarchy)
    }

    /// Rebuilds a hierarchy from per-node vertex lists and child flags given
    /// in preorder. Returns `None` if the description is inconsistent.
    pub fn from_preorder(
        vertex_count: usize,
        beta: f64,
        leaf_size: usize,
        layout: Vec<(Vec<Vertex>, [bool; 2])>,
    ) -> Option<Self> {
        let mut hierarchy =
            TreeHierarchy { beta, leaf_size, nodes: Vec::new(), node_of: vec![NAN; vertex_count], unbalanced: 0 };
        let mut iter = layout.into_iter();
        hierarchy.take_node(&mut iter, NAN, 0, 0)?;
        if iter.next().is_some() || hierarchy.node_of.contains(&NAN) {
            return None;
        }
        hierarchy.compute_subtree_sizes();
        Some(hierarchy)
    }

    fn take_node(
        &mut self,
        iter: &mut impl Iterator<Item = (Vec<Vertex>, [bool; 2])>,
        parent: u32,
        depth: u32,
        bits: u64,
    ) -> Option<u32> {
        let (vertices, has_child) = iter.next()?;
        if depth as usize > MAX_DEPTH || vertices.is_empty() || !vertices.windows(2).all(|w| w[0] < w[1]) {
            return None;
        }
        if has_child[1] && !has_child[0] {
            return None;
        }
        let id = self.nodes.len() as u32;
        for &v in &vertices {
            let slot = self.node_of.get_mut(v as usize)?;
            if *slot != NAN {
                return None;
            }
            *slot = id;
        }
        self.nodes.push(TreeNode { vertices, parent, children: [NAN; 2], depth, bits, subtree_size: 0 });
        if has_child[0] {
            let child = self.take_node(iter, id, depth + 1, bits)?;
            self.nodes[id as usize].children[0] = child;
        }
        if has_child[1] {
            let child = self.take_node(iter, id, depth + 1, bits | 1u64.checked_shl(depth).unwrap_or(0))?;
            self.nodes[id as usize].children[1] = child;
        }
        Some(id)
    }

    fn compute_subtree_sizes(&mut self) {
        for id in (0..self.nodes.len()).rev() {
            let node = &self.nodes[id];
            let mut size = node.vertices.len() as u32;
            for &c in &node.children {
                if c != NAN {
                    size += self.nodes[c as usize].subtree_size;
                }
            }
            self.nodes[id].subtree_size = size;
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: u32) -> &TreeNode {
        &self.nodes[id as usize]
    }

    pub fn node_of(&self, v: Vertex) -> u32 {
        self.node_of[v as usize]
    }

    pub fn vertex_count(&self) -> usize {
        self.node_of.len()
    }

    /// Number of internal nodes whose split missed the balance target.
    pub fn unbalanced_nodes(&self) -> usize {
        self.unbalanced
    }

    pub(crate) fn with_unbalanced(mut self, count: usize) -> Self {
        self.unbalanced = count;
        self
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.depth as usize + 1).max().unwrap_or(0)
    }

    /// Whether node `a` is `b` or one of its ancestors.
    pub fn is_ancestor_node(&self, a: u32, b: u32) -> bool {
        let (na, nb) = (&self.nodes[a as usize], &self.nodes[b as usize]);
        if na.depth > nb.depth {
            return false;
        }
        let mask = if na.depth >= 64 { u64::MAX } else { (1u64 << na.depth) - 1 };
        (na.bits ^ nb.bits) & mask == 0
    }

    /// All vertices in the subtree rooted at `id`.
    pub fn subtree_vertices(&self, id: u32) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            let node = &self.nodes[x as usize];
            out.extend_from_slice(&node.vertices);
            stack.extend(node.children.iter().copied().filter(|&c| c != NAN));
        }
        out
    }
}

struct Split {
    separator: Vec<Vertex>,
    left: Vec<Vertex>,
    right: Vec<Vertex>,
}

impl Split {
    fn max_side(&self) -> usize {
        self.left.len().max(self.right.len())
    }

    fn balanced(&self, beta: f64) -> bool {
        let total = (self.left.len() + self.right.len()) as f64;
        self.max_side() as f64 <= (1.0 - beta) * total + 1e-9
    }
}

struct Builder<'a> {
    network: &'a RoadNetwork,
    config: HierarchyConfig,
    rng: ChaCha8Rng,
    stamp: Vec<u32>,
    local: Vec<u32>,
    current: u32,
    nodes: Vec<TreeNode>,
    node_of: Vec<u32>,
    unbalanced: usize,
}

impl Builder<'_> {
    fn recurse(&mut self, mut part: Vec<Vertex>, parent: u32, depth: u32, bits: u64) -> Result<u32, HierarchyError> {
        if depth as usize > MAX_DEPTH {
            return Err(HierarchyError::TooDeep(depth as usize));
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(TreeNode { vertices: Vec::new(), parent, children: [NAN; 2], depth, bits, subtree_size: 0 });
        let split = if part.len() <= self.config.leaf_size.max(1) {
            part.sort_unstable();
            Split { separator: part, left: Vec::new(), right: Vec::new() }
        } else {
            self.split(&part)
        };
        let Split { mut separator, mut left, mut right } = split;
        separator.sort_unstable();
        for &v in &separator {
            self.node_of[v as usize] = id;
        }
        self.nodes[id as usize].vertices = separator;
        if left.is_empty() {
            std::mem::swap(&mut left, &mut right);
        }
        if !left.is_empty() {
            let child = self.recurse(left, id, depth + 1, bits)?;
            self.nodes[id as usize].children[0] = child;
        }
        if !right.is_empty() {
            let child = self.recurse(right, id, depth + 1, bits | 1u64.checked_shl(depth).unwrap_or(0))?;
            self.nodes[id as usize].children[1] = child;
        }
        Ok(id)
    }

    /// Marks `part` as the active vertex set and assigns local indices.
    fn activate(&mut self, part: &[Vertex]) {
        self.current += 1;
        for (i, &v) in part.iter().enumerate() {
            self.stamp[v as usize] = self.current;
            self.local[v as usize] = i as u32;
        }
    }

    #[inline]
    fn active(&self, v: Vertex) -> bool {
        self.stamp[v as usize] == self.current
    }

    /// Hop distances from `source` within the active set; `u32::MAX` elsewhere.
    fn bfs(&self, part: &[Vertex], source: Vertex) -> Vec<u32> {
        let mut dist = vec![u32::MAX; part.len()];
        let mut queue = VecDeque::new();
        dist[self.local[source as usize] as usize] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let d = dist[self.local[v as usize] as usize];
            for &w in self.network.neighbors(v) {
                if self.active(w) && dist[self.local[w as usize] as usize] == u32::MAX {
                    dist[self.local[w as usize] as usize] = d + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn farthest(&self, part: &[Vertex], dist: &[u32]) -> Vertex {
        let mut best = (0, NAN);
        for (i, &d) in dist.iter().enumerate() {
            if d != u32::MAX && (d > best.0 || best.1 == NAN) {
                best = (d, part[i]);
            }
        }
        best.1
    }

    fn components(&self, part: &[Vertex]) -> Vec<Vec<Vertex>> {
        let mut seen = vec![false; part.len()];
        let mut comps = Vec::new();
        for &root in part {
            if seen[self.local[root as usize] as usize] {
                continue;
            }
            seen[self.local[root as usize] as usize] = true;
            let mut comp = vec![root];
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for &w in self.network.neighbors(v) {
                    if self.active(w) && !seen[self.local[w as usize] as usize] {
                        seen[self.local[w as usize] as usize] = true;
                        comp.push(w);
                    }
                }
            }
            comps.push(comp);
        }
        comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
        comps
    }

    fn split(&mut self, part: &[Vertex]) -> Split {
        self.activate(part);
        let mut comps = self.components(part);
        let beta = self.config.beta;
        let limit = (1.0 - beta) * part.len() as f64;

        if comps.len() > 1 && comps[0].len() as f64 <= limit {
            let mut split = Split { separator: Vec::new(), left: Vec::new(), right: Vec::new() };
            distribute(&mut split, &comps);
            self.promote(&mut split);
            if split.balanced(beta) || comps[0].len() < 2 {
                return self.settle(part, split);
            }
        }

        let main = comps.remove(0);
        let mut best: Option<Split> = None;
        for attempt in 0..SEPARATOR_ATTEMPTS {
            let start = if attempt == 0 { main[0] } else { main[self.rng.random_range(0..main.len())] };
            self.activate(&main);
            let a = self.farthest(&main, &self.bfs(&main, start));
            let from_a = self.bfs(&main, a);
            let b = self.farthest(&main, &from_a);
            let from_b = self.bfs(&main, b);
            let mut order: Vec<u32> = (0..main.len() as u32).collect();
            order.sort_by_key(|&i| {
                let (da, db) = (from_a[i as usize] as i64, from_b[i as usize] as i64);
                (da - db, da, main[i as usize])
            });
            let mut position = vec![0u32; main.len()];
            for (p, &i) in order.iter().enumerate() {
                position[i as usize] = p as u32;
            }
            for &fraction in &CUT_FRACTIONS {
                let cut = ((fraction * main.len() as f64).round() as usize).clamp(1, main.len() - 1);
                let mut split = self.cut(&main, &position, cut as u32);
                distribute(&mut split, &comps);
                if better(&split, best.as_ref(), beta) {
                    best = Some(split);
                }
            }
            if best.as_ref().is_some_and(|s| s.balanced(beta)) {
                break;
            }
        }
        let mut split = best.expect("at least one candidate split");
        if split.separator.is_empty() {
            self.activate(part);
            self.promote(&mut split);
        }
        self.settle(part, split)
    }

    /// Accepts a final split. One that leaves a side empty cannot be
    /// balanced, so the whole part becomes a single node instead; other
    /// unbalanced splits are kept and counted.
    fn settle(&mut self, part: &[Vertex], split: Split) -> Split {
        if split.balanced(self.config.beta) {
            return split;
        }
        let whole = || Split { separator: part.to_vec(), left: Vec::new(), right: Vec::new() };
        if part.len() <= EXHAUSTIVE_LIMIT {
            return self.exhaustive_split(part).unwrap_or_else(whole);
        }
        if split.left.is_empty() || split.right.is_empty() {
            return whole();
        }
        self.unbalanced += 1;
        split
    }

    /// Smallest balanced separator of a small part, trying every vertex
    /// subset in order of size.
    fn exhaustive_split(&mut self, part: &[Vertex]) -> Option<Split> {
        let n = part.len();
        let mut masks: Vec<u32> = (1..(1u32 << n) - 1).collect();
        masks.sort_by_key(|&m| (m.count_ones(), m));
        for mask in masks {
            let (separator, rest): (Vec<_>, Vec<_>) =
                part.iter().copied().enumerate().partition(|&(i, _)| mask >> i & 1 == 1);
            let rest: Vec<Vertex> = rest.into_iter().map(|(_, v)| v).collect();
            self.activate(&rest);
            let comps = self.components(&rest);
            let mut split = Split {
                separator: separator.into_iter().map(|(_, v)| v).collect(),
                left: Vec::new(),
                right: Vec::new(),
            };
            distribute(&mut split, &comps);
            if !split.right.is_empty() && split.balanced(self.config.beta) {
                return Some(split);
            }
        }
        None
    }

    /// Splits the connected active set `main` at `cut` along `position`, using
    /// the boundary of whichever side has fewer boundary vertices.
    fn cut(&self, main: &[Vertex], position: &[u32], cut: u32) -> Split {
        let side = |v: Vertex| position[self.local[v as usize] as usize] < cut;
        let mut sides: [Vec<Vertex>; 2] = [Vec::new(), Vec::new()];
        let mut boundary: [Vec<Vertex>; 2] = [Vec::new(), Vec::new()];
        for &v in main {
            let s = side(v) as usize;
            let on_boundary = self.network.neighbors(v).iter().any(|&w| self.active(w) && side(w) as usize != s);
            if on_boundary {
                boundary[s].push(v);
            } else {
                sides[s].push(v);
            }
        }
        let [interior_b, interior_a] = sides;
        let [boundary_b, boundary_a] = boundary;
        if boundary_a.len() <= boundary_b.len() {
            let mut right = interior_b;
            right.extend(boundary_b);
            Split { separator: boundary_a, left: interior_a, right }
        } else {
            let mut left = interior_a;
            left.extend(boundary_a);
            Split { separator: boundary_b, left, right: interior_b }
        }
    }

    /// Moves the highest-degree vertex of the larger side into an empty
    /// separator so that every tree node owns at least one vertex.
    fn promote(&self, split: &mut Split) {
        let larger = if split.left.len() >= split.right.len() { &mut split.left } else { &mut split.right };
        let (idx, _) = larger
            .iter()
            .enumerate()
            .max_by_key(|&(_, &v)| {
                let deg = self.network.neighbors(v).iter().filter(|&&w| self.active(w)).count();
                (deg, std::cmp::Reverse(v))
            })
            .expect("non-empty side");
        let v = larger.swap_remove(idx);
        split.separator.push(v);
    }
}

/// Assigns components (largest first) to the lighter side.
fn distribute(split: &mut Split, comps: &[Vec<Vertex>]) {
    for comp in comps {
        let side = if split.left.len() <= split.right.len() { &mut split.left } else { &mut split.right };
        side.extend_from_slice(comp);
    }
}

fn better(candidate: &Split, incumbent: Option<&Split>, beta: f64) -> bool {
    let Some(best) = incumbent else { return true };
    let key = |s: &Split| (!s.balanced(beta), s.separator.len(), s.max_side());
    key(candidate) < key(best)
}
