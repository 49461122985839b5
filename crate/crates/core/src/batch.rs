//! Batched path queries with prefix reuse.
//!
//! Every query contributes two chains, oriented from the hub out to each
//! endpoint. Sorting all chains lexicographically places chains with long
//! common prefixes next to each other, so each chain only needs to unpack
//! the part that differs from its predecessor in sorted order and can copy
//! the rest.

use crate::error::CorruptionError;
use crate::graph::{EdgeId, Vertex, Weight};
use crate::path::EndpointChain;
use crate::query::QueryAgent;

/// Length of the longest common prefix of `a` and `b`.
pub fn common_prefix<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Overlap of a chain sequence: per element, the longest common prefix with
/// any earlier element, and the total over all elements.
pub fn overlap<T: PartialEq, C: AsRef<[T]>>(chains: &[C]) -> (u64, Vec<usize>) {
    let per: Vec<usize> = (0..chains.len())
        .map(|j| (0..j).map(|i| common_prefix(chains[i].as_ref(), chains[j].as_ref())).max().unwrap_or(0))
        .collect();
    (per.iter().map(|&x| x as u64).sum(), per)
}

/// Lexicographic order of `chains` (as indices) and, per position, the
/// common prefix length with the previous chain in that order.
pub fn lexicographic_order<T: Ord, C: AsRef<[T]>>(chains: &[C]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..chains.len()).collect();
    order.sort_by(|&a, &b| chains[a].as_ref().cmp(chains[b].as_ref()));
    let adjacent = (0..order.len())
        .map(|j| if j == 0 { 0 } else { common_prefix(chains[order[j - 1]].as_ref(), chains[order[j]].as_ref()) })
        .collect();
    (order, adjacent)
}

/// Prefix-reuse accounting for one batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OverlapReport {
    pub chains: u64,
    /// Total overlap of the sorted chain sequence.
    pub overlap: u64,
    /// Chain edges across all chains.
    pub chain_edges: u64,
    /// Chain edges copied from the previous chain instead of expanded.
    pub reused_edges: u64,
}

impl OverlapReport {
    /// Share of chain-edge expansions avoided, in percent.
    pub fn percent_avoided(&self) -> f64 {
        if self.chain_edges == 0 {
            0.0
        } else {
            100.0 * self.reused_edges as f64 / self.chain_edges as f64
        }
    }

    pub fn merge(&mut self, other: &OverlapReport) {
        self.chains += other.chains;
        self.overlap += other.overlap;
        self.chain_edges += other.chain_edges;
        self.reused_edges += other.reused_edges;
    }
}

/// Per-query outcome: distance and path, an empty path when unreachable.
pub type PathResult = Result<(Weight, Vec<Vertex>), CorruptionError>;

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    /// One entry per submitted pair, in submission order.
    pub results: Vec<PathResult>,
    pub report: OverlapReport,
}

/// Hub-first chains stored back to back.
#[derive(Default)]
struct ChainPool {
    vertices: Vec<Vertex>,
    edges: Vec<EdgeId>,
    /// Start of each chain in `vertices`; chain `c` owns edges
    /// `start[c] - c..start[c + 1] - c - 1`.
    start: Vec<usize>,
}

impl ChainPool {
    fn push(&mut self, c: EndpointChain) -> usize {
        if self.start.is_empty() {
            self.start.push(0);
        }
        self.vertices.extend(c.vertices.iter().rev());
        self.edges.extend(c.edges.iter().rev());
        self.start.push(self.vertices.len());
        self.start.len() - 2
    }

    fn len(&self) -> usize {
        self.start.len().saturating_sub(1)
    }

    fn vertices(&self, c: usize) -> &[Vertex] {
        &self.vertices[self.start[c]..self.start[c + 1]]
    }

    fn edges(&self, c: usize) -> &[EdgeId] {
        &self.edges[self.start[c] - c..self.start[c + 1] - c - 1]
    }
}

/// Unpacked chains stored back to back in processing order.
#[derive(Default)]
struct Unpacked {
    path: Vec<Vertex>,
    /// Offset within its chain's path of every chain vertex.
    cuts: Vec<u32>,
    /// Per chain: start in `path` and in `cuts`, `None` on failure.
    span: Vec<Option<(usize, usize)>>,
    /// Per chain: end in `path`.
    end: Vec<usize>,
    failed: Vec<Option<CorruptionError>>,
}

enum Pending {
    Done(PathResult),
    Chains { distance: Weight, source: usize, target: usize },
}

/// Answers all `pairs` (core ids) with shared prefix unpacking.
pub fn batch_get_paths(agent: &mut QueryAgent<'_>, pairs: &[(Vertex, Vertex)]) -> BatchOutcome {
    let mut pool = ChainPool::default();
    let mut pending = Vec::with_capacity(pairs.len());
    for &(s, t) in pairs {
        pending.push(match agent.chains(s, t) {
            Err(e) => Pending::Done(Err(e)),
            Ok((r, None)) => Pending::Done(Ok((r.distance, Vec::new()))),
            Ok((r, Some((cs, ct)))) => {
                let source = pool.push(cs);
                let target = pool.push(ct);
                Pending::Chains { distance: r.distance, source, target }
            }
        });
    }

    let chains = pool.len();
    let keys: Vec<&[Vertex]> = (0..chains).map(|c| pool.vertices(c)).collect();
    let (order, adjacent) = lexicographic_order(&keys);
    let mut report = OverlapReport { chains: chains as u64, ..Default::default() };
    let mut done =
        Unpacked { span: vec![None; chains], end: vec![0; chains], failed: vec![None; chains], ..Default::default() };
    let mut previous: Option<usize> = None;
    for (j, &c) in order.iter().enumerate() {
        let (vertices, edges) = (pool.vertices(c), pool.edges(c));
        let shared = adjacent[j];
        report.overlap += shared as u64;
        report.chain_edges += edges.len() as u64;
        let (path_start, cut_start) = (done.path.len(), done.cuts.len());
        let from = match previous {
            Some(p) if shared > 1 => {
                let (pp, pk) = done.span[p].expect("previous chain unpacked");
                let prefix = done.cuts[pk + shared - 1] as usize + 1;
                done.path.extend_from_within(pp..pp + prefix);
                done.cuts.extend_from_within(pk..pk + shared);
                report.reused_edges += shared as u64 - 1;
                shared - 1
            }
            _ => {
                done.path.push(vertices[0]);
                done.cuts.push(0);
                0
            }
        };
        let mut failed = None;
        for &e in &edges[from..] {
            if let Err(err) = agent.expand_edge(e, true, &mut done.path) {
                failed = Some(err);
                break;
            }
            done.cuts.push((done.path.len() - 1 - path_start) as u32);
        }
        if failed.is_some() {
            done.path.truncate(path_start);
            done.cuts.truncate(cut_start);
            done.failed[c] = failed;
            previous = None;
        } else {
            done.span[c] = Some((path_start, cut_start));
            done.end[c] = done.path.len();
            previous = Some(c);
        }
    }

    let path_of = |c: usize| done.span[c].map(|(p, _)| &done.path[p..done.end[c]]);
    let results = pending
        .into_iter()
        .map(|p| match p {
            Pending::Done(r) => r,
            Pending::Chains { distance, source, target } => {
                if let Some(err) = done.failed[source].clone().or_else(|| done.failed[target].clone()) {
                    return Err(err);
                }
                let (us, ut) = (path_of(source).unwrap(), path_of(target).unwrap());
                let mut path = Vec::with_capacity(us.len() + ut.len() - 1);
                path.extend(us.iter().rev());
                path.extend_from_slice(&ut[1..]);
                Ok((distance, path))
            }
        })
        .collect();
    BatchOutcome { results, report }
}
