//! Shortest-path reconstruction.
//!
//! After a distance query, each endpoint is connected to the hub by an
//! endpoint chain: a rank-decreasing sequence of shortcut-graph edges whose
//! costs add up to that endpoint's share of the distance. The part of the
//! chain inside the truncated region comes from the predecessor entries of
//! the query scan; the rest follows path arrays, or re-derives the next step
//! from labels when the variant stores no path arrays. Each chain edge is
//! then expanded into original edges.

use std::fmt;
use std::str::FromStr;

use crate::error::CorruptionError;
use crate::graph::{add_cost, EdgeId, Vertex, Weight, INFINITY, NAN};
use crate::labeling::PathFlavor;
use crate::query::{DistanceResult, QueryAgent};

/// Storage variant: how shortcuts are unpacked (basic triangle vertices or
/// extended path records) and which path arrays the labels carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Bn,
    Bb,
    En,
    Eb,
    Ee,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Bn, Variant::Bb, Variant::En, Variant::Eb, Variant::Ee];

    pub fn extended_shortcuts(self) -> bool {
        matches!(self, Variant::En | Variant::Eb | Variant::Ee)
    }

    pub fn path_flavor(self) -> PathFlavor {
        match self {
            Variant::Bn | Variant::En => PathFlavor::None,
            Variant::Bb | Variant::Eb => PathFlavor::Basic,
            Variant::Ee => PathFlavor::Extended,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Bn => "bn",
            Variant::Bb => "bb",
            Variant::En => "en",
            Variant::Eb => "eb",
            Variant::Ee => "ee",
        }
    }

    pub fn code(self) -> u32 {
        Variant::ALL.iter().position(|&v| v == self).unwrap() as u32
    }

    pub fn from_code(code: u32) -> Option<Variant> {
        Variant::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown variant '{s}' (expected bn, bb, en, eb or ee)"))
    }
}

/// Rank-decreasing sequence from a query endpoint to the hub, with the
/// shortcut-graph edge between each consecutive pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EndpointChain {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<EdgeId>,
}

impl EndpointChain {
    pub fn endpoint(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn hub(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }

    fn push(&mut self, v: Vertex, e: EdgeId) {
        self.vertices.push(v);
        self.edges.push(e);
    }
}

impl QueryAgent<'_> {
    /// First upward neighbor `u` of untruncated `v` (in rank order) whose
    /// edge cost plus `C(u)` reproduces `C(v)` at rank `i`.
    pub fn get_ep(&self, v: Vertex, i: u32) -> Result<(Vertex, EdgeId), CorruptionError> {
        let ix = self.index;
        let broken = CorruptionError::NoWitness { vertex: v, rank: i };
        let target = ix.labels.label(v, ix.order.rank(v)).ok_or(broken.clone())?[i as usize - 1];
        if target == INFINITY {
            return Err(broken);
        }
        for e in ix.graph.up_edges(v) {
            let u = ix.graph.head(e);
            let tu = ix.order.rank(u);
            if tu < i {
                continue;
            }
            let cu = ix.labels.label(u, tu).ok_or(broken.clone())?[i as usize - 1];
            if cu != INFINITY && add_cost(ix.shortcuts.cost[e as usize], cu) == target {
                return Ok((u, e));
            }
        }
        Err(broken)
    }

    /// Extends `chain` from its last (untruncated) vertex to rank `i` using
    /// path arrays, or label witnesses when there are none.
    fn walk_labels(&mut self, chain: &mut EndpointChain, i: u32) -> Result<(), CorruptionError> {
        let ix = self.index;
        let mut cur = *chain.vertices.last().unwrap();
        while ix.order.rank(cur) > i {
            let (next, e) = match ix.labels.flavor() {
                PathFlavor::None => self.get_ep(cur, i)?,
                PathFlavor::Basic => {
                    let u = ix.labels.path_vertex(cur, i);
                    self.stats.dictionary_lookups += 1;
                    let e = (u != NAN).then(|| ix.graph.find_edge(cur, u)).flatten();
                    (u, e.unwrap_or(NAN))
                }
                PathFlavor::Extended => (ix.labels.path_vertex(cur, i), ix.labels.path_edge(cur, i).unwrap_or(NAN)),
            };
            if next == NAN || e == NAN {
                return Err(CorruptionError::BrokenChain { vertex: cur, rank: i });
            }
            debug_assert!(ix.order.rank(next) < ix.order.rank(cur));
            self.stats.chain_steps += 1;
            chain.push(next, e);
            cur = next;
        }
        Ok(())
    }

    /// Endpoint chain of scan `side` of the last query toward hub rank `i`.
    pub(crate) fn endpoint_chain(&mut self, side: usize, i: u32) -> Result<EndpointChain, CorruptionError> {
        let ix = self.index;
        let v = self.scans[side].vertex;
        let mut chain = EndpointChain { vertices: vec![v], edges: Vec::new() };
        if ix.order.rank(v) == i {
            return Ok(chain);
        }
        if !self.scans[side].truncated {
            self.walk_labels(&mut chain, i)?;
            return Ok(chain);
        }
        let scan = &self.scans[side];
        let broken = |r: u32| CorruptionError::BrokenChain { vertex: v, rank: r };
        let (w, last) = scan.pred[i as usize - 1];
        if w == NAN {
            return Err(broken(i));
        }
        // Walk predecessors back from w to v, then flip.
        let mut back = vec![w];
        let mut back_edges = Vec::new();
        let mut cur = w;
        while cur != v {
            let r = ix.order.rank(cur);
            let (p, e) = scan.pred[r as usize - 1];
            if p == NAN || e == NAN || back.len() > ix.order.rank(v) as usize {
                return Err(broken(r));
            }
            back.push(p);
            back_edges.push(e);
            cur = p;
        }
        back.reverse();
        back_edges.reverse();
        self.stats.chain_steps += back_edges.len() as u64;
        chain.vertices = back;
        chain.edges = back_edges;
        if last != NAN {
            self.stats.chain_steps += 1;
            chain.push(ix.graph.head(last), last);
        } else {
            self.walk_labels(&mut chain, i)?;
        }
        Ok(chain)
    }

    /// Distance plus both endpoint chains (source side first). Chains are
    /// `None` when `t` is unreachable.
    pub fn chains(
        &mut self,
        s: Vertex,
        t: Vertex,
    ) -> Result<(DistanceResult, Option<(EndpointChain, EndpointChain)>), CorruptionError> {
        let r = self.find_distance(s, t);
        if !r.is_reachable() {
            return Ok((r, None));
        }
        let cs = self.endpoint_chain(0, r.hub_rank)?;
        let ct = self.endpoint_chain(1, r.hub_rank)?;
        if cs.hub() != ct.hub() {
            return Err(CorruptionError::HubMismatch(cs.hub(), ct.hub()));
        }
        Ok((r, Some((cs, ct))))
    }

    /// Appends the expansion of edge `e`, excluding its start vertex.
    /// `forward` walks from the ancestor end down to the deeper end.
    pub fn expand_edge(&mut self, e: EdgeId, forward: bool, out: &mut Vec<Vertex>) -> Result<(), CorruptionError> {
        let ix = self.index;
        self.stats.expanded_edges += 1;
        match &ix.shortcuts.records {
            Some(arena) if ix.variant.extended_shortcuts() => arena.expand(ix.graph, e, forward, out),
            _ => ix.graph.expand_basic(&ix.shortcuts.triangle, e, forward, out, &mut self.stats.dictionary_lookups),
        }
    }

    /// Shortest path between core vertices written into `out` (cleared
    /// first). Returns the distance; `out` stays empty when unreachable.
    pub fn get_path(&mut self, s: Vertex, t: Vertex, out: &mut Vec<Vertex>) -> Result<Weight, CorruptionError> {
        out.clear();
        let (r, chains) = self.chains(s, t)?;
        let Some((cs, ct)) = chains else {
            return Ok(INFINITY);
        };
        out.push(s);
        for &e in &cs.edges {
            self.expand_edge(e, false, out)?;
        }
        for &e in ct.edges.iter().rev() {
            self.expand_edge(e, true, out)?;
        }
        Ok(r.distance)
    }
}
