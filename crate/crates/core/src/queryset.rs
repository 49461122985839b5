//! Distance-stratified benchmark query sets and the plain-text pair format.
//!
//! Set `i` (1-based) of `k` holds pairs whose network distance lies in
//! `(l_min·x^(i-1), l_min·x^i]` with `x = (l_max/l_min)^(1/k)`. `l_max` is
//! estimated by farthest-vertex double sweeps.

use std::io::{self, BufRead, Write};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dijkstra::distances_from;
use crate::graph::{Coordinates, Metric, QueryPair, RoadNetwork, Vertex, Weight, INFINITY};

pub const DEFAULT_MIN_DISTANCE: f64 = 1000.0;
pub const DEFAULT_SETS: usize = 10;
pub const DEFAULT_SWEEPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuerySetConfig {
    pub min_distance: f64,
    pub sets: usize,
    pub per_set: usize,
    pub sweeps: usize,
    pub seed: u64,
    /// Cap on sampled sources (one Dijkstra each); `None` picks
    /// `10 · per_set + 100`.
    pub max_sources: Option<usize>,
}

impl QuerySetConfig {
    pub fn new(per_set: usize, seed: u64) -> Self {
        QuerySetConfig {
            min_distance: DEFAULT_MIN_DISTANCE,
            sets: DEFAULT_SETS,
            per_set,
            sweeps: DEFAULT_SWEEPS,
            seed,
            max_sources: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    /// 1-based set number.
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub pairs: Vec<QueryPair>,
}

impl QuerySet {
    pub fn contains(&self, distance: Weight) -> bool {
        distance != INFINITY && (distance as f64) > self.lower && (distance as f64) <= self.upper
    }
}

/// Growth factor between consecutive ranges.
pub fn growth_factor(min_distance: f64, max_distance: f64, sets: usize) -> f64 {
    (max_distance / min_distance).powf(1.0 / sets as f64)
}

/// Half-open distance ranges `(lower, upper]` of all sets.
pub fn ranges(min_distance: f64, max_distance: f64, sets: usize) -> Vec<(f64, f64)> {
    let x = growth_factor(min_distance, max_distance, sets);
    (1..=sets).map(|i| (min_distance * x.powi(i as i32 - 1), min_distance * x.powi(i as i32))).collect()
}

fn farthest(dist: &[Weight]) -> (Vertex, Weight) {
    dist.iter()
        .enumerate()
        .filter(|(_, &d)| d != INFINITY)
        .map(|(v, &d)| (v as Vertex, d))
        .max_by_key(|&(v, d)| (d, std::cmp::Reverse(v)))
        .unwrap_or((0, 0))
}

/// Lower bound on the largest pairwise distance from `sweeps` double
/// sweeps. Sweeps start at coordinate extremes when coordinates are given,
/// otherwise at random vertices.
pub fn estimate_max_distance(
    network: &RoadNetwork,
    metric: &Metric,
    coords: Option<&Coordinates>,
    sweeps: usize,
    seed: u64,
) -> Weight {
    let n = network.vertex_count();
    if n == 0 {
        return 0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vertex> = Vec::new();
    if let Some(c) = coords.filter(|c| c.xy.len() == n) {
        let extreme = |key: &dyn Fn(&(f64, f64)) -> f64| {
            (0..n).max_by(|&a, &b| key(&c.xy[a]).total_cmp(&key(&c.xy[b]))).unwrap() as Vertex
        };
        starts.extend([
            extreme(&|p| -p.0),
            extreme(&|p| p.0),
            extreme(&|p| -p.1),
            extreme(&|p| p.1),
            extreme(&|p| p.0 + p.1),
        ]);
    }
    starts.truncate(sweeps);
    while starts.len() < sweeps {
        starts.push(rng.random_range(0..n as Vertex));
    }
    let mut best = 0;
    for s in starts {
        let (a, _) = farthest(&distances_from(network, metric, s));
        let (_, d) = farthest(&distances_from(network, metric, a));
        best = best.max(d);
    }
    best
}

/// Samples all sets. Each sampled source contributes at most one pair per
/// set that still needs pairs; the target is drawn uniformly from the
/// vertices in range. Sets left short after the source cap are returned
/// partial and logged.
pub fn generate(
    network: &RoadNetwork,
    metric: &Metric,
    coords: Option<&Coordinates>,
    config: QuerySetConfig,
) -> Vec<QuerySet> {
    let max_distance = estimate_max_distance(network, metric, coords, config.sweeps, config.seed) as f64;
    let mut sets: Vec<QuerySet> = ranges(config.min_distance, max_distance.max(config.min_distance), config.sets)
        .into_iter()
        .enumerate()
        .map(|(i, (lower, upper))| QuerySet { index: i + 1, lower, upper, pairs: Vec::new() })
        .collect();
    let n = network.vertex_count();
    if n == 0 || config.per_set == 0 {
        return sets;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let cap = config.max_sources.unwrap_or(10 * config.per_set + 100);
    let mut candidates: Vec<Vertex> = Vec::new();
    for _ in 0..cap {
        if sets.iter().all(|s| s.pairs.len() >= config.per_set) {
            break;
        }
        let s = rng.random_range(0..n as Vertex);
        let dist = distances_from(network, metric, s);
        for set in sets.iter_mut().filter(|set| set.pairs.len() < config.per_set) {
            candidates.clear();
            candidates.extend((0..n as Vertex).filter(|&t| set.contains(dist[t as usize])));
            if let Some(&t) = candidates.choose(&mut rng) {
                set.pairs.push(QueryPair::new(s, t));
            }
        }
    }
    for set in &sets {
        if set.pairs.len() < config.per_set {
            log::warn!(
                "query set Q{} ({:.0}, {:.0}] has {} of {} pairs after {cap} sources",
                set.index,
                set.lower,
                set.upper,
                set.pairs.len(),
                config.per_set
            );
        }
    }
    sets
}

/// Writes a set as `s t` lines preceded by a comment recording its range.
pub fn write_query_set<W: Write>(set: &QuerySet, mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "# Q{}: network distance in ({:.3}, {:.3}], {} pairs",
        set.index,
        set.lower,
        set.upper,
        set.pairs.len()
    )?;
    for p in &set.pairs {
        writeln!(out, "{} {}", p.source, p.target)?;
    }
    Ok(())
}

/// A line of a pair file that could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadLine {
    /// 1-based line number.
    pub line: usize,
    pub text: String,
}

/// Reads `s t` pairs, skipping blank lines and `#` comments. Malformed lines
/// are returned separately so callers can report and skip them.
pub fn parse_pairs<R: BufRead>(reader: R) -> io::Result<(Vec<QueryPair>, Vec<BadLine>)> {
    let mut pairs = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        match (fields.next().map(str::parse), fields.next().map(str::parse), fields.next()) {
            (Some(Ok(s)), Some(Ok(t)), None) => pairs.push(QueryPair::new(s, t)),
            _ => bad.push(BadLine { line: i + 1, text: line.clone() }),
        }
    }
    Ok((pairs, bad))
}
