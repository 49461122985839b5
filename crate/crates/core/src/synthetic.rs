//! Synthetic road-like networks for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Coordinates, Metric, RoadNetwork, Vertex, Weight};

/// Spacing between neighboring grid points, in coordinate units (meters).
pub const GRID_SPACING: f64 = 100.0;

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

/// Connected planar-like network of `n` vertices with average degree close
/// to three: a jittered grid, a random spanning tree over the grid links,
/// then extra grid links and a few diagonals. Spanning-tree leaves leave a
/// realistic share of degree-one vertices.
pub fn road_like(n: usize, seed: u64) -> (RoadNetwork, Coordinates) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (n as f64).sqrt().ceil().max(1.0) as usize;
    let at = |row: usize, col: usize| row * width + col;
    let mut links = Vec::new();
    let mut diagonals = Vec::new();
    for v in 0..n {
        let (row, col) = (v / width, v % width);
        if col + 1 < width && at(row, col + 1) < n {
            links.push((v as Vertex, at(row, col + 1) as Vertex));
        }
        if at(row + 1, col) < n {
            links.push((v as Vertex, at(row + 1, col) as Vertex));
        }
        if col + 1 < width && at(row + 1, col + 1) < n {
            diagonals.push((v as Vertex, at(row + 1, col + 1) as Vertex));
        }
    }
    links.shuffle(&mut rng);
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut chosen = Vec::with_capacity(n * 3 / 2);
    let mut spare = Vec::new();
    for &(u, v) in &links {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru as usize] = rv;
            chosen.push((u, v));
        } else {
            spare.push((u, v));
        }
    }
    let extra = (n / 2).min(spare.len());
    chosen.extend_from_slice(&spare[..extra]);
    diagonals.shuffle(&mut rng);
    chosen.extend(diagonals.into_iter().take(n / 40));
    let (network, _) = RoadNetwork::from_pairs(n, &chosen).expect("grid links are valid");
    let xy = (0..n)
        .map(|v| {
            let (row, col) = ((v / width) as f64, (v % width) as f64);
            let jx: f64 = rng.random_range(-0.3..0.3);
            let jy: f64 = rng.random_range(-0.3..0.3);
            ((col + jx) * GRID_SPACING, (row + jy) * GRID_SPACING)
        })
        .collect();
    (network, Coordinates { xy })
}

/// Full `width × height` grid with grid-spaced coordinates.
pub fn grid(width: usize, height: usize) -> (RoadNetwork, Coordinates) {
    let mut pairs = Vec::new();
    for row in 0..height {
        for col in 0..width {
            let v = (row * width + col) as Vertex;
            if col + 1 < width {
                pairs.push((v, v + 1));
            }
            if row + 1 < height {
                pairs.push((v, v + width as Vertex));
            }
        }
    }
    let (network, _) = RoadNetwork::from_pairs(width * height, &pairs).expect("grid is valid");
    let xy =
        (0..width * height).map(|v| ((v % width) as f64 * GRID_SPACING, (v / width) as f64 * GRID_SPACING)).collect();
    (network, Coordinates { xy })
}

/// Independent uniform integer costs in `lo..=hi`.
pub fn random_metric(network: &RoadNetwork, lo: Weight, hi: Weight, seed: u64) -> Metric {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost = (0..network.edge_count()).map(|_| rng.random_range(lo..=hi)).collect();
    Metric::new(network, cost).expect("costs are positive")
}

/// Rounded Euclidean edge lengths, at least 1.
pub fn length_metric(network: &RoadNetwork, coords: &Coordinates) -> Metric {
    let cost = network
        .edges()
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (coords.xy[u as usize], coords.xy[v as usize]);
            ((a.0 - b.0).hypot(a.1 - b.1).round() as Weight).max(1)
        })
        .collect();
    Metric::new(network, cost).expect("costs are positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn road_like_is_connected_with_degree_near_three() {
        for &n in &[1, 2, 50, 777, 2000] {
            let (g, co) = road_like(n, n as u64);
            assert_eq!(g.vertex_count(), n);
            assert_eq!(co.xy.len(), n);
            assert!(g.is_connected());
            if n >= 50 {
                let avg = 2.0 * g.edge_count() as f64 / n as f64;
                assert!((2.6..3.4).contains(&avg), "average degree {avg}");
            }
        }
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(road_like(300, 5).0, road_like(300, 5).0);
        assert_ne!(road_like(300, 5).0, road_like(300, 6).0);
    }
}
