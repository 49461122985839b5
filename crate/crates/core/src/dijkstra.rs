//! Plain Dijkstra search. This is the correctness oracle for every index
//! structure in the crate, so it deliberately shares no code with them.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::graph::{add_cost, Metric, RoadNetwork, Vertex, Weight, INFINITY, NAN};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestPath {
    pub distance: Weight,
    /// `None` when the target is unreachable.
    pub path: Option<Vec<Vertex>>,
}

/// One-to-one query with early termination at the target.
pub fn dijkstra(network: &RoadNetwork, metric: &Metric, source: Vertex, target: Vertex) -> ShortestPath {
    let n = network.vertex_count();
    let mut dist = vec![INFINITY; n];
    let mut pred = vec![NAN; n];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = 0;
    heap.push(Reverse((0, source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        if v == target {
            break;
        }
        for (w, e) in network.arcs(v) {
            let nd = add_cost(d, metric.cost(e));
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                pred[w as usize] = v;
                heap.push(Reverse((nd, w)));
            }
        }
    }
    if dist[target as usize] == INFINITY {
        return ShortestPath { distance: INFINITY, path: None };
    }
    let mut path = vec![target];
    let mut v = target;
    while v != source {
        v = pred[v as usize];
        path.push(v);
    }
    path.reverse();
    ShortestPath { distance: dist[target as usize], path: Some(path) }
}

/// One-to-all distances from `source`.
pub fn distances_from(network: &RoadNetwork, metric: &Metric, source: Vertex) -> Vec<Weight> {
    let mut dist = vec![INFINITY; network.vertex_count()];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = 0;
    heap.push(Reverse((0, source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        for (w, e) in network.arcs(v) {
            let nd = add_cost(d, metric.cost(e));
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                heap.push(Reverse((nd, w)));
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_cases() {
        let (g, _) = RoadNetwork::from_pairs(3, &[(0, 1)]).unwrap();
        let m = Metric::new(&g, vec![5]).unwrap();
        assert_eq!(dijkstra(&g, &m, 2, 2), ShortestPath { distance: 0, path: Some(vec![2]) });
        assert_eq!(dijkstra(&g, &m, 0, 1), ShortestPath { distance: 5, path: Some(vec![0, 1]) });
        assert_eq!(dijkstra(&g, &m, 0, 2), ShortestPath { distance: INFINITY, path: None });
    }

    #[test]
    fn distances_are_symmetric_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for seed in 0..4 {
            let n = rng.random_range(50..500);
            let (g, _) = synthetic::road_like(n, seed);
            let m = synthetic::random_metric(&g, 1, 1000, seed);
            for _ in 0..30 {
                let s = rng.random_range(0..n as u32);
                let t = rng.random_range(0..n as u32);
                let st = dijkstra(&g, &m, s, t);
                assert_eq!(st.distance, dijkstra(&g, &m, t, s).distance);
                assert_eq!(st.distance, distances_from(&g, &m, s)[t as usize]);
                let path = st.path.unwrap();
                assert_eq!(m.path_cost(&g, &path), Some(st.distance as u64));
            }
        }
    }
}
