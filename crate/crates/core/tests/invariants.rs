//! Property tests over small random graphs, checked against Dijkstra.

use ctl_core::dijkstra::dijkstra;
use ctl_core::format;
use ctl_core::hierarchy::HierarchyConfig;
use ctl_core::index::{CustomizeConfig, PreprocessedIndex, Router};
use ctl_core::path::Variant;
use ctl_core::reduce::Placement;
use ctl_core::{Metric, RoadNetwork, Vertex, Weight, INFINITY};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Case {
    network: RoadNetwork,
    metric: Metric,
    leaf_size: usize,
    seed: u64,
}

fn case() -> impl Strategy<Value = Case> {
    (2usize..40, 1usize..4, prop::sample::select(vec![1usize, 2, 4, 16]), any::<u64>())
        .prop_flat_map(|(n, density, leaf_size, seed)| {
            let pair = (0..n as Vertex, 0..n as Vertex).prop_filter("no loops", |(u, v)| u != v);
            (Just(n), prop::collection::vec(pair, 0..n * density + 1), Just(leaf_size), Just(seed))
        })
        .prop_flat_map(|(n, pairs, leaf_size, seed)| {
            let (network, _) = RoadNetwork::from_pairs(n, &pairs).unwrap();
            let m = network.edge_count();
            (Just(network), prop::collection::vec(1u32..100, m), Just(leaf_size), Just(seed))
        })
        .prop_map(|(network, cost, leaf_size, seed)| {
            let metric = Metric::new(&network, cost).unwrap();
            Case { network, metric, leaf_size, seed }
        })
}

fn build(c: &Case) -> PreprocessedIndex {
    let config = HierarchyConfig { leaf_size: c.leaf_size, seed: c.seed, ..Default::default() };
    PreprocessedIndex::build(c.network.clone(), config).unwrap()
}

/// Dijkstra restricted to the indexed (largest) component: pairs touching
/// any other component are unreachable unless `s == t`.
fn oracle(c: &Case, pre: &PreprocessedIndex, s: Vertex, t: Vertex) -> Weight {
    let indexed = |v| matches!(pre.reduction.placement(v), Placement::Anchored { .. });
    if s == t {
        0
    } else if indexed(s) && indexed(t) {
        dijkstra(&c.network, &c.metric, s, t).distance
    } else {
        INFINITY
    }
}

fn all_pairs(n: usize) -> impl Iterator<Item = (Vertex, Vertex)> {
    (0..n as Vertex).flat_map(move |s| (0..n as Vertex).map(move |t| (s, t)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn paths_are_shortest_for_every_variant(c in case(), theta in 0u32..50, pick in 0usize..5) {
        let pre = build(&c);
        let variant = Variant::ALL[pick];
        let cust = pre.customize(&c.metric, CustomizeConfig { theta, variant, ..Default::default() }).unwrap();
        let mut router = Router::new(&pre, &cust);
        for (s, t) in all_pairs(c.network.vertex_count()) {
            let expected = oracle(&c, &pre, s, t);
            prop_assert_eq!(router.distance(s, t).unwrap(), expected);
            match router.path(s, t).unwrap() {
                None => prop_assert_eq!(expected, INFINITY),
                Some((d, path)) => {
                    prop_assert_eq!(d, expected);
                    prop_assert_eq!(path.first(), Some(&s));
                    prop_assert_eq!(path.last(), Some(&t));
                    prop_assert_eq!(c.metric.path_cost(&c.network, &path), Some(d as u64));
                }
            }
        }
    }

    #[test]
    fn batches_equal_single_queries(c in case(), theta in 0u32..20, pick in 0usize..5) {
        let pre = build(&c);
        let variant = Variant::ALL[pick];
        let cust = pre.customize(&c.metric, CustomizeConfig { theta, variant, ..Default::default() }).unwrap();
        let mut router = Router::new(&pre, &cust);
        let pairs: Vec<_> = all_pairs(c.network.vertex_count()).collect();
        let (batched, _) = router.batch(&pairs);
        for (&(s, t), b) in pairs.iter().zip(batched) {
            prop_assert_eq!(b.unwrap(), router.path(s, t).unwrap());
        }
    }

    #[test]
    fn hierarchy_and_order_are_consistent(c in case()) {
        let pre = build(&c);
        let topo = &pre.topology;
        let order = &topo.order;
        let n = topo.network.vertex_count();
        for &(u, v) in topo.network.edges() {
            prop_assert!(order.is_ancestor(u, v) || order.is_ancestor(v, u));
        }
        for v in 0..n as Vertex {
            let up = topo.graph.up(v);
            prop_assert!(up.windows(2).all(|w| order.rank(w[0]) < order.rank(w[1])));
            prop_assert!(up.iter().all(|&a| a != v && order.is_ancestor(a, v)));
        }
        prop_assert!(order.ranks().iter().all(|&r| r <= order.max_rank()));
        prop_assert_eq!(order.by_rank().len(), n);
    }

    #[test]
    fn labels_exist_exactly_above_threshold(c in case(), theta in 0u32..40) {
        let pre = build(&c);
        let cust = pre.customize(&c.metric, CustomizeConfig { theta, variant: Variant::Bn, ..Default::default() }).unwrap();
        let order = &pre.topology.order;
        for v in 0..pre.topology.network.vertex_count() as Vertex {
            let labeled = cust.core.labels.label(v, order.rank(v)).is_some();
            prop_assert_eq!(labeled, order.descendant_count(v) > theta);
        }
    }

    #[test]
    fn index_files_round_trip(c in case(), theta in 0u32..10, pick in 0usize..5) {
        let pre = build(&c);
        let cust = pre
            .customize(&c.metric, CustomizeConfig { theta, variant: Variant::ALL[pick], ..Default::default() })
            .unwrap();
        let bytes = format::to_bytes(&pre, Some(&cust));
        let (pre2, cust2) = format::from_bytes(&bytes).unwrap();
        prop_assert_eq!(format::to_bytes(&pre2, cust2.as_ref()), bytes);
    }
}
