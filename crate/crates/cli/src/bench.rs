//! The `bench` subcommand: one preprocessing run, then a customization and a
//! query sweep for every requested threshold and variant.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::Args;
use ctl_core::dimacs::{parse_co, parse_gr};
use ctl_core::graph::Coordinates;
use ctl_core::hierarchy::{HierarchyConfig, DEFAULT_BETA, DEFAULT_LEAF_SIZE};
use ctl_core::index::{CustomizeConfig, CustomizedIndex, PreprocessedIndex, Router};
use ctl_core::path::Variant;
use ctl_core::query::QueryAgent;
use ctl_core::queryset::{self, QuerySetConfig};
use ctl_core::shortcuts::DEFAULT_INLINE;
use ctl_core::{synthetic, Metric, RoadNetwork, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Args)]
pub struct BenchArgs {
    /// DIMACS `.gr` file; a synthetic road-like graph is used when absent.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// DIMACS `.co` coordinates for `--graph`.
    #[arg(long)]
    co: Option<PathBuf>,
    /// Vertex count of the synthetic graph.
    #[arg(long, default_value_t = 20_000)]
    synthetic: usize,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = DEFAULT_LEAF_SIZE)]
    leaf_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "0,10,100")]
    thetas: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "bn,bb,en,eb,ee")]
    variants: Vec<Variant>,
    #[arg(long, default_value_t = DEFAULT_INLINE)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Uniformly random pairs timed per configuration.
    #[arg(long, default_value_t = 10_000)]
    queries: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,100,1000")]
    batch_sizes: Vec<usize>,
    /// Pairs per distance-stratified set; zero skips the per-set table.
    #[arg(long, default_value_t = 0)]
    per_set: usize,
}

fn load_input(args: &BenchArgs) -> Result<(RoadNetwork, Metric, Option<Coordinates>)> {
    let Some(path) = &args.graph else {
        let (g, c) = synthetic::road_like(args.synthetic, args.seed);
        let m = synthetic::random_metric(&g, 1, 1000, args.seed);
        return Ok((g, m, Some(c)));
    };
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let (g, m) = parse_gr(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))?;
    let coords = match &args.co {
        Some(co) => {
            let file = File::open(co).with_context(|| format!("cannot open {}", co.display()))?;
            Some(parse_co(BufReader::new(file)).with_context(|| format!("cannot parse {}", co.display()))?)
        }
        None => None,
    };
    Ok((g, m, coords))
}

fn per_query(total: Duration, count: usize) -> f64 {
    total.as_secs_f64() * 1e6 / count.max(1) as f64
}

/// Mean microseconds per pair of `f` over all pairs.
fn time_each(pairs: &[(Vertex, Vertex)], mut f: impl FnMut(Vertex, Vertex)) -> f64 {
    let start = Instant::now();
    for &(s, t) in pairs {
        f(s, t);
    }
    per_query(start.elapsed(), pairs.len())
}

/// Splits core path queries into hub identification, chain construction and
/// expansion by timing the three prefixes of the pipeline separately.
fn phase_breakdown(pre: &PreprocessedIndex, cust: &CustomizedIndex, pairs: &[(Vertex, Vertex)]) -> [f64; 3] {
    let mut agent = QueryAgent::new(cust.core.view(&pre.topology));
    let hubs = time_each(pairs, |s, t| {
        std::hint::black_box(agent.find_distance(s, t));
    });
    let chains = time_each(pairs, |s, t| {
        std::hint::black_box(agent.chains(s, t).ok());
    });
    let mut buf = Vec::new();
    let full = time_each(pairs, |s, t| {
        std::hint::black_box(agent.get_path(s, t, &mut buf).ok());
    });
    [hubs, (chains - hubs).max(0.0), (full - chains).max(0.0)]
}

pub fn run(args: BenchArgs) -> Result<()> {
    let (network, metric, coords) = load_input(&args)?;
    let n = network.vertex_count();
    println!("graph: {n} vertices, {} edges", network.edge_count());

    let config = HierarchyConfig { beta: args.beta, leaf_size: args.leaf_size, seed: args.seed };
    let start = Instant::now();
    let pre = PreprocessedIndex::build(network, config)?;
    let topo = &pre.topology;
    println!(
        "preprocess: {:.3} s, core {} vertices, max rank {}, {} unbalanced nodes, {} shortcuts",
        start.elapsed().as_secs_f64(),
        topo.network.vertex_count(),
        topo.order.max_rank(),
        topo.hierarchy.unbalanced_nodes(),
        topo.graph.shortcut_count()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed ^ 0x5eed);
    let pairs: Vec<(Vertex, Vertex)> =
        (0..args.queries).map(|_| (rng.random_range(0..n as Vertex), rng.random_range(0..n as Vertex))).collect();
    let core_n = topo.network.vertex_count().max(1) as Vertex;
    let core_pairs: Vec<(Vertex, Vertex)> =
        (0..args.queries).map(|_| (rng.random_range(0..core_n), rng.random_range(0..core_n))).collect();

    println!();
    println!(
        "{:>6} {:>4} {:>10} {:>10} {:>12} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "theta", "var", "short ms", "label ms", "label MB", "dist us", "path us", "hub us", "chain us", "expand us"
    );
    let mut batch_rows = Vec::new();
    let mut customized = Vec::new();
    for &theta in &args.thetas {
        for &variant in &args.variants {
            let cc = CustomizeConfig {
                theta,
                variant,
                inline: args.k,
                wide_records: args.k > DEFAULT_INLINE,
                threads: args.threads,
            };
            let cust = pre.customize(&metric, cc)?;
            let t = cust.core.timings;
            let labels = cust.core.labels.memory_report(&topo.order);
            let mut router = Router::new(&pre, &cust);
            let dist = time_each(&pairs, |s, t| {
                std::hint::black_box(router.distance(s, t).ok());
            });
            let path = time_each(&pairs, |s, t| {
                std::hint::black_box(router.path(s, t).ok());
            });
            let [hub, chain, expand] = phase_breakdown(&pre, &cust, &core_pairs);
            println!(
                "{theta:>6} {variant:>4} {:>10.1} {:>10.1} {:>12.2} {dist:>9.2} {path:>9.2} {hub:>9.2} {chain:>9.2} {expand:>9.2}",
                t.shortcuts.as_secs_f64() * 1e3,
                t.labels.as_secs_f64() * 1e3,
                labels.bytes as f64 / 1e6,
            );
            for &size in &args.batch_sizes {
                let start = Instant::now();
                let mut report = ctl_core::batch::OverlapReport::default();
                for part in pairs.chunks(size.max(1)) {
                    let (results, r) = router.batch(part);
                    std::hint::black_box(results);
                    report.merge(&r);
                }
                batch_rows.push((
                    theta,
                    variant,
                    size,
                    per_query(start.elapsed(), pairs.len()),
                    report.percent_avoided(),
                ));
            }
            customized.push((theta, variant, cust));
        }
    }

    if !args.batch_sizes.is_empty() {
        println!();
        println!("{:>6} {:>4} {:>8} {:>12} {:>10}", "theta", "var", "batch", "us/query", "avoided %");
        for (theta, variant, size, us, avoided) in batch_rows {
            println!("{theta:>6} {variant:>4} {size:>8} {us:>12.2} {avoided:>10.1}");
        }
    }

    if args.per_set > 0 {
        let sets =
            queryset::generate(&pre.network, &metric, coords.as_ref(), QuerySetConfig::new(args.per_set, args.seed));
        println!();
        println!("path query latency (us) per distance-stratified set");
        print!("{:>6} {:>4}", "theta", "var");
        for set in &sets {
            print!(" {:>8}", format!("Q{}", set.index));
        }
        println!();
        for (theta, variant, cust) in &customized {
            let mut router = Router::new(&pre, cust);
            print!("{theta:>6} {variant:>4}");
            for set in &sets {
                let pairs: Vec<_> = set.pairs.iter().map(|p| (p.source, p.target)).collect();
                if pairs.is_empty() {
                    print!(" {:>8}", "-");
                    continue;
                }
                let us = time_each(&pairs, |s, t| {
                    std::hint::black_box(router.path(s, t).ok());
                });
                print!(" {us:>8.2}");
            }
            println!();
        }
    }
    Ok(())
}
