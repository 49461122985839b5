//! `ctl`: preprocess, customize and query road-network indexes.

mod bench;
mod run;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ctl_core::dimacs::{parse_co, parse_gr};
use ctl_core::format;
use ctl_core::hierarchy::{HierarchyConfig, DEFAULT_BETA, DEFAULT_LEAF_SIZE};
use ctl_core::index::{CustomizeConfig, CustomizedIndex, PreprocessedIndex};
use ctl_core::path::Variant;
use ctl_core::queryset::{self, QuerySetConfig};
use ctl_core::shortcuts::DEFAULT_INLINE;
use ctl_core::Metric;

#[derive(Parser)]
#[command(name = "ctl", version, about = "Customizable tree labeling for road networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the metric-independent index of a DIMACS graph.
    Preprocess(PreprocessArgs),
    /// Apply a metric to a preprocessed index.
    Customize(CustomizeArgs),
    /// Answer queries one at a time.
    Query(QueryArgs),
    /// Answer path queries in batches with shared prefix unpacking.
    Batch(BatchArgs),
    /// Sample distance-stratified query sets.
    GenQueries(GenQueriesArgs),
    /// Print header fields and section sizes of an index.
    Report(ReportArgs),
    /// Measure preprocessing, customization and query times on one graph.
    Bench(bench::BenchArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    /// DIMACS `.gr` file.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Parts of at most this many vertices become leaf nodes.
    #[arg(long, default_value_t = DEFAULT_LEAF_SIZE)]
    leaf_size: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CustomizeArgs {
    #[arg(long)]
    index: PathBuf,
    /// DIMACS `.gr` file over the same edges as the indexed graph.
    #[arg(long)]
    metric: PathBuf,
    #[arg(long, default_value_t = 0)]
    theta: u32,
    #[arg(long, default_value_t = Variant::Ee)]
    variant: Variant,
    /// Inline capacity of path records.
    #[arg(long, default_value_t = DEFAULT_INLINE)]
    k: usize,
    /// Allow `k` above six, widening every record.
    #[arg(long)]
    wide_records: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output file; defaults to overwriting `--index`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    /// File of `s t` lines (0-based).
    #[arg(long)]
    pairs: PathBuf,
    /// Print only distances.
    #[arg(long)]
    distance_only: bool,
    /// Cross-check every result against Dijkstra; exit nonzero on mismatch.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 1000)]
    batch_size: usize,
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct GenQueriesArgs {
    /// Customized index; its metric defines the network distances.
    #[arg(long)]
    index: PathBuf,
    /// DIMACS `.co` coordinates.
    #[arg(long)]
    co: Option<PathBuf>,
    #[arg(long, default_value_t = queryset::DEFAULT_SETS)]
    sets: usize,
    #[arg(long, default_value_t = 1000)]
    per_set: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smallest distance bound.
    #[arg(long, default_value_t = queryset::DEFAULT_MIN_DISTANCE)]
    min_distance: f64,
    /// Write one `q<i>.txt` per set here instead of printing all sets.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    index: PathBuf,
}

fn read_graph(path: &Path) -> Result<(ctl_core::RoadNetwork, Metric)> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_gr(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))
}

pub(crate) fn load_customized(path: &Path) -> Result<(PreprocessedIndex, CustomizedIndex)> {
    let (pre, custom) = format::load(path).with_context(|| format!("cannot load {}", path.display()))?;
    let Some(custom) = custom else {
        bail!("{} has not been customized; run `ctl customize` first", path.display());
    };
    Ok((pre, custom))
}

fn preprocess(args: PreprocessArgs) -> Result<()> {
    let (network, _) = read_graph(&args.graph)?;
    let config = HierarchyConfig { beta: args.beta, leaf_size: args.leaf_size, seed: args.seed };
    let start = Instant::now();
    let pre = PreprocessedIndex::build(network, config)?;
    let elapsed = start.elapsed();
    format::save(&args.out, &pre, None)?;
    let topo = &pre.topology;
    eprintln!(
        "preprocessed {} vertices ({} in core), {} tree nodes, max rank {}, {} shortcuts in {:.3} s",
        pre.network.vertex_count(),
        topo.network.vertex_count(),
        topo.hierarchy.nodes().len(),
        topo.order.max_rank(),
        topo.graph.shortcut_count(),
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn customize(args: CustomizeArgs) -> Result<()> {
    let (mut pre, _) = format::load(&args.index).with_context(|| format!("cannot load {}", args.index.display()))?;
    let (network, metric) = read_graph(&args.metric)?;
    if network != pre.network {
        return Err(ctl_core::Error::MetricMismatch(format!(
            "{} does not have the edges of the indexed graph",
            args.metric.display()
        ))
        .into());
    }
    let config = CustomizeConfig {
        theta: args.theta,
        variant: args.variant,
        inline: args.k,
        wide_records: args.wide_records,
        threads: args.threads,
    };
    let custom = pre.customize(&metric, config)?;
    pre.customizations += 1;
    let out = args.out.as_ref().unwrap_or(&args.index);
    format::save(out, &pre, Some(&custom))?;
    let t = custom.core.timings;
    let report = custom.core.labels.memory_report(&pre.topology.order);
    eprintln!(
        "customized with theta={} variant={} k={}: shortcuts {:.3} s, labels {:.3} s; {} labeled vertices, {} cost entries",
        config.theta,
        config.variant,
        config.inline,
        t.shortcuts.as_secs_f64(),
        t.labels.as_secs_f64(),
        report.labeled_vertices,
        report.cost_entries
    );
    Ok(())
}

fn gen_queries(args: GenQueriesArgs) -> Result<()> {
    let (pre, custom) = load_customized(&args.index)?;
    let coords = match &args.co {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            let coords = parse_co(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))?;
            if coords.xy.len() != pre.network.vertex_count() {
                bail!(
                    "{} has {} coordinates for {} vertices",
                    path.display(),
                    coords.xy.len(),
                    pre.network.vertex_count()
                );
            }
            Some(coords)
        }
        None => None,
    };
    let config = QuerySetConfig {
        min_distance: args.min_distance,
        sets: args.sets,
        ..QuerySetConfig::new(args.per_set, args.seed)
    };
    let sets = queryset::generate(&pre.network, &custom.metric, coords.as_ref(), config);
    match &args.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for set in &sets {
                let path = dir.join(format!("q{}.txt", set.index));
                queryset::write_query_set(set, BufWriter::new(File::create(&path)?))?;
            }
        }
        None => {
            let mut out = BufWriter::new(std::io::stdout().lock());
            for set in &sets {
                queryset::write_query_set(set, &mut out)?;
            }
            out.flush()?;
        }
    }
    for set in &sets {
        eprintln!("Q{}: ({:.0}, {:.0}] {} pairs", set.index, set.lower, set.upper, set.pairs.len());
    }
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let bytes = std::fs::read(&args.index).with_context(|| format!("cannot read {}", args.index.display()))?;
    let header = format::read_header(&bytes)?;
    let (pre, custom) = format::from_bytes(&bytes)?;
    let topo = &pre.topology;
    println!("file            {} bytes, version {}", bytes.len(), header.version);
    println!("beta            {}", header.beta);
    println!("leaf size       {}", header.leaf_size);
    println!("seed            {}", header.seed);
    println!("customizations  {}", header.customizations);
    println!("vertices        {} ({} in core)", pre.network.vertex_count(), topo.network.vertex_count());
    println!("edges           {} ({} in core)", pre.network.edge_count(), topo.network.edge_count());
    println!(
        "tree nodes      {} (height {}, {} unbalanced)",
        topo.hierarchy.nodes().len(),
        topo.hierarchy.height(),
        topo.hierarchy.unbalanced_nodes()
    );
    println!("max rank        {}", topo.order.max_rank());
    println!("shortcuts       {}", topo.graph.shortcut_count());
    if let Some(c) = &custom {
        let config = c.config();
        let labels = c.core.labels.memory_report(&topo.order);
        println!("theta           {}", config.theta);
        println!("variant         {}", config.variant);
        println!("k               {}", config.inline);
        println!("labeled         {} vertices", labels.labeled_vertices);
        println!("label entries   {} costs, {} path", labels.cost_entries, labels.path_entries);
        println!("label bytes     {}", labels.bytes);
    }
    println!("sections:");
    for s in &header.sections {
        println!("  {}  {:>12} bytes  offset {:>12}  crc32 {:08x}", s.tag, s.length, s.offset, s.crc);
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Preprocess(args) => preprocess(args).map(|_| true),
        Command::Customize(args) => customize(args).map(|_| true),
        Command::Query(args) => run::query(&args.index, &args.pairs, args.distance_only, args.verify, args.threads),
        Command::Batch(args) => run::batch(&args.index, &args.pairs, args.batch_size, args.verify),
        Command::GenQueries(args) => gen_queries(args).map(|_| true),
        Command::Report(args) => report(args).map(|_| true),
        Command::Bench(args) => bench::run(args).map(|_| true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
