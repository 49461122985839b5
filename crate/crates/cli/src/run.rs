//! The `query` and `batch` subcommands.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use ctl_core::batch::OverlapReport;
use ctl_core::dijkstra::dijkstra;
use ctl_core::index::{CustomizedIndex, PreprocessedIndex, Router};
use ctl_core::query::QueryStats;
use ctl_core::queryset::parse_pairs;
use ctl_core::{Vertex, Weight, INFINITY};
use rayon::prelude::*;

use crate::load_customized;

/// One answered query, ready to print.
struct Answer {
    line: String,
    elapsed: Duration,
    mismatch: bool,
}

fn read_pairs(path: &Path) -> Result<Vec<(Vertex, Vertex)>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let (pairs, bad) = parse_pairs(BufReader::new(file))?;
    for b in &bad {
        eprintln!("{}:{}: malformed pair {:?}, skipped", path.display(), b.line, b.text);
    }
    Ok(pairs.into_iter().map(|p| (p.source, p.target)).collect())
}

fn format_answer(result: Option<(Weight, &[Vertex])>, distance_only: bool) -> String {
    let mut line = String::new();
    match result {
        None => line.push_str(if distance_only { "inf" } else { "inf 0" }),
        Some((d, _)) if distance_only => write!(line, "{d}").unwrap(),
        Some((d, path)) => {
            write!(line, "{d} {}", path.len()).unwrap();
            for v in path {
                write!(line, " {v}").unwrap();
            }
        }
    }
    line
}

/// Compares an answer with Dijkstra. Paths must also start and end at the
/// right vertices and cost what they claim.
fn verify(
    pre: &PreprocessedIndex,
    cust: &CustomizedIndex,
    s: Vertex,
    t: Vertex,
    d: Weight,
    path: Option<&[Vertex]>,
) -> bool {
    let expected = dijkstra(&pre.network, &cust.metric, s, t).distance;
    if d != expected {
        eprintln!("mismatch for {s} {t}: got {}, Dijkstra {}", show(d), show(expected));
        return false;
    }
    if let Some(p) = path {
        let ok =
            p.first() == Some(&s) && p.last() == Some(&t) && cust.metric.path_cost(&pre.network, p) == Some(d as u64);
        if !ok {
            eprintln!("invalid path for {s} {t}");
            return false;
        }
    }
    true
}

fn show(d: Weight) -> String {
    if d == INFINITY {
        "inf".into()
    } else {
        d.to_string()
    }
}

fn answer_one(
    router: &mut Router<'_>,
    pre: &PreprocessedIndex,
    cust: &CustomizedIndex,
    (s, t): (Vertex, Vertex),
    distance_only: bool,
    check: bool,
) -> Option<Answer> {
    let start = Instant::now();
    let result = if distance_only {
        router.distance(s, t).map(|d| (d != INFINITY).then_some((d, Vec::new())))
    } else {
        router.path(s, t)
    };
    let elapsed = start.elapsed();
    let result = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("query {s} {t} skipped: {e}");
            return None;
        }
    };
    let borrowed = result.as_ref().map(|(d, p)| (*d, p.as_slice()));
    let mismatch = check && {
        let d = borrowed.map_or(INFINITY, |x| x.0);
        !verify(pre, cust, s, t, d, borrowed.filter(|_| !distance_only).map(|x| x.1))
    };
    Some(Answer { line: format_answer(borrowed, distance_only), elapsed, mismatch })
}

fn percentile(sorted: &[Duration], p: f64) -> Duration {
    if sorted.is_empty() {
        return Duration::ZERO;
    }
    let i = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[i]
}

fn micros(d: Duration) -> f64 {
    d.as_secs_f64() * 1e6
}

fn print_latency(mut times: Vec<Duration>) {
    times.sort_unstable();
    let n = times.len().max(1) as u32;
    let mean = times.iter().sum::<Duration>() / n;
    eprintln!(
        "latency (us): mean {:.2}  p50 {:.2}  p90 {:.2}  p99 {:.2}  max {:.2}",
        micros(mean),
        micros(percentile(&times, 0.5)),
        micros(percentile(&times, 0.9)),
        micros(percentile(&times, 0.99)),
        micros(times.last().copied().unwrap_or_default())
    );
}

fn print_stats(stats: &QueryStats) {
    let q = stats.queries.max(1) as f64;
    eprintln!(
        "per core query: {:.1} label merges, {:.1} shortcut relaxations, {:.1} join entries, {:.1} chain steps, {:.1} expanded edges, {:.1} dictionary lookups ({} core queries)",
        stats.label_merges as f64 / q,
        stats.shortcut_relaxations as f64 / q,
        stats.join_entries as f64 / q,
        stats.chain_steps as f64 / q,
        stats.expanded_edges as f64 / q,
        stats.dictionary_lookups as f64 / q,
        stats.queries
    );
}

fn finish(answers: &[Answer], check: bool) -> Result<bool> {
    let mut out = BufWriter::new(std::io::stdout().lock());
    for a in answers {
        writeln!(out, "{}", a.line)?;
    }
    out.flush()?;
    let mismatches = answers.iter().filter(|a| a.mismatch).count();
    if check {
        eprintln!("verified {} answers against Dijkstra: {mismatches} mismatches", answers.len());
    }
    Ok(mismatches == 0)
}

/// Answers pairs one by one, split evenly over `threads` workers. Returns
/// `false` when verification found a mismatch.
pub fn query(index: &Path, pairs: &Path, distance_only: bool, check: bool, threads: usize) -> Result<bool> {
    let (pre, cust) = load_customized(index)?;
    let pairs = read_pairs(pairs)?;
    let threads = threads.max(1);
    let chunk = pairs.len().div_ceil(threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let parts: Vec<(Vec<Answer>, QueryStats)> = pool.install(|| {
        pairs
            .par_chunks(chunk)
            .map(|part| {
                let mut router = Router::new(&pre, &cust);
                let answers = part
                    .iter()
                    .filter_map(|&p| answer_one(&mut router, &pre, &cust, p, distance_only, check))
                    .collect();
                (answers, router.stats())
            })
            .collect()
    });
    let mut stats = QueryStats::default();
    let mut answers = Vec::with_capacity(pairs.len());
    for (part, s) in parts {
        stats.merge(&s);
        answers.extend(part);
    }
    eprintln!("{} queries on {threads} thread(s)", answers.len());
    print_latency(answers.iter().map(|a| a.elapsed).collect());
    print_stats(&stats);
    finish(&answers, check)
}

/// Answers path queries in batches of `batch_size` and reports how much
/// unpacking the shared prefixes saved.
pub fn batch(index: &Path, pairs: &Path, batch_size: usize, check: bool) -> Result<bool> {
    let (pre, cust) = load_customized(index)?;
    let pairs = read_pairs(pairs)?;
    let mut router = Router::new(&pre, &cust);
    let mut report = OverlapReport::default();
    let mut answers = Vec::with_capacity(pairs.len());
    let mut total = Duration::ZERO;
    for part in pairs.chunks(batch_size.max(1)) {
        let start = Instant::now();
        let (results, r) = router.batch(part);
        let elapsed = start.elapsed();
        total += elapsed;
        report.merge(&r);
        let per_query = elapsed / part.len() as u32;
        for (&(s, t), result) in part.iter().zip(results) {
            let result = match result {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("query {s} {t} skipped: {e}");
                    continue;
                }
            };
            let borrowed = result.as_ref().map(|(d, p)| (*d, p.as_slice()));
            let mismatch =
                check && !verify(&pre, &cust, s, t, borrowed.map_or(INFINITY, |x| x.0), borrowed.map(|x| x.1));
            answers.push(Answer { line: format_answer(borrowed, false), elapsed: per_query, mismatch });
        }
    }
    let batches = pairs.len().div_ceil(batch_size.max(1));
    eprintln!(
        "{} queries in {batches} batch(es) of up to {batch_size}: {:.2} us per query",
        answers.len(),
        micros(total) / pairs.len().max(1) as f64
    );
    eprintln!(
        "overlap: {} of {} chain edges reused ({:.1}% of unpacking avoided)",
        report.reused_edges,
        report.chain_edges,
        report.percent_avoided()
    );
    print_stats(&router.stats());
    finish(&answers, check)
}
