//! Readers and writers for the DIMACS shortest-path challenge formats:
//! `.gr` graphs (`p sp <n> <m>`, `a <u> <v> <w>`) and `.co` coordinates
//! (`p aux sp co <n>`, `v <id> <x> <y>`). Ids are 1-based on disk and
//! 0-based in memory.

use std::io::{BufRead, Write};

use crate::error::{ParseError, ParseErrorKind};
use crate::graph::{Coordinates, Metric, RoadNetwork, Vertex, Weight, INFINITY};

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn parse_id(tok: Option<&str>, n: usize, line: usize) -> Result<Vertex, ParseError> {
    let raw: u64 = tok.and_then(|t| t.parse().ok()).ok_or_else(|| err(line, ParseErrorKind::Malformed))?;
    if raw == 0 || raw > n as u64 {
        return Err(err(line, ParseErrorKind::IdOutOfRange(raw)));
    }
    Ok((raw - 1) as Vertex)
}

fn parse_weight(tok: Option<&str>, line: usize) -> Result<Weight, ParseError> {
    let tok = tok.ok_or_else(|| err(line, ParseErrorKind::Malformed))?;
    if let Some(rest) = tok.strip_prefix('-') {
        return if rest.parse::<u64>().is_ok() {
            Err(err(line, ParseErrorKind::NonpositiveWeight))
        } else {
            Err(err(line, ParseErrorKind::Malformed))
        };
    }
    let raw: u64 = tok.parse().map_err(|_| err(line, ParseErrorKind::Malformed))?;
    if raw == 0 {
        return Err(err(line, ParseErrorKind::NonpositiveWeight));
    }
    if raw >= INFINITY as u64 {
        return Err(err(line, ParseErrorKind::WeightOverflow(raw)));
    }
    Ok(raw as Weight)
}

/// Parses a `.gr` stream into an undirected network. Arcs `(u, v)` and
/// `(v, u)` merge into one edge keeping the minimum weight; self-loop arcs
/// are dropped since they never lie on a shortest path.
pub fn parse_gr<R: BufRead>(reader: R) -> Result<(RoadNetwork, Metric), ParseError> {
    let mut n: Option<usize> = None;
    let mut arcs: Vec<(Vertex, Vertex)> = Vec::new();
    let mut weights: Vec<Weight> = Vec::new();
    let mut last_line = 0;
    for (i, line) in reader.lines().enumerate() {
        let no = i + 1;
        last_line = no;
        let line = line.map_err(|e| err(no, ParseErrorKind::Io(e.to_string())))?;
        let mut toks = line.split_whitespace();
        match toks.next() {
            None | Some("c") => continue,
            Some("p") => {
                if n.is_some() {
                    return Err(err(no, ParseErrorKind::DuplicateProblemLine));
                }
                if toks.next() != Some("sp") {
                    return Err(err(no, ParseErrorKind::Malformed));
                }
                let count: usize =
                    toks.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(no, ParseErrorKind::Malformed))?;
                let m: usize =
                    toks.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(no, ParseErrorKind::Malformed))?;
                if count >= Vertex::MAX as usize || toks.next().is_some() {
                    return Err(err(no, ParseErrorKind::Malformed));
                }
                n = Some(count);
                arcs.reserve(m);
                weights.reserve(m);
            }
            Some("a") => {
                let count = n.ok_or_else(|| err(no, ParseErrorKind::MissingProblemLine))?;
                let u = parse_id(toks.next(), count, no)?;
                let v = parse_id(toks.next(), count, no)?;
                let w = parse_weight(toks.next(), no)?;
                if toks.next().is_some() {
                    return Err(err(no, ParseErrorKind::Malformed));
                }
                if u != v {
                    arcs.push((u, v));
                    weights.push(w);
                }
            }
            Some(_) => return Err(err(no, ParseErrorKind::Malformed)),
        }
    }
    let n = n.ok_or_else(|| err(last_line.max(1), ParseErrorKind::MissingProblemLine))?;
    let (network, arc_edge) = RoadNetwork::from_pairs(n, &arcs).expect("ids validated and self-loops removed");
    let mut cost = vec![INFINITY; network.edge_count()];
    for (&e, &w) in arc_edge.iter().zip(&weights) {
        let slot = &mut cost[e as usize];
        *slot = (*slot).min(w);
    }
    let metric = Metric::new(&network, cost).expect("weights validated");
    Ok((network, metric))
}

/// Parses a `.co` stream. Vertices without a `v` line keep `(0, 0)`.
pub fn parse_co<R: BufRead>(reader: R) -> Result<Coordinates, ParseError> {
    let mut xy: Option<Vec<(f64, f64)>> = None;
    let mut last_line = 0;
    for (i, line) in reader.lines().enumerate() {
        let no = i + 1;
        last_line = no;
        let line = line.map_err(|e| err(no, ParseErrorKind::Io(e.to_string())))?;
        let mut toks = line.split_whitespace();
        match toks.next() {
            None | Some("c") => continue,
            Some("p") => {
                if xy.is_some() {
                    return Err(err(no, ParseErrorKind::DuplicateProblemLine));
                }
                let rest: Vec<&str> = toks.collect();
                let count = match rest.as_slice() {
                    ["aux", "sp", "co", n] => n.parse::<usize>().ok(),
                    _ => None,
                }
                .ok_or_else(|| err(no, ParseErrorKind::Malformed))?;
                xy = Some(vec![(0.0, 0.0); count]);
            }
            Some("v") => {
                let table = xy.as_mut().ok_or_else(|| err(no, ParseErrorKind::MissingProblemLine))?;
                let id = parse_id(toks.next(), table.len(), no)?;
                let mut coord = || -> Result<f64, ParseError> {
                    toks.next().and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| err(no, ParseErrorKind::Malformed))
                };
                let x = coord()?;
                let y = coord()?;
                table[id as usize] = (x, y);
            }
            Some(_) => return Err(err(no, ParseErrorKind::Malformed)),
        }
    }
    xy.map(|xy| Coordinates { xy }).ok_or_else(|| err(last_line.max(1), ParseErrorKind::MissingProblemLine))
}

/// Writes a network as a `.gr` stream, one arc per direction.
pub fn write_gr<W: Write>(network: &RoadNetwork, metric: &Metric, mut out: W) -> std::io::Result<()> {
    writeln!(out, "p sp {} {}", network.vertex_count(), 2 * network.edge_count())?;
    for (e, &(u, v)) in network.edges().iter().enumerate() {
        let w = metric.cost(e as u32);
        writeln!(out, "a {} {} {}", u + 1, v + 1, w)?;
        writeln!(out, "a {} {} {}", v + 1, u + 1, w)?;
    }
    Ok(())
}

/// Writes coordinates as a `.co` stream (values rounded to integers).
pub fn write_co<W: Write>(coords: &Coordinates, mut out: W) -> std::io::Result<()> {
    writeln!(out, "p aux sp co {}", coords.xy.len())?;
    for (i, &(x, y)) in coords.xy.iter().enumerate() {
        writeln!(out, "v {} {} {}", i + 1, x.round() as i64, y.round() as i64)?;
    }
    Ok(())
}
