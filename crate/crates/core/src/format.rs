//! On-disk index container.
//!
//! All integers are little-endian. The file starts with a fixed header:
//!
//! | field            | type      |
//! |------------------|-----------|
//! | magic            | `CTLIDX\0\0` |
//! | version          | u32       |
//! | flags            | u32 (bit 0: customized, bit 1: wide records) |
//! | null sentinel    | u32 (`0xFFFFFFFF`, marks absent vertices and records) |
//! | β                | f64       |
//! | leaf size        | u32       |
//! | seed             | u64       |
//! | customizations   | u32       |
//! | θ, variant, k    | u32 each (zero when not customized) |
//! | section count    | u32       |
//!
//! followed by one table entry per section (tag, offset, length, CRC-32)
//! and a CRC-32 of everything before it. Sections follow in table order.
//! `GRPH`, `RDCT`, `HIER`, `ORDR` and `TOPO` depend only on the graph and are
//! byte-identical across customizations; `METR`, `COST`, `RECS` and `LABL`
//! hold the customized state.

use std::fs;
use std::path::Path;

use crate::error::{FormatError, Result};
use crate::graph::{EdgeId, Metric, RoadNetwork, Vertex, NAN};
use crate::hierarchy::{HierarchyConfig, TreeHierarchy};
use crate::index::{Customization, CustomizeConfig, CustomizeTimings, CustomizedIndex, PreprocessedIndex, Topology};
use crate::labeling::{Labeling, TruncationPolicy};
use crate::order::VertexOrder;
use crate::path::Variant;
use crate::reduce::Reduction;
use crate::shortcuts::{CustomizedShortcuts, RecordArena, RecordLayout, ShortcutGraph};

pub const MAGIC: [u8; 8] = *b"CTLIDX\0\0";
pub const VERSION: u32 = 1;

const FLAG_CUSTOMIZED: u32 = 1;
const FLAG_WIDE: u32 = 2;

const TOPOLOGY_TAGS: [&str; 5] = ["GRPH", "RDCT", "HIER", "ORDR", "TOPO"];
const CUSTOM_TAGS: [&str; 4] = ["METR", "COST", "RECS", "LABL"];

/// Parsed header of an index file.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub version: u32,
    pub customized: bool,
    pub wide_records: bool,
    pub beta: f64,
    pub leaf_size: u32,
    pub seed: u64,
    pub customizations: u32,
    pub theta: u32,
    pub variant: Option<Variant>,
    pub inline: u32,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub tag: String,
    pub offset: u64,
    pub length: u64,
    pub crc: u32,
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn words(&mut self, xs: &[u32]) {
        self.u64(xs.len() as u64);
        for &x in xs {
            self.u32(x);
        }
    }

    fn longs(&mut self, xs: &[u64]) {
        self.u64(xs.len() as u64);
        for &x in xs {
            self.u64(x);
        }
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    section: &'static str,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8], section: &'static str) -> Self {
        Reader { data, pos: 0, section }
    }

    fn malformed(&self) -> FormatError {
        FormatError::Malformed(self.section)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len()).ok_or_else(|| self.malformed())?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len(&mut self, width: usize) -> Result<usize, FormatError> {
        let n = self.u64()?;
        if n > ((self.data.len() - self.pos) / width) as u64 {
            return Err(self.malformed());
        }
        Ok(n as usize)
    }

    fn words(&mut self) -> Result<Vec<u32>, FormatError> {
        let n = self.len(4)?;
        self.take(4 * n).map(|b| b.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn longs(&mut self) -> Result<Vec<u64>, FormatError> {
        let n = self.len(8)?;
        self.take(8 * n).map(|b| b.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn finish(&self) -> Result<(), FormatError> {
        if self.pos == self.data.len() {
            Ok(())
        } else {
            Err(self.malformed())
        }
    }
}

fn network_section(network: &RoadNetwork) -> Vec<u8> {
    let mut w = Writer::default();
    w.u32(network.vertex_count() as u32);
    let flat: Vec<u32> = network.edges().iter().flat_map(|&(u, v)| [u, v]).collect();
    w.words(&flat);
    w.0
}

fn reduction_section(reduction: &Reduction) -> Vec<u8> {
    let parts = reduction.parts();
    let mut w = Writer::default();
    w.words(parts.core_of);
    w.words(parts.parent);
    w.words(parts.parent_edge);
    w.words(parts.removed);
    w.0
}

fn hierarchy_section(hierarchy: &TreeHierarchy) -> Vec<u8> {
    let mut w = Writer::default();
    w.u32(hierarchy.unbalanced_nodes() as u32);
    w.u32(hierarchy.nodes().len() as u32);
    for node in hierarchy.nodes() {
        let flags = (node.children[0] != NAN) as u32 | ((node.children[1] != NAN) as u32) << 1;
        w.u32(flags);
        w.words(&node.vertices);
    }
    w.0
}

fn topology_section(graph: &ShortcutGraph, order: &VertexOrder) -> Vec<u8> {
    let mut w = Writer::default();
    for &v in order.by_rank() {
        w.words(graph.up(v));
    }
    w.0
}

fn cost_section(shortcuts: &CustomizedShortcuts) -> Vec<u8> {
    let mut w = Writer::default();
    w.words(&shortcuts.cost);
    w.words(&shortcuts.triangle);
    w.0
}

fn record_section(shortcuts: &CustomizedShortcuts) -> Vec<u8> {
    let mut w = Writer::default();
    if let Some(arena) = &shortcuts.records {
        w.u32(arena.layout().inline as u32);
        w.words(arena.words());
    }
    w.0
}

fn label_section(labels: &Labeling) -> Vec<u8> {
    let (offset, cost, path_vertex, path_edge) = labels.raw();
    let mut w = Writer::default();
    w.longs(offset);
    w.words(cost);
    w.words(path_vertex);
    w.words(path_edge);
    w.0
}

/// Serializes a preprocessed index and, optionally, one customization.
/// Equal inputs produce identical bytes.
pub fn to_bytes(pre: &PreprocessedIndex, custom: Option<&CustomizedIndex>) -> Vec<u8> {
    let topo = &pre.topology;
    let mut sections: Vec<(&str, Vec<u8>)> = vec![
        ("GRPH", network_section(&pre.network)),
        ("RDCT", reduction_section(&pre.reduction)),
        ("HIER", hierarchy_section(&topo.hierarchy)),
        ("ORDR", {
            let mut w = Writer::default();
            w.words(topo.order.ranks());
            w.0
        }),
        ("TOPO", topology_section(&topo.graph, &topo.order)),
    ];
    let mut flags = 0;
    let (mut theta, mut variant, mut inline) = (0, 0, 0);
    if let Some(c) = custom {
        let config = c.core.config;
        flags |= FLAG_CUSTOMIZED;
        if config.wide_records {
            flags |= FLAG_WIDE;
        }
        theta = config.theta;
        variant = config.variant.code();
        inline = config.inline as u32;
        let mut metric = Writer::default();
        metric.words(c.metric.costs());
        sections.push(("METR", metric.0));
        sections.push(("COST", cost_section(&c.core.shortcuts)));
        sections.push(("RECS", record_section(&c.core.shortcuts)));
        sections.push(("LABL", label_section(&c.core.labels)));
    }

    let mut head = Writer::default();
    head.0.extend_from_slice(&MAGIC);
    head.u32(VERSION);
    head.u32(flags);
    head.u32(NAN);
    head.u64(pre.config.beta.to_bits());
    head.u32(pre.config.leaf_size as u32);
    head.u64(pre.config.seed);
    head.u32(pre.customizations);
    head.u32(theta);
    head.u32(variant);
    head.u32(inline);
    head.u32(sections.len() as u32);
    let table_start = head.0.len();
    let header_len = table_start + sections.len() * 24 + 4;
    let mut offset = header_len as u64;
    for (tag, body) in &sections {
        head.0.extend_from_slice(tag.as_bytes());
        head.u64(offset);
        head.u64(body.len() as u64);
        head.u32(crc32fast::hash(body));
        offset += body.len() as u64;
    }
    let crc = crc32fast::hash(&head.0);
    head.u32(crc);
    for (_, body) in sections {
        head.0.extend_from_slice(&body);
    }
    head.0
}

/// Parses and validates the header and section table, including all
/// checksums.
pub fn read_header(bytes: &[u8]) -> Result<Header, FormatError> {
    if bytes.len() < MAGIC.len() || bytes[..MAGIC.len()] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let mut r = Reader::new(bytes, "header");
    r.take(MAGIC.len())?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(FormatError::Version(version));
    }
    let flags = r.u32()?;
    if r.u32()? != NAN {
        return Err(r.malformed());
    }
    let beta = f64::from_bits(r.u64()?);
    let leaf_size = r.u32()?;
    let seed = r.u64()?;
    let customizations = r.u32()?;
    let theta = r.u32()?;
    let variant_code = r.u32()?;
    let inline = r.u32()?;
    let count = r.u32()? as usize;
    if count > TOPOLOGY_TAGS.len() + CUSTOM_TAGS.len() {
        return Err(r.malformed());
    }
    let mut sections = Vec::with_capacity(count);
    for _ in 0..count {
        let tag = String::from_utf8_lossy(r.take(4)?).into_owned();
        sections.push(Section { tag, offset: r.u64()?, length: r.u64()?, crc: r.u32()? });
    }
    let covered = r.pos;
    if crc32fast::hash(&bytes[..covered]) != r.u32()? {
        return Err(FormatError::Checksum("header"));
    }
    let customized = flags & FLAG_CUSTOMIZED != 0;
    let variant = if customized { Some(Variant::from_code(variant_code).ok_or_else(|| r.malformed())?) } else { None };
    for s in &sections {
        let end = s.offset.checked_add(s.length).ok_or_else(|| r.malformed())?;
        if end > bytes.len() as u64 {
            return Err(r.malformed());
        }
        let body = &bytes[s.offset as usize..end as usize];
        if crc32fast::hash(body) != s.crc {
            let tag = static_tag(&s.tag).unwrap_or("unknown");
            return Err(FormatError::Checksum(tag));
        }
    }
    Ok(Header {
        version,
        customized,
        wide_records: flags & FLAG_WIDE != 0,
        beta,
        leaf_size,
        seed,
        customizations,
        theta,
        variant,
        inline,
        sections,
    })
}

fn static_tag(tag: &str) -> Option<&'static str> {
    TOPOLOGY_TAGS.iter().chain(&CUSTOM_TAGS).copied().find(|&t| t == tag)
}

fn section<'a>(bytes: &'a [u8], header: &Header, tag: &'static str) -> Result<Reader<'a>, FormatError> {
    let s = header.sections.iter().find(|s| s.tag == tag).ok_or(FormatError::MissingSection(tag))?;
    Ok(Reader::new(&bytes[s.offset as usize..(s.offset + s.length) as usize], tag))
}

fn read_network(mut r: Reader<'_>) -> Result<RoadNetwork, FormatError> {
    let n = r.u32()? as usize;
    let flat = r.words()?;
    r.finish()?;
    let pairs: Vec<(Vertex, Vertex)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let (network, ids) = RoadNetwork::from_pairs(n, &pairs).map_err(|_| r.malformed())?;
    // Stored edges are already canonical: one id per pair, in order.
    if flat.len() % 2 != 0 || ids.iter().enumerate().any(|(i, &e)| e as usize != i) {
        return Err(r.malformed());
    }
    Ok(network)
}

fn read_hierarchy(mut r: Reader<'_>, n: usize, config: HierarchyConfig) -> Result<TreeHierarchy, FormatError> {
    let unbalanced = r.u32()? as usize;
    let count = r.u32()? as usize;
    let mut layout = Vec::with_capacity(count.min(n.max(1)));
    for _ in 0..count {
        let flags = r.u32()?;
        let vertices = r.words()?;
        layout.push((vertices, [flags & 1 != 0, flags & 2 != 0]));
    }
    r.finish()?;
    TreeHierarchy::from_preorder(n, config.beta, config.leaf_size, layout)
        .map(|h| h.with_unbalanced(unbalanced))
        .ok_or_else(|| r.malformed())
}

fn read_topology(mut r: Reader<'_>, network: &RoadNetwork, order: &VertexOrder) -> Result<ShortcutGraph, FormatError> {
    let n = network.vertex_count();
    let mut up = vec![Vec::new(); n];
    for &v in order.by_rank() {
        let list = r.words()?;
        let ok = list.iter().all(|&u| (u as usize) < n && u != v && order.is_ancestor(u, v))
            && list.windows(2).all(|w| order.rank(w[0]) < order.rank(w[1]));
        if !ok {
            return Err(r.malformed());
        }
        up[v as usize] = list;
    }
    r.finish()?;
    let graph = ShortcutGraph::from_up_lists(network, order, &up);
    if (0..network.edge_count() as EdgeId).any(|e| {
        let (a, b) = network.endpoints(e);
        let (deep, high) = if order.rank(a) > order.rank(b) { (a, b) } else { (b, a) };
        graph.find_edge(deep, high).is_none()
    }) {
        return Err(r.malformed());
    }
    Ok(graph)
}

fn read_topology_part(bytes: &[u8], header: &Header) -> Result<PreprocessedIndex, FormatError> {
    let config = HierarchyConfig { beta: header.beta, leaf_size: header.leaf_size as usize, seed: header.seed };
    let network = read_network(section(bytes, header, "GRPH")?)?;

    let mut r = section(bytes, header, "RDCT")?;
    let (core_of, parent, parent_edge, removed) = (r.words()?, r.words()?, r.words()?, r.words()?);
    r.finish()?;
    let reduction = Reduction::from_parts(&network, core_of, parent, parent_edge, removed).ok_or(r.malformed())?;
    let (core, _) = network.induced(reduction.core_vertices());

    let hierarchy = read_hierarchy(section(bytes, header, "HIER")?, core.vertex_count(), config)?;
    let order = VertexOrder::from_hierarchy(&hierarchy);
    let mut r = section(bytes, header, "ORDR")?;
    let ranks = r.words()?;
    r.finish()?;
    if ranks != order.ranks() {
        return Err(r.malformed());
    }
    let graph = read_topology(section(bytes, header, "TOPO")?, &core, &order)?;
    let topology = Topology { network: core, hierarchy, order, graph };
    Ok(PreprocessedIndex { network, reduction, topology, config, customizations: header.customizations })
}

fn read_customization(bytes: &[u8], header: &Header, pre: &PreprocessedIndex) -> Result<CustomizedIndex, FormatError> {
    let variant = header.variant.ok_or(FormatError::NotCustomized)?;
    let config = CustomizeConfig {
        theta: header.theta,
        variant,
        inline: header.inline as usize,
        wide_records: header.wide_records,
        threads: 1,
    };
    let topo = &pre.topology;
    let edges = topo.graph.edge_count();

    let mut r = section(bytes, header, "METR")?;
    let costs = r.words()?;
    r.finish()?;
    let metric = Metric::new(&pre.network, costs).map_err(|_| r.malformed())?;

    let mut r = section(bytes, header, "COST")?;
    let (cost, triangle) = (r.words()?, r.words()?);
    r.finish()?;
    if cost.len() != edges || triangle.len() != edges {
        return Err(r.malformed());
    }

    let mut r = section(bytes, header, "RECS")?;
    let records = if variant.extended_shortcuts() {
        let inline = r.u32()? as usize;
        let layout = RecordLayout::new(inline);
        let words = r.words()?;
        if inline != config.inline || words.len() != edges * layout.stride() {
            return Err(r.malformed());
        }
        Some(RecordArena::from_words(layout, words).ok_or(r.malformed())?)
    } else {
        None
    };
    r.finish()?;

    let mut r = section(bytes, header, "LABL")?;
    let (offset, lcost, path_vertex, path_edge) = (r.longs()?, r.words()?, r.words()?, r.words()?);
    r.finish()?;
    let labels = Labeling::from_raw(
        &topo.order,
        TruncationPolicy::new(config.theta),
        variant.path_flavor(),
        offset,
        lcost,
        path_vertex,
        path_edge,
    )
    .ok_or(r.malformed())?;

    let shortcuts = CustomizedShortcuts { cost, triangle, records };
    let core = Customization { config, shortcuts, labels, timings: CustomizeTimings::default() };
    Ok(CustomizedIndex { pendant: pre.reduction.pendant_costs(&metric), metric, core })
}

/// Parses an index file produced by [`to_bytes`], verifying every checksum
/// and the consistency of the stored structures.
pub fn from_bytes(bytes: &[u8]) -> Result<(PreprocessedIndex, Option<CustomizedIndex>), FormatError> {
    let header = read_header(bytes)?;
    let pre = read_topology_part(bytes, &header)?;
    let custom = if header.customized { Some(read_customization(bytes, &header, &pre)?) } else { None };
    Ok((pre, custom))
}

pub fn save(path: &Path, pre: &PreprocessedIndex, custom: Option<&CustomizedIndex>) -> Result<()> {
    fs::write(path, to_bytes(pre, custom)).map_err(FormatError::from)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(PreprocessedIndex, Option<CustomizedIndex>)> {
    let bytes = fs::read(path).map_err(FormatError::from)?;
    Ok(from_bytes(&bytes)?)
}
