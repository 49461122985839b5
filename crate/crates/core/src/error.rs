use thiserror::Error;

use crate::graph::{EdgeId, Vertex, Weight};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex count {0} exceeds the 32-bit id space")]
    TooManyVertices(usize),
    #[error("vertex {vertex} out of range (vertex count {vertex_count})")]
    VertexOutOfRange { vertex: Vertex, vertex_count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("metric has {actual} costs, network has {expected} edges")]
    MetricSize { expected: usize, actual: usize },
    #[error("edge {edge} has invalid cost {cost}")]
    InvalidCost { edge: EdgeId, cost: Weight },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("malformed line")]
    Malformed,
    #[error("missing problem line")]
    MissingProblemLine,
    #[error("duplicate problem line")]
    DuplicateProblemLine,
    #[error("vertex id {0} out of range")]
    IdOutOfRange(u64),
    #[error("nonpositive weight")]
    NonpositiveWeight,
    #[error("weight {0} does not fit in 32 bits")]
    WeightOverflow(u64),
    #[error("i/o error: {0}")]
    Io(String),
}

/// DIMACS parse failure, tagged with its 1-based line number.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq)]
pub enum HierarchyError {
    #[error("balance parameter {0} outside (0, 0.5)")]
    InvalidBeta(f64),
    #[error("network is not connected")]
    Disconnected,
    #[error("network has no vertices")]
    Empty,
    #[error("hierarchy depth {0} exceeds 64 levels")]
    TooDeep(usize),
}

/// Internal inconsistencies detected while answering queries. Any of these
/// means the index is corrupt or was customized with a different topology.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CorruptionError {
    #[error("path record {0} out of bounds")]
    DanglingRecord(u64),
    #[error("no shortcut between {0} and {1}")]
    MissingShortcut(Vertex, Vertex),
    #[error("endpoint chain from {vertex} broken at rank {rank}")]
    BrokenChain { vertex: Vertex, rank: u32 },
    #[error("no upward witness from {vertex} toward rank {rank}")]
    NoWitness { vertex: Vertex, rank: u32 },
    #[error("endpoint chains end at different hubs {0} and {1}")]
    HubMismatch(Vertex, Vertex),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not an index file")]
    BadMagic,
    #[error("unsupported index version {0}")]
    Version(u32),
    #[error("checksum mismatch in section {0}")]
    Checksum(&'static str),
    #[error("section {0} missing")]
    MissingSection(&'static str),
    #[error("section {0} truncated or malformed")]
    Malformed(&'static str),
    #[error("index has not been customized")]
    NotCustomized,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Corruption(#[from] CorruptionError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("metric does not match the indexed network: {0}")]
    MetricMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
