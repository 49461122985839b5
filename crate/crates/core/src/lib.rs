//! Customizable tree labeling for shortest-path queries on road networks.
//!
//! The pipeline has three phases. Preprocessing builds a balanced separator
//! hierarchy and the shortcut topology it induces; this depends only on the
//! graph. Customization applies a metric: it computes shortcut costs and
//! per-vertex distance labels. Queries then combine two labels to obtain a
//! distance, and optionally unpack the shortest path.

pub mod batch;
pub mod dijkstra;
pub mod dimacs;
pub mod error;
pub mod format;
pub mod graph;
pub mod hierarchy;
pub mod index;
pub mod labeling;
pub mod order;
pub mod path;
pub mod query;
pub mod queryset;
pub mod reduce;
mod schedule;
pub mod shortcuts;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{Metric, QueryPair, RoadNetwork, Vertex, Weight, INFINITY, NAN};
