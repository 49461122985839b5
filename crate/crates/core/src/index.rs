//! Preprocessed and customized indexes over a full road network.
//!
//! Preprocessing keeps the largest component, strips degree-one trees and
//! builds the hierarchy and shortcut topology of the remaining core. A
//! customization binds a metric and fixes θ, the storage variant and the
//! inline record capacity. [`Router`] answers queries in original vertex
//! ids, routing through the core and the stripped trees as needed.

use std::time::{Duration, Instant};

use crate::batch::{batch_get_paths, OverlapReport};
use crate::error::{Error, GraphError, Result};
use crate::graph::{add_cost, Metric, RoadNetwork, Vertex, Weight, INFINITY};
use crate::hierarchy::{HierarchyConfig, TreeHierarchy};
use crate::labeling::{Labeling, TruncationPolicy};
use crate::order::VertexOrder;
use crate::path::Variant;
use crate::query::{IndexView, QueryAgent, QueryStats};
use crate::reduce::{Placement, Reduction};
use crate::shortcuts::{CustomizedShortcuts, RecordLayout, ShortcutGraph, DEFAULT_INLINE, RECORD_WORDS};

/// Metric-independent structures of the core graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub network: RoadNetwork,
    pub hierarchy: TreeHierarchy,
    pub order: VertexOrder,
    pub graph: ShortcutGraph,
}

impl Topology {
    pub fn build(network: RoadNetwork, config: HierarchyConfig) -> Result<Self> {
        let hierarchy = TreeHierarchy::build(&network, config)?;
        Ok(Self::from_hierarchy(network, hierarchy))
    }

    pub fn from_hierarchy(network: RoadNetwork, hierarchy: TreeHierarchy) -> Self {
        let order = VertexOrder::from_hierarchy(&hierarchy);
        let graph = ShortcutGraph::build(&network, &order);
        Topology { network, hierarchy, order, graph }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CustomizeConfig {
    pub theta: u32,
    pub variant: Variant,
    /// Inline capacity of path records (extended variants only).
    pub inline: usize,
    /// Permits an inline capacity above the six-word record.
    pub wide_records: bool,
    pub threads: usize,
}

impl Default for CustomizeConfig {
    fn default() -> Self {
        CustomizeConfig { theta: 0, variant: Variant::Ee, inline: DEFAULT_INLINE, wide_records: false, threads: 1 }
    }
}

impl CustomizeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inline > RECORD_WORDS && !self.wide_records {
            return Err(Error::Config(format!(
                "inline capacity {} exceeds {RECORD_WORDS} words; enable wide records to allow it",
                self.inline
            )));
        }
        if self.threads == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        Ok(())
    }

    fn record_layout(&self) -> Option<RecordLayout> {
        self.variant.extended_shortcuts().then(|| RecordLayout::new(self.inline))
    }
}

/// Wall-clock time of each customization phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CustomizeTimings {
    pub shortcuts: Duration,
    pub labels: Duration,
}

/// Metric-dependent state of the core graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Customization {
    pub config: CustomizeConfig,
    pub shortcuts: CustomizedShortcuts,
    pub labels: Labeling,
    pub timings: CustomizeTimings,
}

impl Customization {
    pub fn new(topology: &Topology, metric: &Metric, config: CustomizeConfig) -> Result<Self> {
        config.validate()?;
        if metric.costs().len() != topology.network.edge_count() {
            return Err(Error::MetricMismatch(format!(
                "{} costs for {} core edges",
                metric.costs().len(),
                topology.network.edge_count()
            )));
        }
        let start = Instant::now();
        let shortcuts = topology.graph.customize(metric, config.record_layout(), config.threads);
        let mid = Instant::now();
        let labels = Labeling::customize(
            &topology.graph,
            &shortcuts.cost,
            &topology.order,
            TruncationPolicy::new(config.theta),
            config.variant.path_flavor(),
            config.threads,
        );
        let timings = CustomizeTimings { shortcuts: mid - start, labels: mid.elapsed() };
        Ok(Customization { config, shortcuts, labels, timings })
    }

    pub fn view<'a>(&'a self, topology: &'a Topology) -> IndexView<'a> {
        IndexView {
            order: &topology.order,
            graph: &topology.graph,
            shortcuts: &self.shortcuts,
            labels: &self.labels,
            variant: self.config.variant,
        }
    }
}

/// Metric-independent index of a full network.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedIndex {
    pub network: RoadNetwork,
    pub reduction: Reduction,
    pub topology: Topology,
    pub config: HierarchyConfig,
    /// Number of customizations applied to this index so far.
    pub customizations: u32,
}

impl PreprocessedIndex {
    pub fn build(network: RoadNetwork, config: HierarchyConfig) -> Result<Self> {
        if network.vertex_count() == 0 {
            return Err(crate::error::HierarchyError::Empty.into());
        }
        if !network.is_connected() {
            log::warn!("network is disconnected; indexing its largest component only");
        }
        let (core, reduction) = Reduction::contract(&network);
        log::info!(
            "core has {} of {} vertices ({} removed as degree-one trees)",
            core.vertex_count(),
            network.vertex_count(),
            reduction.removed_count()
        );
        let topology = Topology::build(core, config)?;
        Ok(PreprocessedIndex { network, reduction, topology, config, customizations: 0 })
    }

    pub fn customize(&self, metric: &Metric, config: CustomizeConfig) -> Result<CustomizedIndex> {
        if metric.costs().len() != self.network.edge_count() {
            return Err(Error::MetricMismatch(format!(
                "{} costs for {} edges",
                metric.costs().len(),
                self.network.edge_count()
            )));
        }
        let core_metric = self.reduction.core_metric(metric);
        let core = Customization::new(&self.topology, &core_metric, config)?;
        Ok(CustomizedIndex { metric: metric.clone(), pendant: self.reduction.pendant_costs(metric), core })
    }
}

/// A customization of a [`PreprocessedIndex`], in original ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CustomizedIndex {
    pub metric: Metric,
    /// Cost from every vertex to its anchor in the core.
    pub pendant: Vec<Weight>,
    pub core: Customization,
}

impl CustomizedIndex {
    pub fn config(&self) -> CustomizeConfig {
        self.core.config
    }
}

/// How an original-id query decomposes.
enum Route {
    Trivial(Weight, Option<Vec<Vertex>>),
    SameTree { meet: Vertex },
    Core { a: Vertex, b: Vertex },
}

/// Cost and vertex sequence of a shortest path, `None` when unreachable.
pub type PathAnswer = Option<(Weight, Vec<Vertex>)>;

/// Query front end for one thread.
pub struct Router<'a> {
    pre: &'a PreprocessedIndex,
    cust: &'a CustomizedIndex,
    agent: QueryAgent<'a>,
    core_path: Vec<Vertex>,
}

impl<'a> Router<'a> {
    pub fn new(pre: &'a PreprocessedIndex, cust: &'a CustomizedIndex) -> Self {
        Router { pre, cust, agent: QueryAgent::new(cust.core.view(&pre.topology)), core_path: Vec::new() }
    }

    pub fn stats(&self) -> QueryStats {
        self.agent.stats
    }

    pub fn reset_stats(&mut self) {
        self.agent.stats = QueryStats::default();
    }

    fn check(&self, v: Vertex) -> Result<()> {
        let n = self.pre.network.vertex_count();
        if v as usize >= n {
            return Err(GraphError::VertexOutOfRange { vertex: v, vertex_count: n }.into());
        }
        Ok(())
    }

    fn route(&self, s: Vertex, t: Vertex) -> Result<Route> {
        self.check(s)?;
        self.check(t)?;
        if s == t {
            return Ok(Route::Trivial(0, Some(vec![s])));
        }
        let red = &self.pre.reduction;
        match (red.placement(s), red.placement(t)) {
            (Placement::Anchored { anchor: a }, Placement::Anchored { anchor: b }) if a == b => {
                Ok(Route::SameTree { meet: red.meeting_vertex(s, t) })
            }
            (Placement::Anchored { anchor: a }, Placement::Anchored { anchor: b }) => Ok(Route::Core { a, b }),
            _ => Ok(Route::Trivial(INFINITY, None)),
        }
    }

    fn tree_path(&self, s: Vertex, t: Vertex, meet: Vertex) -> Vec<Vertex> {
        let red = &self.pre.reduction;
        let mut path: Vec<Vertex> = red.climb(s).take_while(|&v| v != meet).collect();
        path.push(meet);
        let mut down: Vec<Vertex> = red.climb(t).take_while(|&v| v != meet).collect();
        down.reverse();
        path.extend(down);
        path
    }

    fn wrap(&self, s: Vertex, t: Vertex, core: &[Vertex]) -> Vec<Vertex> {
        let red = &self.pre.reduction;
        let mut path: Vec<Vertex> = red.climb(s).collect();
        path.pop();
        path.extend(core.iter().map(|&c| red.original_id(c)));
        let mut tail: Vec<Vertex> = red.climb(t).collect();
        tail.pop();
        tail.reverse();
        path.extend(tail);
        path
    }

    /// Shortest distance, `INFINITY` when unreachable.
    pub fn distance(&mut self, s: Vertex, t: Vertex) -> Result<Weight> {
        let pend = &self.cust.pendant;
        Ok(match self.route(s, t)? {
            Route::Trivial(d, _) => d,
            Route::SameTree { meet } => pend[s as usize] + pend[t as usize] - 2 * pend[meet as usize],
            Route::Core { a, b } => {
                let d = self.agent.find_distance(a, b).distance;
                add_cost(add_cost(pend[s as usize], d), pend[t as usize])
            }
        })
    }

    /// Shortest path with its cost; `None` when unreachable.
    pub fn path(&mut self, s: Vertex, t: Vertex) -> Result<PathAnswer> {
        let pend = &self.cust.pendant;
        Ok(match self.route(s, t)? {
            Route::Trivial(d, p) => p.map(|p| (d, p)),
            Route::SameTree { meet } => {
                let d = pend[s as usize] + pend[t as usize] - 2 * pend[meet as usize];
                Some((d, self.tree_path(s, t, meet)))
            }
            Route::Core { a, b } => {
                let mut buf = std::mem::take(&mut self.core_path);
                let d = self.agent.get_path(a, b, &mut buf)?;
                let out = (d != INFINITY)
                    .then(|| (add_cost(add_cost(pend[s as usize], d), pend[t as usize]), self.wrap(s, t, &buf)));
                self.core_path = buf;
                out
            }
        })
    }

    /// Answers all pairs with prefix reuse among the core parts of the
    /// paths. Results are in submission order.
    pub fn batch(&mut self, pairs: &[(Vertex, Vertex)]) -> (Vec<Result<PathAnswer>>, OverlapReport) {
        let mut results: Vec<Option<Result<PathAnswer>>> = Vec::with_capacity(pairs.len());
        let mut core_pairs = Vec::new();
        let mut core_slots = Vec::new();
        for (i, &(s, t)) in pairs.iter().enumerate() {
            match self.route(s, t) {
                Ok(Route::Core { a, b }) => {
                    core_pairs.push((a, b));
                    core_slots.push(i);
                    results.push(None);
                }
                Ok(_) => results.push(Some(self.path(s, t))),
                Err(e) => results.push(Some(Err(e))),
            }
        }
        let outcome = batch_get_paths(&mut self.agent, &core_pairs);
        let pend = &self.cust.pendant;
        for (slot, r) in core_slots.into_iter().zip(outcome.results) {
            let (s, t) = pairs[slot];
            results[slot] = Some(match r {
                Err(e) => Err(e.into()),
                Ok((INFINITY, _)) => Ok(None),
                Ok((d, core)) => {
                    Ok(Some((add_cost(add_cost(pend[s as usize], d), pend[t as usize]), self.wrap(s, t, &core))))
                }
            });
        }
        (results.into_iter().map(|r| r.expect("every slot filled")).collect(), outcome.report)
    }
}
