//! Directed-graph primitives shared by every solver in this crate.
//!
//! Vertices are dense indices `0..n`; algorithms that need stable tie-breaking
//! always prefer the smallest index. A [`Digraph`] keeps its edge list in
//! insertion order and derives sorted adjacency lists from it: parallel edges
//! stay in the list but collapse to a single adjacency entry, and loop edges
//! are rejected outright. Everything here is immutable once built.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeSet, VecDeque};

use thiserror::Error;

/// Errors raised while building or querying graphs, instances and witnesses.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum GraphError {
    /// An edge whose tail equals its head.
    #[error("loop edge ({0}, {0}) is not allowed")]
    LoopEdge(usize),
    /// An edge endpoint outside `0..num_vertices`.
    #[error("edge endpoint {vertex} out of range for {num_vertices} vertices")]
    EndpointOutOfRange { vertex: usize, num_vertices: usize },
    /// A vertex argument outside `0..num_vertices`.
    #[error("vertex {vertex} out of range for {num_vertices} vertices")]
    VertexOutOfRange { vertex: usize, num_vertices: usize },
    /// The graph has a directed cycle where an acyclic one is required.
    #[error("graph contains a directed cycle")]
    Cyclic,
    /// A congestion bound of zero is never satisfiable by a nonempty routing.
    #[error("congestion bound must be at least 1")]
    ZeroCongestion,
    /// A witness whose path count differs from the instance's demand count.
    #[error("witness carries {found} paths but the instance has {expected} demands")]
    WitnessLengthMismatch { found: usize, expected: usize },
}

/// Ways a single path can fail validation against a graph or a demand.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PathViolation {
    #[error("empty vertex sequence")]
    Empty,
    #[error("vertex {0} out of range")]
    OutOfRange(usize),
    #[error("step ({0}, {1}) is not an edge")]
    NonEdge(usize, usize),
    #[error("vertex {0} appears twice")]
    Repeated(usize),
    #[error("endpoint mismatch: starts at {found}, demand source is {expected}")]
    WrongSource { expected: usize, found: usize },
    #[error("endpoint mismatch: ends at {found}, demand target is {expected}")]
    WrongTarget { expected: usize, found: usize },
}

/// First problem found while checking a routing witness.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum RoutingViolation {
    /// Lowest-index path that is invalid or misses its demand's endpoints.
    #[error("path {index}: {violation}")]
    Path { index: usize, violation: PathViolation },
    /// Smallest-index vertex used by more paths than the bound allows.
    #[error("vertex {vertex} lies on {count} paths, exceeds congestion {bound}")]
    Congestion { vertex: usize, count: usize, bound: usize },
}

/// Outcome of [`check_routing`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingVerdict {
    Accept,
    Reject(RoutingViolation),
}

impl RoutingVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, RoutingVerdict::Accept)
    }
}

/// An immutable digraph over vertices `0..num_vertices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl Digraph {
    /// Builds a digraph from an edge list given as `(tail, head)` pairs.
    ///
    /// Endpoints must lie in `0..num_vertices` and loops are rejected.
    /// Parallel edges are legal: they remain in [`Digraph::edges`] but are
    /// collapsed to one adjacency entry, so routing treats them as one edge.
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        for &(u, v) in &edges {
            for w in [u, v] {
                if w >= num_vertices {
                    return Err(GraphError::EndpointOutOfRange { vertex: w, num_vertices });
                }
            }
            if u == v {
                return Err(GraphError::LoopEdge(u));
            }
        }
        let mut succ = vec![Vec::new(); num_vertices];
        let mut pred = vec![Vec::new(); num_vertices];
        for &(u, v) in &edges {
            succ[u].push(v);
            pred[v].push(u);
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { num_vertices, edges, succ, pred })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Edge list in insertion order, parallel edges included.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Out-neighbours of `v`, sorted ascending and deduplicated.
    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    /// In-neighbours of `v`, sorted ascending and deduplicated.
    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_vertices && self.succ[u].binary_search(&v).is_ok()
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.num_vertices {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, num_vertices: self.num_vertices })
        }
    }

    /// Topological order, or [`GraphError::Cyclic`].
    ///
    /// Kahn's algorithm with a min-heap of ready vertices, so among all
    /// vertices whose predecessors are already placed the smallest index is
    /// emitted first. This makes the order a deterministic function of the
    /// graph alone.
    pub fn topological_order(&self) -> Result<Vec<usize>, GraphError> {
        let mut indegree: Vec<usize> = (0..self.num_vertices).map(|v| self.pred[v].len()).collect();
        let mut ready: BinaryHeap<Reverse<usize>> = indegree
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d == 0)
            .map(|(v, _)| Reverse(v))
            .collect();
        let mut order = Vec::with_capacity(self.num_vertices);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &w in &self.succ[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.push(Reverse(w));
                }
            }
        }
        if order.len() == self.num_vertices {
            Ok(order)
        } else {
            Err(GraphError::Cyclic)
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    /// Every vertex reachable from `source`, including `source` itself.
    pub fn reachable_set(&self, source: usize) -> Result<BTreeSet<usize>, GraphError> {
        self.check_vertex(source)?;
        let mask = self.reachable_mask(source);
        Ok(mask
            .iter()
            .enumerate()
            .filter(|&(_, &r)| r)
            .map(|(v, _)| v)
            .collect())
    }

    /// Forward reachability as a bitmask; `source` must be in range.
    pub(crate) fn reachable_mask(&self, source: usize) -> Vec<bool> {
        self.directional_mask(source, &self.succ)
    }

    /// Vertices from which `target` is reachable, as a bitmask.
    pub(crate) fn coreachable_mask(&self, target: usize) -> Vec<bool> {
        self.directional_mask(target, &self.pred)
    }

    fn directional_mask(&self, start: usize, adj: &[Vec<usize>]) -> Vec<bool> {
        let mut seen = vec![false; self.num_vertices];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

/// One source/target pair to route. `source == target` is legal and is
/// satisfied by the single-vertex path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Demand {
    pub source: usize,
    pub target: usize,
}

impl Demand {
    pub fn new(source: usize, target: usize) -> Self {
        Self { source, target }
    }
}

/// A routing problem: a digraph, a demand list (duplicates allowed, order
/// significant) and a vertex congestion bound `>= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    graph: Digraph,
    demands: Vec<Demand>,
    congestion: usize,
}

impl Instance {
    pub fn new(
        graph: Digraph,
        demands: Vec<Demand>,
        congestion: usize,
    ) -> Result<Self, GraphError> {
        if congestion < 1 {
            return Err(GraphError::ZeroCongestion);
        }
        for d in &demands {
            graph.check_vertex(d.source)?;
            graph.check_vertex(d.target)?;
        }
        Ok(Self { graph, demands, congestion })
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn demands(&self) -> &[Demand] {
        &self.demands
    }

    pub fn congestion(&self) -> usize {
        self.congestion
    }
}

/// A nonempty sequence of pairwise distinct vertices; a single vertex is a
/// valid zero-edge path. Whether consecutive vertices are joined by edges is
/// a property of a particular graph and is checked by [`validate_path`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    vertices: Vec<usize>,
}

impl Path {
    /// Rejects empty sequences and repeated vertices.
    pub fn new(vertices: Vec<usize>) -> Result<Self, PathViolation> {
        if vertices.is_empty() {
            return Err(PathViolation::Empty);
        }
        let mut seen = BTreeSet::new();
        for &v in &vertices {
            if !seen.insert(v) {
                return Err(PathViolation::Repeated(v));
            }
        }
        Ok(Self { vertices })
    }

    /// The zero-edge path sitting on one vertex.
    pub fn single(vertex: usize) -> Self {
        Self { vertices: vec![vertex] }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn source(&self) -> usize {
        self.vertices[0]
    }

    pub fn target(&self) -> usize {
        *self.vertices.last().expect("paths are nonempty")
    }
}

/// Paths aligned index-by-index with an instance's demand list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoutingWitness {
    pub paths: Vec<Path>,
}

impl RoutingWitness {
    pub fn new(paths: Vec<Path>) -> Self {
        Self { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Per-vertex count of how many of a witness's paths visit each vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongestionProfile {
    counts: Vec<usize>,
}

impl CongestionProfile {
    pub fn count(&self, vertex: usize) -> usize {
        self.counts[vertex]
    }

    /// Counts for all vertices; vertices on no path have count 0.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Largest count over all vertices, 0 for a vertex-free graph.
    pub fn max(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Smallest-index vertex whose count exceeds `bound`, with its count.
    pub fn first_above(&self, bound: usize) -> Option<(usize, usize)> {
        self.counts
            .iter()
            .enumerate()
            .find(|&(_, &c)| c > bound)
            .map(|(v, &c)| (v, c))
    }
}

/// Checks that `path` is a simple path of `g`: vertices in range, pairwise
/// distinct and consecutively joined by edges.
pub fn validate_path(g: &Digraph, path: &Path) -> Result<(), PathViolation> {
    let vs = path.vertices();
    let mut seen = BTreeSet::new();
    for &v in vs {
        if v >= g.num_vertices() {
            return Err(PathViolation::OutOfRange(v));
        }
        if !seen.insert(v) {
            return Err(PathViolation::Repeated(v));
        }
    }
    for w in vs.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return Err(PathViolation::NonEdge(w[0], w[1]));
        }
    }
    Ok(())
}

/// Counts, for every vertex of `g`, how many of the given paths visit it.
///
/// Fails with the lowest-index invalid path; a vertex visited by one path
/// contributes once to that vertex regardless of edge multiplicities.
pub fn congestion_profile(
    g: &Digraph,
    paths: &[Path],
) -> Result<CongestionProfile, RoutingViolation> {
    let mut counts = vec![0usize; g.num_vertices()];
    for (index, path) in paths.iter().enumerate() {
        validate_path(g, path).map_err(|violation| RoutingViolation::Path { index, violation })?;
        for &v in path.vertices() {
            counts[v] += 1;
        }
    }
    Ok(CongestionProfile { counts })
}

/// Decides whether `witness` is a valid routing for `instance`.
///
/// Accepts iff every path is a simple path of the graph, path `i` runs from
/// demand `i`'s source to its target, and no vertex lies on more than
/// `congestion` paths. Rejections name the first failing path index, or for
/// congestion overruns the smallest offending vertex. A witness whose length
/// differs from the demand list is an error, not a rejection.
pub fn check_routing(
    instance: &Instance,
    witness: &RoutingWitness,
) -> Result<RoutingVerdict, GraphError> {
    let demands = instance.demands();
    if witness.paths.len() != demands.len() {
        return Err(GraphError::WitnessLengthMismatch {
            found: witness.paths.len(),
            expected: demands.len(),
        });
    }
    for (index, (path, demand)) in witness.paths.iter().zip(demands).enumerate() {
        let reject = |violation| Ok(RoutingVerdict::Reject(RoutingViolation::Path { index, violation }));
        if let Err(violation) = validate_path(instance.graph(), path) {
            return reject(violation);
        }
        if path.source() != demand.source {
            return reject(PathViolation::WrongSource {
                expected: demand.source,
                found: path.source(),
            });
        }
        if path.target() != demand.target {
            return reject(PathViolation::WrongTarget {
                expected: demand.target,
                found: path.target(),
            });
        }
    }
    let profile = congestion_profile(instance.graph(), &witness.paths)
        .expect("paths were validated above");
    if let Some((vertex, count)) = profile.first_above(instance.congestion()) {
        return Ok(RoutingVerdict::Reject(RoutingViolation::Congestion {
            vertex,
            count,
            bound: instance.congestion(),
        }));
    }
    Ok(RoutingVerdict::Accept)
}
