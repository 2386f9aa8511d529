//! Exhaustive reference solvers.
//!
//! Everything in this module trades speed for transparency: enumerate all
//! candidate objects, test each one directly, stop at the first hit. The fast
//! solvers elsewhere in the crate are validated against these oracles on
//! small instances, so the code here deliberately avoids sharing machinery
//! with them. Every cap overrun is a hard error, never a silent NO.

use std::collections::HashSet;

use thiserror::Error;

use crate::graph::{Digraph, GraphError, Instance, Path, RoutingWitness};

/// Errors from the brute-force solvers.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    #[error("number of simple paths exceeds cap of {cap}")]
    PathCapExceeded { cap: u64 },
    #[error("path combination count exceeds cap of {cap}")]
    CombinationCapExceeded { cap: u64 },
    #[error("embedding tuple count exceeds cap of {cap}")]
    EmbeddingCapExceeded { cap: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Work limits for the exhaustive searches.
#[derive(Debug, Clone, Copy)]
pub struct OracleCaps {
    /// Bound on the product of per-demand simple-path counts (and on each
    /// single enumeration).
    pub max_path_combinations: u64,
    /// Bound on the product of host-class sizes in embedding search.
    pub max_embedding_tuples: u64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self { max_path_combinations: 5_000_000, max_embedding_tuples: 1_000_000 }
    }
}

/// All simple paths from `source` to `target`, in lexicographic order of
/// their vertex sequences.
///
/// Requires an acyclic graph, where every directed walk is automatically
/// simple. `source == target` yields exactly the single-vertex path. Errors
/// once more than `cap` paths exist.
pub fn enumerate_simple_paths(
    g: &Digraph,
    source: usize,
    target: usize,
    cap: u64,
) -> Result<Vec<Path>, OracleError> {
    g.check_vertex(source)?;
    g.check_vertex(target)?;
    g.topological_order()?;
    if source == target {
        return Ok(vec![Path::single(source)]);
    }
    // Only descend into vertices that can still reach the target; this skips
    // dead branches without changing the set of paths found.
    let live = g.coreachable_mask(target);
    if !live[source] {
        return Ok(Vec::new());
    }
    let mut paths = Vec::new();
    let mut prefix = vec![source];
    extend_paths(g, &live, target, &mut prefix, &mut paths, cap)?;
    Ok(paths)
}

fn extend_paths(
    g: &Digraph,
    live: &[bool],
    target: usize,
    prefix: &mut Vec<usize>,
    paths: &mut Vec<Path>,
    cap: u64,
) -> Result<(), OracleError> {
    let v = *prefix.last().expect("prefix starts nonempty");
    if v == target {
        if paths.len() as u64 >= cap {
            return Err(OracleError::PathCapExceeded { cap });
        }
        paths.push(Path::new(prefix.clone()).expect("walks in a DAG are simple"));
        return Ok(());
    }
    for &w in g.successors(v) {
        if live[w] {
            prefix.push(w);
            extend_paths(g, live, target, prefix, paths, cap)?;
            prefix.pop();
        }
    }
    Ok(())
}

/// What the routing oracle found and how much work it did.
#[derive(Debug, Clone)]
pub struct BruteForceOutcome {
    pub witness: Option<RoutingWitness>,
    /// Product of per-demand simple-path counts.
    pub combinations: u64,
    /// Number of path placements attempted during the search.
    pub choices_explored: u64,
}

/// Decides a routing instance by exhausting path combinations, with default
/// caps. See [`brute_force_routing_with`].
pub fn brute_force_routing(instance: &Instance) -> Result<Option<RoutingWitness>, OracleError> {
    brute_force_routing_with(instance, OracleCaps::default()).map(|o| o.witness)
}

/// Decides a routing instance by trying combinations of per-demand simple
/// paths, keeping a running congestion profile and backtracking as soon as
/// any vertex exceeds the bound.
///
/// Demands are processed in ascending order of their path counts (ties by
/// index) — a pruning heuristic that cannot change the answer — and each
/// demand's paths are tried in lexicographic order, so the witness is the
/// first satisfying combination of that fixed search order. Requires an
/// acyclic graph; errors when the combination count exceeds the cap.
pub fn brute_force_routing_with(
    instance: &Instance,
    caps: OracleCaps,
) -> Result<BruteForceOutcome, OracleError> {
    let g = instance.graph();
    let cap = caps.max_path_combinations;
    let mut path_lists = Vec::with_capacity(instance.demands().len());
    for d in instance.demands() {
        path_lists.push(enumerate_simple_paths(g, d.source, d.target, cap)?);
    }
    let combinations = path_lists
        .iter()
        .fold(1u64, |acc, list| acc.saturating_mul(list.len() as u64));
    if combinations > cap {
        return Err(OracleError::CombinationCapExceeded { cap });
    }

    let k = path_lists.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (path_lists[i].len(), i));

    let mut search = CombinationSearch {
        path_lists: &path_lists,
        order: &order,
        bound: instance.congestion(),
        counts: vec![0; g.num_vertices()],
        chosen: vec![usize::MAX; k],
        choices_explored: 0,
    };
    let witness = if search.descend(0) {
        let paths = search
            .chosen
            .iter()
            .enumerate()
            .map(|(i, &p)| path_lists[i][p].clone())
            .collect();
        Some(RoutingWitness::new(paths))
    } else {
        None
    };
    Ok(BruteForceOutcome { witness, combinations, choices_explored: search.choices_explored })
}

struct CombinationSearch<'a> {
    path_lists: &'a [Vec<Path>],
    order: &'a [usize],
    bound: usize,
    counts: Vec<usize>,
    chosen: Vec<usize>,
    choices_explored: u64,
}

impl CombinationSearch<'_> {
    fn descend(&mut self, depth: usize) -> bool {
        let Some(&demand) = self.order.get(depth) else {
            return true;
        };
        for index in 0..self.path_lists[demand].len() {
            self.choices_explored += 1;
            let path = &self.path_lists[demand][index];
            if !place(path, &mut self.counts, self.bound) {
                continue;
            }
            self.chosen[demand] = index;
            if self.descend(depth + 1) {
                return true;
            }
            unplace(path, &mut self.counts);
        }
        false
    }
}

/// Adds a path to the congestion counts; on overrun rolls back and reports
/// failure.
fn place(path: &Path, counts: &mut [usize], bound: usize) -> bool {
    for (i, &v) in path.vertices().iter().enumerate() {
        counts[v] += 1;
        if counts[v] > bound {
            for &w in &path.vertices()[..=i] {
                counts[w] -= 1;
            }
            return false;
        }
    }
    true
}

fn unplace(path: &Path, counts: &mut [usize]) {
    for &v in path.vertices() {
        counts[v] -= 1;
    }
}

/// Ways a partitioned-subgraph-isomorphism instance can be malformed.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PsiError {
    #[error("pattern vertex {vertex} out of range for {count} vertices")]
    PatternVertexOutOfRange { vertex: usize, count: usize },
    #[error("pattern loop at vertex {0}")]
    PatternLoop(usize),
    #[error("pattern vertex {0} appears twice in the bipartition")]
    BipartitionOverlap(usize),
    #[error("pattern vertex {0} missing from the bipartition")]
    BipartitionIncomplete(usize),
    #[error("pattern edge ({0}, {1}) does not cross the bipartition")]
    EdgeWithinClass(usize, usize),
    #[error("expected {expected} host classes, found {found}")]
    WrongClassCount { expected: usize, found: usize },
    #[error("host vertex {0} appears in more than one class")]
    HostVertexReused(usize),
    #[error("host vertex {vertex} out of range for {count} vertices")]
    HostVertexOutOfRange { vertex: usize, count: usize },
    #[error("host loop at vertex {0}")]
    HostLoop(usize),
    #[error("congestion bound must be at least 1")]
    ZeroCongestion,
}

/// Partitioned subgraph isomorphism: an undirected bipartite pattern on
/// vertices `0..k` split into two classes, an undirected host graph whose
/// vertices are partitioned into one class per pattern vertex, and the
/// congestion bound to use when the instance is turned into a routing
/// problem.
///
/// The question: pick one host vertex `v_{i,z_i}` from every class `V_i` so
/// that every pattern edge `{i, j}` maps to a host edge
/// `{v_{i,z_i}, v_{j,z_j}}`. Host vertex indices are dense `0..N` with the
/// classes forming a partition; pattern edges may repeat (a multigraph).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiInstance {
    pattern_vertices: usize,
    pattern_edges: Vec<(usize, usize)>,
    class_a: Vec<usize>,
    class_b: Vec<usize>,
    host_classes: Vec<Vec<usize>>,
    host_edges: Vec<(usize, usize)>,
    congestion: usize,
    host_adjacency: HashSet<(usize, usize)>,
}

impl PsiInstance {
    pub fn new(
        pattern_vertices: usize,
        pattern_edges: Vec<(usize, usize)>,
        class_a: Vec<usize>,
        class_b: Vec<usize>,
        host_classes: Vec<Vec<usize>>,
        host_edges: Vec<(usize, usize)>,
        congestion: usize,
    ) -> Result<Self, PsiError> {
        if congestion < 1 {
            return Err(PsiError::ZeroCongestion);
        }
        let k = pattern_vertices;
        // The two classes must partition the pattern vertices.
        let mut side = vec![None; k];
        for (label, class) in [(0u8, &class_a), (1, &class_b)] {
            for &v in class {
                if v >= k {
                    return Err(PsiError::PatternVertexOutOfRange { vertex: v, count: k });
                }
                if side[v].replace(label).is_some() {
                    return Err(PsiError::BipartitionOverlap(v));
                }
            }
        }
        if let Some(v) = side.iter().position(Option::is_none) {
            return Err(PsiError::BipartitionIncomplete(v));
        }
        for &(u, v) in &pattern_edges {
            for w in [u, v] {
                if w >= k {
                    return Err(PsiError::PatternVertexOutOfRange { vertex: w, count: k });
                }
            }
            if u == v {
                return Err(PsiError::PatternLoop(u));
            }
            if side[u] == side[v] {
                return Err(PsiError::EdgeWithinClass(u, v));
            }
        }

        if host_classes.len() != k {
            return Err(PsiError::WrongClassCount { expected: k, found: host_classes.len() });
        }
        let host_count: usize = host_classes.iter().map(Vec::len).sum();
        let mut used = vec![false; host_count];
        for class in &host_classes {
            for &v in class {
                if v >= host_count {
                    return Err(PsiError::HostVertexOutOfRange { vertex: v, count: host_count });
                }
                if used[v] {
                    return Err(PsiError::HostVertexReused(v));
                }
                used[v] = true;
            }
        }
        let mut host_adjacency = HashSet::new();
        for &(u, v) in &host_edges {
            for w in [u, v] {
                if w >= host_count {
                    return Err(PsiError::HostVertexOutOfRange { vertex: w, count: host_count });
                }
            }
            if u == v {
                return Err(PsiError::HostLoop(u));
            }
            host_adjacency.insert((u.min(v), u.max(v)));
        }
        Ok(Self {
            pattern_vertices,
            pattern_edges,
            class_a,
            class_b,
            host_classes,
            host_edges,
            congestion,
            host_adjacency,
        })
    }

    pub fn pattern_vertices(&self) -> usize {
        self.pattern_vertices
    }

    pub fn pattern_edges(&self) -> &[(usize, usize)] {
        &self.pattern_edges
    }

    pub fn class_a(&self) -> &[usize] {
        &self.class_a
    }

    pub fn class_b(&self) -> &[usize] {
        &self.class_b
    }

    pub fn host_classes(&self) -> &[Vec<usize>] {
        &self.host_classes
    }

    pub fn host_edges(&self) -> &[(usize, usize)] {
        &self.host_edges
    }

    pub fn host_vertex_count(&self) -> usize {
        self.host_classes.iter().map(Vec::len).sum()
    }

    pub fn congestion(&self) -> usize {
        self.congestion
    }

    pub fn has_host_edge(&self, u: usize, v: usize) -> bool {
        self.host_adjacency.contains(&(u.min(v), u.max(v)))
    }

    /// True when `choice` has one in-range position per class and maps every
    /// pattern edge onto a host edge.
    pub fn is_embedding(&self, choice: &[usize]) -> bool {
        if choice.len() != self.pattern_vertices {
            return false;
        }
        if choice.iter().zip(&self.host_classes).any(|(&z, class)| z >= class.len()) {
            return false;
        }
        self.pattern_edges.iter().all(|&(i, j)| {
            self.has_host_edge(self.host_classes[i][choice[i]], self.host_classes[j][choice[j]])
        })
    }
}

/// One host vertex per pattern vertex, stored as positions into the class
/// lists: pattern vertex `i` maps to `host_classes[i][choice[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub choice: Vec<usize>,
}

/// What the embedding oracle found and how much work it did.
#[derive(Debug, Clone)]
pub struct PsiOutcome {
    pub embedding: Option<Embedding>,
    /// Number of choice tuples tested.
    pub tuples_explored: u64,
}

/// Finds an embedding by exhausting choice tuples, with default caps.
pub fn brute_force_psi(psi: &PsiInstance) -> Result<Option<Embedding>, OracleError> {
    brute_force_psi_with(psi, OracleCaps::default()).map(|o| o.embedding)
}

/// Tests every tuple of per-class positions in lexicographic order (last
/// coordinate fastest) and returns the first valid embedding. Errors when
/// the product of class sizes exceeds the cap; an empty class means there is
/// nothing to try and the answer is NO.
pub fn brute_force_psi_with(
    psi: &PsiInstance,
    caps: OracleCaps,
) -> Result<PsiOutcome, OracleError> {
    let cap = caps.max_embedding_tuples;
    let sizes: Vec<usize> = psi.host_classes().iter().map(Vec::len).collect();
    let tuples = sizes.iter().fold(1u64, |acc, &s| acc.saturating_mul(s as u64));
    if tuples > cap {
        return Err(OracleError::EmbeddingCapExceeded { cap });
    }
    if sizes.iter().any(|&s| s == 0) {
        return Ok(PsiOutcome { embedding: None, tuples_explored: 0 });
    }
    let k = psi.pattern_vertices();
    let mut choice = vec![0usize; k];
    let mut explored = 0u64;
    loop {
        explored += 1;
        if psi.is_embedding(&choice) {
            return Ok(PsiOutcome {
                embedding: Some(Embedding { choice }),
                tuples_explored: explored,
            });
        }
        // Advance the odometer, last coordinate fastest.
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(PsiOutcome { embedding: None, tuples_explored: explored });
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < sizes[pos] {
                break;
            }
            choice[pos] = 0;
        }
    }
}
