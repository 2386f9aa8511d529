//! Routing with a vertex congestion bound, by reduction to vertex-disjoint
//! paths in a layered product graph.
//!
//! The product holds `c` copies of every original vertex plus one fresh
//! source and sink per demand. Each original edge `(u, v)` becomes the full
//! bundle of `c * c` copy-to-copy edges, so a path may switch layers at every
//! step; demand `i`'s fresh source feeds all `c` copies of its source vertex
//! and all `c` copies of its target vertex feed the fresh sink. Disjoint
//! paths between the fresh terminals then correspond exactly to routings in
//! which no original vertex carries more than `c` paths: distinct paths
//! through the same original vertex must use distinct copies. Fresh
//! terminals keep the demands apart even when the demand list repeats a pair
//! or a demand starts at its own target.
//!
//! On top of the product solver sits a second strategy for bounds of the
//! form `c = k - d`: when `k > 3d` it suffices to check whether some subset
//! of exactly `3d` demands can be routed with congestion `2d` — the other
//! demands can each follow any path at all, since `k - 3d` extra paths can
//! add at most `k - 3d` to any vertex. Subsets are enumerated in
//! lexicographic order, optionally on several workers.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::disjoint::{
    solve_vertex_disjoint_with, SearchOutcome, SolveError, DEFAULT_MAX_STATES,
};
use crate::graph::{
    check_routing, Demand, Digraph, GraphError, Instance, Path, RoutingViolation, RoutingWitness,
};

/// Errors from building products and running the congestion solvers.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum CongestionError {
    #[error("congestion bound must be at least 1")]
    ZeroCongestion,
    #[error("offset {d} leaves no congestion budget for {k} demands")]
    OffsetOutOfRange { d: usize, k: usize },
    #[error("demand ({source}, {target}) admits no path")]
    Unreachable { source: usize, target: usize },
    #[error("number of demand subsets exceeds the enumerable range")]
    SubsetSpaceExhausted,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Search(#[from] SolveError),
}

/// Why a product witness could not be projected back.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionError {
    #[error("product witness has {found} paths, expected {expected}")]
    LengthMismatch { found: usize, expected: usize },
    #[error("product witness rejected: {0}")]
    Rejected(RoutingViolation),
    #[error("path {index} must run fresh source, vertex copies, fresh sink")]
    MalformedTerminals { index: usize },
    #[error("projected path {index} repeats original vertex {vertex}")]
    NotSimple { index: usize, vertex: usize },
}

/// What a product-graph vertex stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductVertexRole {
    /// Copy of `original` in the given layer.
    Copy { original: usize, layer: usize },
    /// Fresh source terminal of demand `i`.
    Source(usize),
    /// Fresh sink terminal of demand `i`.
    Sink(usize),
}

/// The layered product of a routing question, set up so that vertex-disjoint
/// paths between the fresh terminals are exactly the congestion-`c` routings
/// of the original instance.
///
/// Vertex numbering is layer-major: copy `(v, layer)` is `layer * n + v`,
/// followed by the `k` fresh sources in demand order, then the `k` fresh
/// sinks. With `m` original edges the product has exactly `c * n + 2 * k`
/// vertices and `c^2 * m + 2 * k * c` edges.
#[derive(Debug, Clone)]
pub struct ProductInstance {
    instance: Instance,
    roles: Vec<ProductVertexRole>,
    original_vertices: usize,
    layers: usize,
}

impl ProductInstance {
    pub fn graph(&self) -> &Digraph {
        self.instance.graph()
    }

    /// One demand per original demand, between its fresh terminals.
    pub fn demands(&self) -> &[Demand] {
        self.instance.demands()
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn role(&self, product_vertex: usize) -> ProductVertexRole {
        self.roles[product_vertex]
    }

    /// Layer of a copy vertex, `None` for fresh terminals.
    pub fn layer_of(&self, product_vertex: usize) -> Option<usize> {
        match self.roles[product_vertex] {
            ProductVertexRole::Copy { layer, .. } => Some(layer),
            _ => None,
        }
    }

    pub fn copy_id(&self, original: usize, layer: usize) -> usize {
        debug_assert!(original < self.original_vertices && layer < self.layers);
        layer * self.original_vertices + original
    }

    pub fn source_id(&self, demand: usize) -> usize {
        self.layers * self.original_vertices + demand
    }

    pub fn sink_id(&self, demand: usize) -> usize {
        self.layers * self.original_vertices + self.demands().len() + demand
    }
}

/// Builds the layered product for `g`, `demands` and congestion `c >= 1`.
///
/// Demand endpoints must be in range; beyond that no structure is assumed,
/// so duplicate demands and `source == target` demands are fine.
pub fn build_product(
    g: &Digraph,
    demands: &[Demand],
    c: usize,
) -> Result<ProductInstance, CongestionError> {
    if c < 1 {
        return Err(CongestionError::ZeroCongestion);
    }
    for d in demands {
        g.check_vertex(d.source)?;
        g.check_vertex(d.target)?;
    }
    let n = g.num_vertices();
    let k = demands.len();
    let copy = |v: usize, layer: usize| layer * n + v;
    let source_id = |i: usize| c * n + i;
    let sink_id = |i: usize| c * n + k + i;

    let mut edges = Vec::with_capacity(c * c * g.edges().len() + 2 * k * c);
    for &(u, v) in g.edges() {
        for a in 0..c {
            for b in 0..c {
                edges.push((copy(u, a), copy(v, b)));
            }
        }
    }
    for (i, d) in demands.iter().enumerate() {
        for a in 0..c {
            edges.push((source_id(i), copy(d.source, a)));
        }
    }
    for (i, d) in demands.iter().enumerate() {
        for a in 0..c {
            edges.push((copy(d.target, a), sink_id(i)));
        }
    }

    let mut roles = Vec::with_capacity(c * n + 2 * k);
    for layer in 0..c {
        for original in 0..n {
            roles.push(ProductVertexRole::Copy { original, layer });
        }
    }
    roles.extend((0..k).map(ProductVertexRole::Source));
    roles.extend((0..k).map(ProductVertexRole::Sink));

    let product_graph = Digraph::new(c * n + 2 * k, edges)?;
    let product_demands: Vec<Demand> =
        (0..k).map(|i| Demand::new(source_id(i), sink_id(i))).collect();
    // Congestion 1 turns the instance into the disjoint-paths question the
    // product encodes, and lets the projection reuse the routing checker.
    let instance = Instance::new(product_graph, product_demands, 1)?;
    Ok(ProductInstance { instance, roles, original_vertices: n, layers: c })
}

/// Maps a family of vertex-disjoint product paths back to original paths.
///
/// The witness is first checked to be a valid disjoint routing of the
/// product demands; each path then sheds its fresh terminals and every copy
/// collapses to its original vertex. Projected paths are checked to be
/// simple — a repeat could only arise from a directed cycle in the original
/// graph, which the solvers exclude up front.
pub fn project_witness(
    p: &ProductInstance,
    w: &RoutingWitness,
) -> Result<RoutingWitness, ProjectionError> {
    let verdict = check_routing(&p.instance, w).map_err(|e| match e {
        GraphError::WitnessLengthMismatch { found, expected } => {
            ProjectionError::LengthMismatch { found, expected }
        }
        _ => unreachable!("length mismatch is the only checker error"),
    })?;
    if let crate::graph::RoutingVerdict::Reject(violation) = verdict {
        return Err(ProjectionError::Rejected(violation));
    }

    let mut projected = Vec::with_capacity(w.paths.len());
    for (index, path) in w.paths.iter().enumerate() {
        let vs = path.vertices();
        // Endpoint checks above pin vs[0] and vs[last] to the terminals.
        if vs.len() < 3 {
            return Err(ProjectionError::MalformedTerminals { index });
        }
        let mut originals = Vec::with_capacity(vs.len() - 2);
        for &pv in &vs[1..vs.len() - 1] {
            match p.role(pv) {
                ProductVertexRole::Copy { original, .. } => originals.push(original),
                _ => return Err(ProjectionError::MalformedTerminals { index }),
            }
        }
        let mut seen = vec![false; p.original_vertices];
        for &v in &originals {
            if seen[v] {
                return Err(ProjectionError::NotSimple { index, vertex: v });
            }
            seen[v] = true;
        }
        projected.push(Path::new(originals).expect("nonempty and just checked simple"));
    }
    Ok(RoutingWitness::new(projected))
}

/// Decides congestion-`c` routing with the default state budget.
pub fn solve_congestion(
    g: &Digraph,
    demands: &[Demand],
    c: usize,
) -> Result<Option<RoutingWitness>, CongestionError> {
    solve_congestion_with(g, demands, c, DEFAULT_MAX_STATES).map(|o| o.witness)
}

/// Decides whether all demands can be routed in `g` with at most `c` paths
/// through any vertex, via disjoint paths in the layered product.
///
/// Requires an acyclic graph and `c >= 1`. Demands whose target is not
/// reachable settle the answer to NO before any product is built. A YES
/// witness is aligned with the demand list and always passes the routing
/// checker.
pub fn solve_congestion_with(
    g: &Digraph,
    demands: &[Demand],
    c: usize,
    max_states: u64,
) -> Result<SearchOutcome, CongestionError> {
    if c < 1 {
        return Err(CongestionError::ZeroCongestion);
    }
    g.topological_order()?;
    for d in demands {
        g.check_vertex(d.source)?;
        g.check_vertex(d.target)?;
    }
    for d in demands {
        if !g.reachable_mask(d.source)[d.target] {
            return Ok(SearchOutcome { witness: None, states_visited: 0 });
        }
    }
    let product = build_product(g, demands, c)?;
    let outcome = solve_vertex_disjoint_with(product.graph(), product.demands(), max_states)?;
    let witness = outcome.witness.map(|w| {
        project_witness(&product, &w).expect("disjoint product witnesses project cleanly")
    });
    if let Some(w) = &witness {
        debug_assert!({
            let inst = Instance::new(g.clone(), demands.to_vec(), c).expect("inputs validated");
            check_routing(&inst, w).expect("aligned witness").is_accept()
        });
    }
    Ok(SearchOutcome { witness, states_visited: outcome.states_visited })
}

/// Deterministic shortest path for one demand: breadth-first search with
/// ascending neighbour order, so ties always fall to the smaller vertex. A
/// demand from a vertex to itself yields the single-vertex path. Errors when
/// the target is unreachable.
pub fn fallback_path(g: &Digraph, demand: Demand) -> Result<Path, CongestionError> {
    g.check_vertex(demand.source)?;
    g.check_vertex(demand.target)?;
    if demand.source == demand.target {
        return Ok(Path::single(demand.source));
    }
    let mut pred = vec![usize::MAX; g.num_vertices()];
    pred[demand.source] = demand.source;
    let mut queue = VecDeque::from([demand.source]);
    'search: while let Some(v) = queue.pop_front() {
        for &w in g.successors(v) {
            if pred[w] == usize::MAX {
                pred[w] = v;
                if w == demand.target {
                    break 'search;
                }
                queue.push_back(w);
            }
        }
    }
    if pred[demand.target] == usize::MAX {
        return Err(CongestionError::Unreachable {
            source: demand.source,
            target: demand.target,
        });
    }
    let mut vs = vec![demand.target];
    while *vs.last().expect("nonempty") != demand.source {
        vs.push(pred[*vs.last().expect("nonempty")]);
    }
    vs.reverse();
    Ok(Path::new(vs).expect("predecessor chains are simple"))
}

/// How subset enumeration should run.
#[derive(Debug, Clone, Copy)]
pub struct SubsetConfig {
    /// State budget handed to every inner disjoint-paths search.
    pub max_states: u64,
    /// Worker count for subset checks; 0 or 1 means sequential.
    pub threads: usize,
    /// With several workers, still report the witness of the
    /// lexicographically first successful subset.
    pub deterministic: bool,
}

impl Default for SubsetConfig {
    fn default() -> Self {
        Self { max_states: DEFAULT_MAX_STATES, threads: 1, deterministic: true }
    }
}

/// Result of [`solve_high_congestion_with`] plus work counters.
#[derive(Debug, Clone)]
pub struct HighCongestionOutcome {
    pub witness: Option<RoutingWitness>,
    /// Token states stored across all inner searches. Not reproducible when
    /// subsets race on several workers.
    pub states_visited: u64,
    /// Subsets examined; in deterministic mode this counts the
    /// lexicographic prefix up to and including the successful subset.
    pub subsets_tried: u64,
}

/// Decides congestion-`(k - d)` routing sequentially with default budgets.
pub fn solve_high_congestion(
    g: &Digraph,
    demands: &[Demand],
    d: usize,
) -> Result<Option<RoutingWitness>, CongestionError> {
    solve_high_congestion_with(g, demands, d, SubsetConfig::default()).map(|o| o.witness)
}

/// Decides whether the `k` demands can be routed with congestion `k - d`.
///
/// The offset must satisfy `d <= k - 1` so the bound stays positive —
/// except that `k = 0, d = 0` is the trivially satisfiable empty instance.
/// Steps: any unroutable demand means NO; `d = 0` is a YES with one
/// fallback path per demand; for `k <= 3 * d` the product solver is run
/// directly with `c = k - d`; otherwise subsets of exactly `3 * d` demands
/// are enumerated in lexicographic order and each is checked with
/// congestion `2 * d`. The first success routes the remaining demands along
/// fallback paths, which keeps every vertex within
/// `2 * d + (k - 3 * d) = k - d`. If no subset works the answer is NO.
pub fn solve_high_congestion_with(
    g: &Digraph,
    demands: &[Demand],
    d: usize,
    config: SubsetConfig,
) -> Result<HighCongestionOutcome, CongestionError> {
    let k = demands.len();
    if k == 0 && d == 0 {
        return Ok(HighCongestionOutcome {
            witness: Some(RoutingWitness::default()),
            states_visited: 0,
            subsets_tried: 0,
        });
    }
    if d >= k {
        return Err(CongestionError::OffsetOutOfRange { d, k });
    }
    g.topological_order()?;
    for dem in demands {
        g.check_vertex(dem.source)?;
        g.check_vertex(dem.target)?;
    }
    for dem in demands {
        if !g.reachable_mask(dem.source)[dem.target] {
            return Ok(HighCongestionOutcome {
                witness: None,
                states_visited: 0,
                subsets_tried: 0,
            });
        }
    }

    let c = k - d;
    if d == 0 {
        // Any one path per demand stays within congestion k = c.
        let paths: Result<Vec<Path>, _> =
            demands.iter().map(|&dem| fallback_path(g, dem)).collect();
        return Ok(HighCongestionOutcome {
            witness: Some(RoutingWitness::new(paths?)),
            states_visited: 0,
            subsets_tried: 0,
        });
    }
    if k <= 3 * d {
        let outcome = solve_congestion_with(g, demands, c, config.max_states)?;
        return Ok(HighCongestionOutcome {
            witness: outcome.witness,
            states_visited: outcome.states_visited,
            subsets_tried: 0,
        });
    }

    let subset_size = 3 * d;
    let total = binomial(k as u64, subset_size as u64).ok_or(CongestionError::SubsetSpaceExhausted)?;
    let states = AtomicU64::new(0);
    let check_subset = |rank: u64| -> Option<Result<(u64, RoutingWitness), CongestionError>> {
        let subset = unrank_combination(k, subset_size, rank);
        let sub: Vec<Demand> = subset.iter().map(|&i| demands[i]).collect();
        match solve_congestion_with(g, &sub, 2 * d, config.max_states) {
            Err(e) => Some(Err(e)),
            Ok(outcome) => {
                states.fetch_add(outcome.states_visited, Ordering::Relaxed);
                outcome.witness.map(|w| Ok((rank, w)))
            }
        }
    };

    let found = if config.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .expect("worker pool");
        pool.install(|| {
            if config.deterministic {
                (0..total).into_par_iter().find_map_first(check_subset)
            } else {
                (0..total).into_par_iter().find_map_any(check_subset)
            }
        })
    } else {
        (0..total).find_map(check_subset)
    };

    match found {
        Some(Err(e)) => Err(e),
        Some(Ok((rank, sub_witness))) => {
            let subset = unrank_combination(k, subset_size, rank);
            let mut paths: Vec<Option<Path>> = vec![None; k];
            for (slot, path) in subset.iter().zip(sub_witness.paths) {
                paths[*slot] = Some(path);
            }
            for (slot, path) in paths.iter_mut().enumerate() {
                if path.is_none() {
                    *path = Some(fallback_path(g, demands[slot])?);
                }
            }
            let witness =
                RoutingWitness::new(paths.into_iter().map(|p| p.expect("all slots filled")).collect());
            debug_assert!({
                let inst =
                    Instance::new(g.clone(), demands.to_vec(), c).expect("inputs validated");
                check_routing(&inst, &witness).expect("aligned witness").is_accept()
            });
            Ok(HighCongestionOutcome {
                witness: Some(witness),
                states_visited: states.load(Ordering::Relaxed),
                subsets_tried: rank + 1,
            })
        }
        None => Ok(HighCongestionOutcome {
            witness: None,
            states_visited: states.load(Ordering::Relaxed),
            subsets_tried: total,
        }),
    }
}

/// Binomial coefficient, `None` once it leaves the `u64` range.
fn binomial(n: u64, r: u64) -> Option<u64> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // Exact at every step: after step i the accumulator is C(n, i + 1).
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// The `rank`-th (0-based) size-`r` subset of `0..k` in lexicographic order.
fn unrank_combination(k: usize, r: usize, mut rank: u64) -> Vec<usize> {
    let mut subset = Vec::with_capacity(r);
    let mut remaining = r;
    for v in 0..k {
        if remaining == 0 {
            break;
        }
        let with_v = binomial((k - v - 1) as u64, (remaining - 1) as u64)
            .expect("smaller than the already-checked total");
        if rank < with_v {
            subset.push(v);
            remaining -= 1;
        } else {
            rank -= with_v;
        }
    }
    debug_assert_eq!(subset.len(), r);
    subset
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{congestion_profile, PathViolation, RoutingVerdict};

    fn diamond() -> Digraph {
        Digraph::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn crossing_gadget() -> Digraph {
        Digraph::new(5, vec![(0, 2), (1, 2), (2, 3), (2, 4)]).unwrap()
    }

    fn single_edge() -> Digraph {
        Digraph::new(2, vec![(0, 1)]).unwrap()
    }

    fn demand_pairs(pairs: &[(usize, usize)]) -> Vec<Demand> {
        pairs.iter().map(|&(s, t)| Demand::new(s, t)).collect()
    }

    fn product_path(_p: &ProductInstance, vs: &[usize]) -> Path {
        Path::new(vs.to_vec()).unwrap()
    }

    #[test]
    fn product_has_exact_counts() {
        let g = crossing_gadget(); // n = 5, m = 4
        let demands = demand_pairs(&[(0, 3), (1, 4)]);
        let p = build_product(&g, &demands, 2).unwrap();
        assert_eq!(p.graph().num_vertices(), 2 * 5 + 2 * 2);
        assert_eq!(p.graph().edges().len(), 4 * 4 + 2 * 2 * 2);
        // Layer-major copies, then sources, then sinks.
        assert_eq!(p.role(0), ProductVertexRole::Copy { original: 0, layer: 0 });
        assert_eq!(p.role(7), ProductVertexRole::Copy { original: 2, layer: 1 });
        assert_eq!(p.role(10), ProductVertexRole::Source(0));
        assert_eq!(p.role(13), ProductVertexRole::Sink(1));
        assert_eq!(p.layer_of(7), Some(1));
        assert_eq!(p.layer_of(10), None);
        assert_eq!(p.demands(), &[Demand::new(10, 12), Demand::new(11, 13)]);
    }

    #[test]
    fn single_layer_product_mirrors_original_edges() {
        let g = crossing_gadget();
        let demands = demand_pairs(&[(0, 3)]);
        let p = build_product(&g, &demands, 1).unwrap();
        for &(u, v) in g.edges() {
            assert!(p.graph().has_edge(p.copy_id(u, 0), p.copy_id(v, 0)));
        }
        assert_eq!(p.graph().successors(p.source_id(0)), &[p.copy_id(0, 0)]);
        assert_eq!(p.graph().predecessors(p.sink_id(0)), &[p.copy_id(3, 0)]);
    }

    #[test]
    fn duplicate_demands_share_copy_attachments() {
        let g = diamond();
        let demands = demand_pairs(&[(0, 3), (0, 3)]);
        let p = build_product(&g, &demands, 2).unwrap();
        // Both fresh sources feed both copies of vertex 0.
        for i in 0..2 {
            assert_eq!(
                p.graph().successors(p.source_id(i)),
                &[p.copy_id(0, 0), p.copy_id(0, 1)]
            );
        }
    }

    #[test]
    fn product_rejects_zero_congestion() {
        assert_eq!(
            build_product(&diamond(), &[], 0).map(|_| ()),
            Err(CongestionError::ZeroCongestion)
        );
    }

    #[test]
    fn projection_erases_layers() {
        let g = diamond();
        let p = build_product(&g, &demand_pairs(&[(0, 3)]), 2).unwrap();
        // src, (0, layer 0), (2, layer 0), (3, layer 1), sink.
        let w = RoutingWitness::new(vec![product_path(
            &p,
            &[p.source_id(0), p.copy_id(0, 0), p.copy_id(2, 0), p.copy_id(3, 1), p.sink_id(0)],
        )]);
        let projected = project_witness(&p, &w).unwrap();
        assert_eq!(projected.paths[0].vertices(), &[0, 2, 3]);
    }

    #[test]
    fn projection_handles_zero_length_demands() {
        let g = diamond();
        let p = build_product(&g, &demand_pairs(&[(2, 2)]), 1).unwrap();
        let w = RoutingWitness::new(vec![product_path(
            &p,
            &[p.source_id(0), p.copy_id(2, 0), p.sink_id(0)],
        )]);
        let projected = project_witness(&p, &w).unwrap();
        assert_eq!(projected.paths[0].vertices(), &[2]);
    }

    #[test]
    fn projections_later_share_originals_up_to_congestion() {
        let g = diamond();
        let p = build_product(&g, &demand_pairs(&[(0, 3), (0, 3)]), 2).unwrap();
        let w = RoutingWitness::new(vec![
            product_path(
                &p,
                &[p.source_id(0), p.copy_id(0, 0), p.copy_id(1, 0), p.copy_id(3, 0), p.sink_id(0)],
            ),
            product_path(
                &p,
                &[p.source_id(1), p.copy_id(0, 1), p.copy_id(1, 1), p.copy_id(3, 1), p.sink_id(1)],
            ),
        ]);
        let projected = project_witness(&p, &w).unwrap();
        assert_eq!(projected.paths[0].vertices(), &[0, 1, 3]);
        assert_eq!(projected.paths[1].vertices(), &[0, 1, 3]);
        let profile = congestion_profile(&g, &projected.paths).unwrap();
        assert_eq!(profile.max(), 2);
    }

    #[test]
    fn projection_rejects_overlapping_product_paths() {
        let g = diamond();
        let p = build_product(&g, &demand_pairs(&[(0, 3), (0, 3)]), 2).unwrap();
        let shared = product_path(
            &p,
            &[p.source_id(0), p.copy_id(0, 0), p.copy_id(1, 0), p.copy_id(3, 0), p.sink_id(0)],
        );
        let clash = product_path(
            &p,
            &[p.source_id(1), p.copy_id(0, 0), p.copy_id(1, 1), p.copy_id(3, 1), p.sink_id(1)],
        );
        let err = project_witness(&p, &RoutingWitness::new(vec![shared, clash])).unwrap_err();
        assert_eq!(
            err,
            ProjectionError::Rejected(RoutingViolation::Congestion {
                vertex: p.copy_id(0, 0),
                count: 2,
                bound: 1
            })
        );
    }

    #[test]
    fn projection_rejects_wrong_endpoints() {
        let g = diamond();
        let p = build_product(&g, &demand_pairs(&[(0, 3)]), 1).unwrap();
        let w = RoutingWitness::new(vec![product_path(
            &p,
            &[p.copy_id(0, 0), p.copy_id(1, 0), p.copy_id(3, 0)],
        )]);
        assert_eq!(
            project_witness(&p, &w).unwrap_err(),
            ProjectionError::Rejected(RoutingViolation::Path {
                index: 0,
                violation: PathViolation::WrongSource { expected: p.source_id(0), found: 0 }
            })
        );
    }

    #[test]
    fn congestion_two_resolves_the_crossing_gadget() {
        let g = crossing_gadget();
        let demands = demand_pairs(&[(0, 3), (1, 4)]);
        assert!(solve_congestion(&g, &demands, 1).unwrap().is_none());
        let w = solve_congestion(&g, &demands, 2).unwrap().unwrap();
        let inst = Instance::new(g, demands, 2).unwrap();
        assert_eq!(check_routing(&inst, &w).unwrap(), RoutingVerdict::Accept);
    }

    #[test]
    fn four_copies_of_an_edge_need_congestion_four() {
        let demands = demand_pairs(&[(0, 1); 4]);
        assert!(solve_congestion(&single_edge(), &demands, 3).unwrap().is_none());
        let w = solve_congestion(&single_edge(), &demands, 4).unwrap().unwrap();
        for path in &w.paths {
            assert_eq!(path.vertices(), &[0, 1]);
        }
    }

    #[test]
    fn unreachable_demand_short_circuits() {
        let outcome =
            solve_congestion_with(&single_edge(), &demand_pairs(&[(1, 0)]), 3, DEFAULT_MAX_STATES)
                .unwrap();
        assert!(outcome.witness.is_none());
        assert_eq!(outcome.states_visited, 0);
    }

    #[test]
    fn fallback_prefers_small_vertices() {
        assert_eq!(
            fallback_path(&diamond(), Demand::new(0, 3)).unwrap().vertices(),
            &[0, 1, 3]
        );
        assert_eq!(fallback_path(&diamond(), Demand::new(2, 2)).unwrap().vertices(), &[2]);
        assert_eq!(
            fallback_path(&diamond(), Demand::new(3, 0)),
            Err(CongestionError::Unreachable { source: 3, target: 0 })
        );
    }

    #[test]
    fn offset_zero_routes_everything_greedily() {
        let g = crossing_gadget();
        let demands = demand_pairs(&[(0, 3), (1, 4)]);
        let outcome =
            solve_high_congestion_with(&g, &demands, 0, SubsetConfig::default()).unwrap();
        let w = outcome.witness.unwrap();
        assert_eq!(w.paths[0].vertices(), &[0, 2, 3]);
        assert_eq!(w.paths[1].vertices(), &[1, 2, 4]);
        let inst = Instance::new(g, demands, 2).unwrap();
        assert_eq!(check_routing(&inst, &w).unwrap(), RoutingVerdict::Accept);
    }

    #[test]
    fn small_demand_count_goes_straight_to_the_product() {
        // k = 2 <= 3d for d = 1, target congestion 1: the crossing gadget
        // stays infeasible.
        let g = crossing_gadget();
        let outcome = solve_high_congestion_with(
            &g,
            &demand_pairs(&[(0, 3), (1, 4)]),
            1,
            SubsetConfig::default(),
        )
        .unwrap();
        assert!(outcome.witness.is_none());
        assert_eq!(outcome.subsets_tried, 0);
    }

    #[test]
    fn subset_enumeration_exhausts_all_candidates_on_no() {
        // Four copies of the only edge, d = 1: every 3-subset needs
        // congestion 2 but forces 3 paths through vertex 0.
        let demands = demand_pairs(&[(0, 1); 4]);
        let outcome =
            solve_high_congestion_with(&single_edge(), &demands, 1, SubsetConfig::default())
                .unwrap();
        assert!(outcome.witness.is_none());
        assert_eq!(outcome.subsets_tried, 4);
        // Matches the direct product solver at c = k - d = 3.
        assert!(solve_congestion(&single_edge(), &demands, 3).unwrap().is_none());
    }

    #[test]
    fn first_successful_subset_is_padded_with_fallbacks() {
        // Two independent edges, four demands, d = 1: the very first
        // 3-subset routes with congestion 2, the leftover demand follows its
        // fallback path, and the whole witness stays within c = 3.
        let g = Digraph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let demands = demand_pairs(&[(0, 1), (2, 3), (0, 1), (2, 3)]);
        let outcome =
            solve_high_congestion_with(&g, &demands, 1, SubsetConfig::default()).unwrap();
        let w = outcome.witness.unwrap();
        assert_eq!(outcome.subsets_tried, 1);
        let inst = Instance::new(g, demands, 3).unwrap();
        assert_eq!(check_routing(&inst, &w).unwrap(), RoutingVerdict::Accept);
    }

    #[test]
    fn offset_must_leave_budget() {
        assert_eq!(
            solve_high_congestion(&single_edge(), &demand_pairs(&[(0, 1)]), 1).map(|_| ()),
            Err(CongestionError::OffsetOutOfRange { d: 1, k: 1 })
        );
        // Empty instance with d = 0 is trivially YES.
        let w = solve_high_congestion(&single_edge(), &[], 0).unwrap().unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn subsets_enumerate_in_lexicographic_order() {
        let total = binomial(5, 3).unwrap();
        assert_eq!(total, 10);
        let all: Vec<Vec<usize>> = (0..total).map(|r| unrank_combination(5, 3, r)).collect();
        let mut expected = Vec::new();
        for a in 0..5 {
            for b in (a + 1)..5 {
                for c in (b + 1)..5 {
                    expected.push(vec![a, b, c]);
                }
            }
        }
        assert_eq!(all, expected);
        assert_eq!(binomial(64, 32), Some(1_832_624_140_942_590_534));
        assert_eq!(binomial(128, 64), None);
    }

    #[test]
    fn parallel_subset_checks_agree_with_sequential() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..25 {
            let n = rng.gen_range(4..=7usize);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(0.5) {
                        edges.push((perm[i], perm[j]));
                    }
                }
            }
            let g = Digraph::new(n, edges).unwrap();
            let k = rng.gen_range(4..=6usize);
            let demands: Vec<Demand> = (0..k)
                .map(|_| Demand::new(rng.gen_range(0..n), rng.gen_range(0..n)))
                .collect();
            let sequential =
                solve_high_congestion_with(&g, &demands, 1, SubsetConfig::default()).unwrap();
            let parallel = solve_high_congestion_with(
                &g,
                &demands,
                1,
                SubsetConfig { threads: 4, ..SubsetConfig::default() },
            )
            .unwrap();
            assert_eq!(sequential.witness, parallel.witness);
        }
    }

    #[test]
    fn raising_the_bound_preserves_yes() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for _ in 0..60 {
            let n = rng.gen_range(3..=8usize);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(0.4) {
                        edges.push((perm[i], perm[j]));
                    }
                }
            }
            let g = Digraph::new(n, edges).unwrap();
            let k = rng.gen_range(1..=4usize);
            let demands: Vec<Demand> = (0..k)
                .map(|_| Demand::new(rng.gen_range(0..n), rng.gen_range(0..n)))
                .collect();
            let c = rng.gen_range(1..=3usize);
            if solve_congestion(&g, &demands, c).unwrap().is_some() {
                assert!(solve_congestion(&g, &demands, c + 1).unwrap().is_some());
            }
        }
    }

    #[test]
    fn congestion_one_with_distinct_endpoints_equals_disjoint_search() {
        use crate::disjoint::solve_vertex_disjoint;
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(47);
        for _ in 0..80 {
            let n = rng.gen_range(4..=9usize);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(0.4) {
                        edges.push((perm[i], perm[j]));
                    }
                }
            }
            let g = Digraph::new(n, edges).unwrap();
            let mut vertices: Vec<usize> = (0..n).collect();
            vertices.shuffle(&mut rng);
            let k = rng.gen_range(1..=3usize).min(n / 2);
            let demands: Vec<Demand> =
                vertices.chunks_exact(2).take(k).map(|ch| Demand::new(ch[0], ch[1])).collect();
            let direct = solve_vertex_disjoint(&g, &demands).unwrap().is_some();
            let via_product = solve_congestion(&g, &demands, 1).unwrap().is_some();
            assert_eq!(direct, via_product);
        }
    }
}
