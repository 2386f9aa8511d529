//! Exact search for pairwise vertex-disjoint paths on a DAG.
//!
//! One token per demand starts on its source. From any state exactly one
//! token may advance one edge: the unfinished token whose current vertex is
//! earliest in topological order. That scheduling rule is what makes "tokens
//! never share a vertex at the same moment" equivalent to "the traced paths
//! are pairwise vertex-disjoint": when a token leaves a vertex, every other
//! unfinished token already sits strictly later in topological order and can
//! never step back to the vacated vertex. Conversely, tokens walking along
//! any family of disjoint paths are never blocked, so the breadth-first
//! search over token states decides the question exactly.
//!
//! Tokens are further confined to their corridor — the vertices reachable
//! from their source that can still reach their target — which prunes states
//! without affecting the answer.

use std::collections::VecDeque;

use indexmap::IndexSet;
use thiserror::Error;

use crate::graph::{Demand, Digraph, Path, RoutingWitness};

/// Default bound on stored search states before giving up.
pub const DEFAULT_MAX_STATES: u64 = 100_000_000;

/// Errors from [`solve_vertex_disjoint`]. Running out of state budget is
/// deliberately distinct from a NO answer.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SolveError {
    #[error("input graph has a directed cycle")]
    Cyclic,
    #[error("endpoint {vertex} out of range for {num_vertices} vertices")]
    EndpointOutOfRange { vertex: usize, num_vertices: usize },
    #[error("demand endpoints must be pairwise distinct, vertex {0} repeats")]
    SharedEndpoint(usize),
    #[error("search budget of {limit} states exhausted")]
    StatesExhausted { limit: u64 },
}

/// Result of a disjoint-paths search plus how much work it took.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// `Some` holds one path per demand, aligned with the demand list.
    pub witness: Option<RoutingWitness>,
    /// Distinct token states stored by the search.
    pub states_visited: u64,
}

/// Predecessor bookkeeping for the token-state search: for every stored
/// state, the state it was first reached from, the token that moved and the
/// vertex it stepped to. Enough to rebuild one path per token afterwards.
pub struct SearchTrace {
    states: IndexSet<Box<[u32]>>,
    parents: Vec<Option<(u32, u16, u32)>>,
}

impl SearchTrace {
    fn new() -> Self {
        Self { states: IndexSet::new(), parents: Vec::new() }
    }

    fn len(&self) -> u64 {
        self.states.len() as u64
    }

    fn state(&self, id: u32) -> &[u32] {
        self.states.get_index(id as usize).expect("state ids are dense")
    }

    fn parent_of(&self, id: u32) -> Option<(u32, u16, u32)> {
        self.parents[id as usize]
    }

    /// Stores a state unless already present; errors once `limit` states are
    /// held and another would be needed.
    fn insert(
        &mut self,
        state: Box<[u32]>,
        parent: Option<(u32, u16, u32)>,
        limit: u64,
    ) -> Result<Option<u32>, SolveError> {
        if self.states.contains(&state) {
            return Ok(None);
        }
        if self.len() >= limit {
            return Err(SolveError::StatesExhausted { limit });
        }
        let (index, fresh) = self.states.insert_full(state);
        debug_assert!(fresh);
        self.parents.push(parent);
        Ok(Some(index as u32))
    }
}

/// Finds pairwise vertex-disjoint paths linking every demand, with the
/// default state budget. See [`solve_vertex_disjoint_with`].
pub fn solve_vertex_disjoint(
    g: &Digraph,
    demands: &[Demand],
) -> Result<Option<RoutingWitness>, SolveError> {
    solve_vertex_disjoint_with(g, demands, DEFAULT_MAX_STATES).map(|o| o.witness)
}

/// Finds pairwise vertex-disjoint paths linking every demand.
///
/// Requires an acyclic graph and pairwise distinct endpoints across all
/// demands (so in particular `source != target` everywhere). An empty demand
/// list is trivially YES. The search is breadth-first by number of token
/// moves with successors tried in ascending vertex order, so the returned
/// witness is a deterministic function of the input.
pub fn solve_vertex_disjoint_with(
    g: &Digraph,
    demands: &[Demand],
    max_states: u64,
) -> Result<SearchOutcome, SolveError> {
    let order = g.topological_order().map_err(|_| SolveError::Cyclic)?;
    let n = g.num_vertices();
    let mut endpoint_seen = vec![false; n];
    for d in demands {
        for v in [d.source, d.target] {
            if v >= n {
                return Err(SolveError::EndpointOutOfRange { vertex: v, num_vertices: n });
            }
            if endpoint_seen[v] {
                return Err(SolveError::SharedEndpoint(v));
            }
            endpoint_seen[v] = true;
        }
    }

    let k = demands.len();
    if k == 0 {
        return Ok(SearchOutcome { witness: Some(RoutingWitness::default()), states_visited: 0 });
    }

    let mut topo_pos = vec![0u32; n];
    for (i, &v) in order.iter().enumerate() {
        topo_pos[v] = i as u32;
    }

    // Token i may only ever stand on vertices reachable from its source that
    // still reach its target. An empty corridor settles the answer outright.
    let mut corridors: Vec<Vec<bool>> = Vec::with_capacity(k);
    for d in demands {
        let reach = g.reachable_mask(d.source);
        if !reach[d.target] {
            return Ok(SearchOutcome { witness: None, states_visited: 0 });
        }
        let coreach = g.coreachable_mask(d.target);
        corridors.push((0..n).map(|v| reach[v] && coreach[v]).collect());
    }

    let start: Box<[u32]> = demands.iter().map(|d| d.source as u32).collect();
    let goal: Vec<u32> = demands.iter().map(|d| d.target as u32).collect();

    let mut trace = SearchTrace::new();
    // Distinct endpoints rule out start == goal for k >= 1.
    let root = trace
        .insert(start, None, max_states)?
        .expect("fresh trace accepts the root");
    let mut queue = VecDeque::from([root]);

    while let Some(id) = queue.pop_front() {
        let state = trace.state(id).to_vec();
        let mover = (0..k)
            .filter(|&i| state[i] != goal[i])
            .min_by_key(|&i| topo_pos[state[i] as usize])
            .expect("goal states are never enqueued");
        for &next in g.successors(state[mover] as usize) {
            if !corridors[mover][next] || state.iter().any(|&p| p as usize == next) {
                continue;
            }
            let mut child = state.clone();
            child[mover] = next as u32;
            if child == goal {
                let witness = reconstruct(&trace, id, (mover as u16, next as u32), demands);
                debug_assert!(states_within_corridor_bound(&trace, &corridors));
                return Ok(SearchOutcome {
                    witness: Some(witness),
                    states_visited: trace.len(),
                });
            }
            let parent = Some((id, mover as u16, next as u32));
            if let Some(fresh) = trace.insert(child.into_boxed_slice(), parent, max_states)? {
                queue.push_back(fresh);
            }
        }
    }

    debug_assert!(states_within_corridor_bound(&trace, &corridors));
    Ok(SearchOutcome { witness: None, states_visited: trace.len() })
}

/// Rebuilds one path per token by walking the predecessor chain back from the
/// state preceding the goal, then appending the final move.
fn reconstruct(
    trace: &SearchTrace,
    last_interior: u32,
    final_move: (u16, u32),
    demands: &[Demand],
) -> RoutingWitness {
    let mut rev_moves = vec![final_move];
    let mut cursor = last_interior;
    while let Some((parent, token, to)) = trace.parent_of(cursor) {
        rev_moves.push((token, to));
        cursor = parent;
    }
    let mut paths: Vec<Vec<usize>> = demands.iter().map(|d| vec![d.source]).collect();
    for (token, to) in rev_moves.into_iter().rev() {
        paths[token as usize].push(to as usize);
    }
    RoutingWitness::new(
        paths
            .into_iter()
            .map(|vs| Path::new(vs).expect("tokens move strictly forward, paths are simple"))
            .collect(),
    )
}

/// The visited-state count can never exceed the product of corridor sizes.
fn states_within_corridor_bound(trace: &SearchTrace, corridors: &[Vec<bool>]) -> bool {
    let bound = corridors
        .iter()
        .map(|c| c.iter().filter(|&&b| b).count() as u128)
        .fold(1u128, |acc, s| acc.saturating_mul(s));
    u128::from(trace.len()) <= bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{check_routing, Instance, RoutingVerdict};

    fn demand_pairs(pairs: &[(usize, usize)]) -> Vec<Demand> {
        pairs.iter().map(|&(s, t)| Demand::new(s, t)).collect()
    }

    fn vertex_lists(w: &RoutingWitness) -> Vec<Vec<usize>> {
        w.paths.iter().map(|p| p.vertices().to_vec()).collect()
    }

    #[test]
    fn routes_single_demand_through_diamond() {
        let g = Digraph::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let w = solve_vertex_disjoint(&g, &demand_pairs(&[(0, 3)])).unwrap().unwrap();
        // Both branches work; breadth-first search with ascending successors
        // settles on the lower-numbered one.
        assert_eq!(vertex_lists(&w), vec![vec![0, 1, 3]]);
    }

    #[test]
    fn crossing_gadget_has_no_disjoint_pair() {
        // Two demands forced through the single middle vertex.
        let g = Digraph::new(5, vec![(0, 2), (1, 2), (2, 3), (2, 4)]).unwrap();
        let outcome =
            solve_vertex_disjoint_with(&g, &demand_pairs(&[(0, 3), (1, 4)]), DEFAULT_MAX_STATES)
                .unwrap();
        assert!(outcome.witness.is_none());
        assert!(outcome.states_visited <= 4);
    }

    #[test]
    fn parallel_lanes_route_disjointly() {
        let g = Digraph::new(6, vec![(0, 2), (2, 4), (1, 3), (3, 5)]).unwrap();
        let demands = demand_pairs(&[(0, 4), (1, 5)]);
        let w = solve_vertex_disjoint(&g, &demands).unwrap().unwrap();
        assert_eq!(vertex_lists(&w), vec![vec![0, 2, 4], vec![1, 3, 5]]);
        let inst = Instance::new(g, demands, 1).unwrap();
        assert_eq!(check_routing(&inst, &w).unwrap(), RoutingVerdict::Accept);
    }

    #[test]
    fn empty_demand_list_is_trivially_yes() {
        let g = Digraph::new(3, vec![(0, 1)]).unwrap();
        let w = solve_vertex_disjoint(&g, &[]).unwrap().unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn unreachable_target_is_no_without_search() {
        let g = Digraph::new(3, vec![(0, 1)]).unwrap();
        let outcome =
            solve_vertex_disjoint_with(&g, &demand_pairs(&[(1, 2)]), DEFAULT_MAX_STATES).unwrap();
        assert!(outcome.witness.is_none());
        assert_eq!(outcome.states_visited, 0);
    }

    #[test]
    fn rejects_shared_and_out_of_range_endpoints() {
        let g = Digraph::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(
            solve_vertex_disjoint(&g, &demand_pairs(&[(0, 2), (2, 3)])),
            Err(SolveError::SharedEndpoint(2))
        );
        assert_eq!(
            solve_vertex_disjoint(&g, &demand_pairs(&[(1, 1)])),
            Err(SolveError::SharedEndpoint(1))
        );
        assert_eq!(
            solve_vertex_disjoint(&g, &demand_pairs(&[(0, 7)])),
            Err(SolveError::EndpointOutOfRange { vertex: 7, num_vertices: 4 })
        );
    }

    #[test]
    fn rejects_cyclic_graphs() {
        let g = Digraph::new(2, vec![(0, 1), (1, 0)]).unwrap();
        assert_eq!(
            solve_vertex_disjoint(&g, &demand_pairs(&[(0, 1)])),
            Err(SolveError::Cyclic)
        );
    }

    #[test]
    fn tiny_state_budget_is_a_distinct_error() {
        let g = Digraph::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(
            solve_vertex_disjoint_with(&g, &demand_pairs(&[(0, 3)]), 1).map(|_| ()),
            Err(SolveError::StatesExhausted { limit: 1 })
        );
    }

    /// Random DAG on `n` vertices: forward edges under a random permutation.
    fn random_dag(rng: &mut impl rand::Rng, n: usize, density: f64) -> Digraph {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(density) {
                    edges.push((perm[i], perm[j]));
                }
            }
        }
        Digraph::new(n, edges).unwrap()
    }

    /// Up to `k` demands over distinct endpoints.
    fn random_distinct_demands(rng: &mut impl rand::Rng, n: usize, k: usize) -> Vec<Demand> {
        use rand::seq::SliceRandom;
        let mut vertices: Vec<usize> = (0..n).collect();
        vertices.shuffle(rng);
        vertices
            .chunks_exact(2)
            .take(k)
            .map(|c| Demand::new(c[0], c[1]))
            .collect()
    }

    #[test]
    fn answer_is_invariant_under_relabelling() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..120 {
            let n = rng.gen_range(2..=9);
            let g = random_dag(&mut rng, n, 0.35);
            let k = rng.gen_range(1..=3);
            let demands = random_distinct_demands(&mut rng, n, k);
            let answer = solve_vertex_disjoint(&g, &demands).unwrap().is_some();

            let mut relabel: Vec<usize> = (0..n).collect();
            relabel.shuffle(&mut rng);
            let edges: Vec<_> =
                g.edges().iter().map(|&(u, v)| (relabel[u], relabel[v])).collect();
            let g2 = Digraph::new(n, edges).unwrap();
            let demands2: Vec<_> = demands
                .iter()
                .map(|d| Demand::new(relabel[d.source], relabel[d.target]))
                .collect();
            let answer2 = solve_vertex_disjoint(&g2, &demands2).unwrap().is_some();
            assert_eq!(answer, answer2);
        }
    }

    #[test]
    fn adding_edges_never_destroys_a_yes() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let mut yes_seen = 0;
        for _ in 0..200 {
            let n = rng.gen_range(4..=9);
            let g = random_dag(&mut rng, n, 0.55);
            let k = rng.gen_range(1..=3);
            let demands = random_distinct_demands(&mut rng, n, k);
            if solve_vertex_disjoint(&g, &demands).unwrap().is_none() {
                continue;
            }
            yes_seen += 1;
            // Extend with a fresh forward edge w.r.t. the topological order.
            let order = g.topological_order().unwrap();
            let i = rng.gen_range(0..n - 1);
            let j = rng.gen_range(i + 1..n);
            let mut edges = g.edges().to_vec();
            edges.push((order[i], order[j]));
            let g2 = Digraph::new(n, edges).unwrap();
            assert!(solve_vertex_disjoint(&g2, &demands).unwrap().is_some());
        }
        assert!(yes_seen > 20, "corpus should contain solvable instances");
    }

    #[test]
    fn witnesses_pass_the_checker() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        for _ in 0..150 {
            let n = rng.gen_range(2..=9);
            let g = random_dag(&mut rng, n, 0.4);
            let k = rng.gen_range(1..=3);
            let demands = random_distinct_demands(&mut rng, n, k);
            if let Some(w) = solve_vertex_disjoint(&g, &demands).unwrap() {
                let inst = Instance::new(g, demands, 1).unwrap();
                assert_eq!(check_routing(&inst, &w).unwrap(), RoutingVerdict::Accept);
            }
        }
    }
}
