//! Exact routing of demand pairs through acyclic digraphs under a vertex
//! congestion bound, together with the brute-force oracles and adversarial
//! instance generators used to validate the solvers.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] — digraphs over dense vertex indices, demands, paths,
//!   congestion profiles, and the routing checker.
//! * [`disjoint`] — exact search for pairwise vertex-disjoint paths on DAGs.
//! * [`congestion`] — reduction of congestion-`c` routing to disjoint paths
//!   in a layered product graph, plus the subset-enumeration solver for
//!   congestion `k - d`.
//! * [`oracle`] — exhaustive reference solvers (simple-path enumeration,
//!   brute-force routing, brute-force partitioned subgraph embedding).
//! * [`hardness`] — generator translating partitioned subgraph isomorphism
//!   instances into routing instances, with witness converters both ways.

pub mod congestion;
pub mod disjoint;
pub mod graph;
pub mod hardness;
pub mod oracle;

pub use graph::{
    check_routing, congestion_profile, CongestionProfile, Demand, Digraph, GraphError, Instance,
    Path, PathViolation, RoutingVerdict, RoutingViolation, RoutingWitness,
};
