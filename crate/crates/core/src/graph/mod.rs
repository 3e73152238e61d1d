//! Exact combinatorial primitives shared by the solvers.

mod bipartite;
mod flow;
mod matching;
mod maxflow;
mod walk;

pub use bipartite::max_bipartite_matching;
pub use flow::{decompose_flow, ArcFlow, Decomposition, WeightedPath};
pub use matching::{min_cost_perfect_matching, Matching};
pub use maxflow::{max_flow_min_cut, MinCut};
pub use walk::{euler_tour, reachability, shortcut, topological_order, undirected_components};
