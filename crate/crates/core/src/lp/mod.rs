//! Exact linear programming and the cutting-plane drivers built on it.

mod alpha;
mod float;
mod latency;
mod lu;
mod model;
mod simplex;
mod solver;
mod standard;

pub use alpha::{
    build_lp_alpha, min_cut_value, most_violated_cuts, round_cap, solve_lp_alpha,
    solve_lp_alpha_detailed, AlphaLp, ArcVars,
};
pub use latency::{
    build_latency_lp, build_latency_lp_with, normalize_latencies, solve_latency_lp,
    solve_latency_lp_with, violated_set_constraints, LatencyLpIndex, LatencyLpOptions,
    LatencyLpSolution,
};
pub use model::{Cmp, Constraint, LpModel, LpSolution, LpStatus};
pub use simplex::{tableau_solve, Simplex, SimplexStats};
pub use solver::{simplex_solve, LpSolver, SolverStats};
