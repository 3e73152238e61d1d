use std::collections::{BTreeSet, VecDeque};

use num_traits::{Signed, Zero};

use crate::graph::ArcFlow;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct MinCut {
    pub value: Rational,
    /// Sink side of a minimum cut: contains the sink, not the source.
    pub sink_side: BTreeSet<usize>,
}

/// Maximum `source`-`sink` flow under `capacities`, with a minimum cut.
///
/// Shortest augmenting paths (Edmonds–Karp) in exact arithmetic. The cut is
/// the set of nodes the source cannot reach in the final residual graph;
/// its incoming capacity equals the flow value.
pub fn max_flow_min_cut(capacities: &ArcFlow, source: usize, sink: usize) -> MinCut {
    assert_ne!(source, sink, "max-flow endpoints must differ");
    let n = capacities.n();
    // Residual capacities on a dense matrix; n is at most a few dozen.
    let mut residual: Vec<Vec<Rational>> = vec![vec![Rational::zero(); n]; n];
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for ((u, v), c) in capacities.iter() {
        residual[u][v] += c;
        adj[u].insert(v);
        adj[v].insert(u);
    }
    let adj: Vec<Vec<usize>> = adj.into_iter().map(|s| s.into_iter().collect()).collect();
    let mut value = Rational::zero();
    loop {
        let parent = bfs(&residual, &adj, source);
        if parent[sink].is_none() {
            let sink_side = (0..n)
                .filter(|&v| v != source && parent[v].is_none())
                .collect();
            return MinCut { value, sink_side };
        }
        let mut bottleneck: Option<Rational> = None;
        let mut v = sink;
        while v != source {
            let u = parent[v].expect("on path");
            let r = &residual[u][v];
            if bottleneck.as_ref().is_none_or(|b| r < b) {
                bottleneck = Some(r.clone());
            }
            v = u;
        }
        let b = bottleneck.expect("non-empty path");
        let mut v = sink;
        while v != source {
            let u = parent[v].expect("on path");
            residual[u][v] -= &b;
            residual[v][u] += &b;
            v = u;
        }
        value += b;
    }
}

fn bfs(residual: &[Vec<Rational>], adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let n = residual.len();
    let mut parent = vec![None; n];
    parent[source] = Some(source);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if parent[v].is_none() && residual[u][v].is_positive() {
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    parent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn single_arc() {
        let cap = ArcFlow::from_arcs(2, [((0, 1), ratio(3, 4))]);
        let cut = max_flow_min_cut(&cap, 0, 1);
        assert_eq!(cut.value, ratio(3, 4));
        assert_eq!(cut.sink_side, BTreeSet::from([1]));
    }

    #[test]
    fn two_parallel_routes() {
        let cap = ArcFlow::from_arcs(
            4,
            [
                ((0, 1), ratio(1, 2)),
                ((1, 3), ratio(1, 2)),
                ((0, 2), ratio(1, 2)),
                ((2, 3), ratio(1, 2)),
            ],
        );
        assert_eq!(max_flow_min_cut(&cap, 0, 3).value, int(1));
    }

    #[test]
    fn disconnected_sink() {
        let cap = ArcFlow::from_arcs(3, [((0, 1), int(1))]);
        let cut = max_flow_min_cut(&cap, 0, 2);
        assert_eq!(cut.value, int(0));
        assert_eq!(cut.sink_side, BTreeSet::from([2]));
    }

    #[test]
    fn needs_reverse_residual_arc() {
        // Classic instance where a greedy path must be undone.
        let cap = ArcFlow::from_arcs(
            4,
            [
                ((0, 1), int(1)),
                ((0, 2), int(1)),
                ((1, 2), int(1)),
                ((1, 3), int(1)),
                ((2, 3), int(1)),
            ],
        );
        let cut = max_flow_min_cut(&cap, 0, 3);
        assert_eq!(cut.value, int(2));
    }
}
