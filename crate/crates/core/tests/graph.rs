#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::{BTreeMap, BTreeSet};

use atspp::graph::{
    decompose_flow, euler_tour, max_bipartite_matching, max_flow_min_cut,
    min_cost_perfect_matching, reachability, shortcut, topological_order, undirected_components,
    ArcFlow,
};
use atspp::rational::{int, Rational};
use itertools::Itertools;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full(m: &[Vec<i64>]) -> Vec<Vec<Option<Rational>>> {
    m.iter()
        .map(|r| r.iter().map(|&c| Some(int(c))).collect())
        .collect()
}

#[test]
fn matching_examples() {
    assert_eq!(
        min_cost_perfect_matching(&full(&[vec![1, 2], vec![2, 1]]))
            .unwrap()
            .cost,
        int(2)
    );
    assert_eq!(
        min_cost_perfect_matching(&full(&[vec![0]])).unwrap().cost,
        int(0)
    );
    let blocked = vec![vec![None, Some(int(1))], vec![None, Some(int(1))]];
    assert!(min_cost_perfect_matching(&blocked).is_err());
}

#[test]
fn euler_tour_uses_every_arc_once() {
    let arcs = vec![(0, 1), (1, 2), (2, 0), (0, 3), (3, 0), (1, 2), (2, 1)];
    let tour = euler_tour(&arcs, 0).unwrap();
    assert_eq!(tour.len(), arcs.len());
    assert_eq!(tour[0].0, 0);
    for w in tour.windows(2) {
        assert_eq!(w[0].1, w[1].0);
    }
    assert_eq!(tour.last().unwrap().1, 0);
    let mut a = arcs.clone();
    let mut b = tour.clone();
    a.sort();
    b.sort();
    assert_eq!(a, b);
    assert!(euler_tour(&[(0, 1)], 0).is_err());
}

#[test]
fn topological_order_and_cycles() {
    let order = topological_order(&[0, 1, 2, 3], &[(2, 1), (1, 3), (0, 2)]).unwrap();
    assert_eq!(order, vec![0, 2, 1, 3]);
    assert!(topological_order(&[0, 1, 2], &[(0, 1), (1, 2), (2, 0)]).is_err());
}

#[test]
fn shortcut_keeps_first_visits() {
    assert_eq!(shortcut(&[0, 1, 2, 1, 3, 0, 4]), vec![0, 1, 2, 3, 4]);
}

#[test]
fn components_of_support() {
    assert_eq!(
        undirected_components(&[(3, 4), (0, 1), (1, 0), (5, 4)]),
        vec![vec![0, 1], vec![3, 4, 5]]
    );
}

fn random_caps(n: usize, seed: u64) -> ArcFlow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = ArcFlow::new(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(0.5) {
                f.add(
                    u,
                    v,
                    &Rational::new(
                        rng.random_range(1..10).into(),
                        rng.random_range(1..4).into(),
                    ),
                );
            }
        }
    }
    f
}

fn brute_cut(f: &ArcFlow, n: usize, src: usize, sink: usize) -> Rational {
    let others: Vec<usize> = (0..n).filter(|&v| v != src && v != sink).collect();
    let mut best: Option<Rational> = None;
    for mask in 0u32..(1 << others.len()) {
        let mut side: BTreeSet<usize> = others
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        side.insert(sink);
        let c: Rational = f
            .iter()
            .filter(|((u, v), _)| !side.contains(u) && side.contains(v))
            .map(|(_, a)| a.clone())
            .sum();
        if best.as_ref().is_none_or(|b| c < *b) {
            best = Some(c);
        }
    }
    best.unwrap()
}

/// Random flow: unit paths from `s` to `t` plus cycles, with rational amounts.
fn random_flow(n: usize, seed: u64) -> ArcFlow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = ArcFlow::new(n);
    for _ in 0..rng.random_range(1..4) {
        let mut mid: Vec<usize> = (1..n - 1).filter(|_| rng.random_bool(0.5)).collect();
        mid.sort_by_key(|_| rng.random::<u8>());
        let mut p = vec![0];
        p.extend(mid);
        p.push(n - 1);
        f.add_walk(
            &p,
            &Rational::new(rng.random_range(1..5).into(), rng.random_range(1..3).into()),
        );
    }
    for _ in 0..rng.random_range(0..3) {
        let mut c: Vec<usize> = (1..n - 1).filter(|_| rng.random_bool(0.5)).collect();
        if c.len() >= 2 {
            c.push(c[0]);
            f.add_walk(&c, &Rational::new(rng.random_range(1..5).into(), 2.into()));
        }
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matching_equals_permutation_search(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<Vec<i64>> = (0..6).map(|_| (0..6).map(|_| rng.random_range(0..50)).collect()).collect();
        let best = (0..6).permutations(6).map(|p| p.iter().enumerate().map(|(r, &c)| m[r][c]).sum::<i64>()).min().unwrap();
        let got = min_cost_perfect_matching(&full(&m)).unwrap();
        prop_assert_eq!(&got.cost, &int(best));
        let sum: i64 = got.assignment.iter().enumerate().map(|(r, &c)| m[r][c]).sum();
        prop_assert_eq!(int(sum), got.cost);
    }

    #[test]
    fn max_flow_equals_min_cut(n in 2usize..7, seed in any::<u64>()) {
        let caps = random_caps(n, seed);
        let cut = max_flow_min_cut(&caps, 0, n - 1);
        prop_assert_eq!(&cut.value, &brute_cut(&caps, n, 0, n - 1));
        prop_assert!(cut.sink_side.contains(&(n - 1)) && !cut.sink_side.contains(&0));
        let into: Rational = caps.iter().filter(|((u, v), _)| !cut.sink_side.contains(u) && cut.sink_side.contains(v)).map(|(_, a)| a.clone()).sum();
        prop_assert_eq!(into, cut.value);
    }

    #[test]
    fn decomposition_reproduces_flow(n in 3usize..8, seed in any::<u64>()) {
        let f = random_flow(n, seed);
        let dec = decompose_flow(&f, 0, n - 1).unwrap();
        prop_assert_eq!(dec.recompose(n), f);
        let arcs: Vec<(usize, usize)> = dec.paths.iter().flat_map(|p| p.arcs(false)).collect();
        let nodes: Vec<usize> = (0..n).collect();
        prop_assert!(topological_order(&nodes, &arcs).is_ok());
        for p in &dec.paths {
            prop_assert_eq!(p.nodes[0], 0);
            prop_assert_eq!(*p.nodes.last().unwrap(), n - 1);
            prop_assert!(p.amount > Rational::zero());
        }
    }

    #[test]
    fn bipartite_matching_is_maximum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (nx, ny) = (rng.random_range(1..6), rng.random_range(1..6));
        let adj: Vec<Vec<usize>> = (0..nx).map(|_| (0..ny).filter(|_| rng.random_bool(0.4)).collect()).collect();
        let m = max_bipartite_matching(&adj, ny);
        let size = m.iter().flatten().count();
        let used: BTreeSet<usize> = m.iter().flatten().copied().collect();
        prop_assert_eq!(used.len(), size);
        for (x, y) in m.iter().enumerate() {
            if let Some(y) = y {
                prop_assert!(adj[x].contains(y));
            }
        }
        // Largest k such that some k rows have distinct neighbours.
        let brute = (0..=nx.min(ny)).rev().find(|&k| {
            (0..nx).combinations(k).any(|rows| {
                (0..ny).permutations(k).any(|cols| rows.iter().zip(&cols).all(|(x, c)| adj[*x].contains(c)))
            })
        }).unwrap();
        prop_assert_eq!(size, brute);
    }

    #[test]
    fn reachability_matches_search(n in 2usize..9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arcs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.random_bool(0.3)).collect();
        let r = reachability(n, &arcs).unwrap();
        let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(u, v) in &arcs {
            succ.entry(u).or_default().push(v);
        }
        for u in 0..n {
            let mut seen = BTreeSet::new();
            let mut stack = succ.get(&u).cloned().unwrap_or_default();
            while let Some(v) = stack.pop() {
                if seen.insert(v) {
                    stack.extend(succ.get(&v).cloned().unwrap_or_default());
                }
            }
            for v in 0..n {
                prop_assert_eq!(r[u][v], seen.contains(&v));
            }
        }
    }
}
