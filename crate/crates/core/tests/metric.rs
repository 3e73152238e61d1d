#![allow(clippy::needless_range_loop)]

mod common;

use atspp::error::Error;
use atspp::graph::ArcFlow;
use atspp::metric::{
    bad_gap_fractional_point, gen_bad_gap, gen_random, induced_subinstance, metric_closure,
    unit_metric, validate, MetricInstance, Violation, BAD_GAP_UNIT_ARCS,
};
use atspp::rational::{int, Rational};
use num_traits::{One, Zero};
use proptest::prelude::*;

#[test]
fn two_nodes_validate() {
    let inst = MetricInstance::from_integers(&[vec![0, 1], vec![1, 0]], 0, 1).unwrap();
    assert!(validate(&inst).unwrap().ok);
}

#[test]
fn triangle_violation_found() {
    let inst = MetricInstance::from_integers(&[vec![0, 1, 5], vec![1, 0, 1], vec![1, 1, 0]], 0, 2)
        .unwrap();
    let r = validate(&inst).unwrap();
    assert!(!r.ok);
    assert!(r
        .violations
        .contains(&Violation::Triangle { u: 0, v: 1, w: 2 }));
}

#[test]
fn malformed_matrix_is_structural() {
    let d = vec![vec![int(0), int(1)], vec![int(1)]];
    assert!(matches!(
        MetricInstance::new(d, 0, 1),
        Err(Error::Structural(_))
    ));
    assert!(MetricInstance::from_integers(&[vec![0, 1], vec![1, 0]], 1, 1).is_err());
}

#[test]
fn closure_takes_shortest_route() {
    let arcs = vec![
        (0, 1, int(1)),
        (1, 2, int(1)),
        (0, 2, int(5)),
        (2, 0, int(1)),
        (1, 0, int(3)),
        (2, 1, int(4)),
    ];
    let inst = metric_closure(3, &arcs, 0, 2).unwrap();
    assert_eq!(inst.d[0][2], int(2));
    assert_eq!(inst.d[1][0], int(2));
    assert!(validate(&inst).unwrap().ok);
}

#[test]
fn closure_of_complete_unit_digraph() {
    let n = 5;
    let arcs: Vec<_> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v, int(1))))
        .collect();
    let inst = metric_closure(n, &arcs, 0, 4).unwrap();
    assert_eq!(inst, unit_metric(n, 0, 4).unwrap());
}

#[test]
fn closure_reports_unreachable() {
    let err = metric_closure(3, &[(0, 1, int(1)), (1, 2, int(1))], 0, 2).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)));
}

/// All-pairs shortest paths by relaxing every arc `n` times.
fn relaxed(n: usize, arcs: &[(usize, usize, Rational)]) -> Vec<Vec<Option<Rational>>> {
    let mut d = vec![vec![None; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = Some(Rational::zero());
    }
    for _ in 0..n {
        for src in 0..n {
            for (u, v, w) in arcs {
                if let Some(du) = d[src][*u].clone() {
                    let cand = du + w;
                    if d[src][*v].as_ref().is_none_or(|cur| cand < *cur) {
                        d[src][*v] = Some(cand);
                    }
                }
            }
        }
    }
    d
}

#[test]
fn bad_gap_is_the_closure_of_its_digraph() {
    let big = 1000;
    let inst = gen_bad_gap(big).unwrap();
    let unit: Vec<(usize, usize)> = BAD_GAP_UNIT_ARCS.to_vec();
    let arcs: Vec<_> = (0..6)
        .flat_map(|u| (0..6).filter(move |&v| v != u).map(move |v| (u, v)))
        .map(|(u, v)| {
            (
                u,
                v,
                if unit.contains(&(u, v)) {
                    int(1)
                } else {
                    int(big as i64)
                },
            )
        })
        .collect();
    let d = relaxed(6, &arcs);
    for u in 0..6 {
        for v in 0..6 {
            assert_eq!(Some(inst.d[u][v].clone()), d[u][v]);
        }
    }
    assert!(validate(&inst).unwrap().ok);
    assert_eq!((inst.s, inst.t), (0, 5));
}

#[test]
fn bad_gap_fractional_point_is_half_feasible_with_value_five() {
    let inst = gen_bad_gap(1000).unwrap();
    let x = ArcFlow::from_arcs(6, bad_gap_fractional_point());
    assert_eq!(x.cost(&inst), int(5));
    assert_eq!(x.out_flow(0), Rational::one());
    assert_eq!(x.in_flow(5), Rational::one());
    assert!(x.in_flow(0).is_zero() && x.out_flow(5).is_zero());
    for v in 1..5 {
        assert_eq!(x.in_flow(v), x.out_flow(v));
    }
    let all: Vec<usize> = (0..6).collect();
    assert_eq!(
        common::brute_min_cut(&x, &all, 0),
        atspp::rational::ratio(1, 2)
    );
}

#[test]
fn bad_gap_every_path_costs_at_least_d() {
    assert!(common::brute_atspp(&gen_bad_gap(1000).unwrap()) >= int(1000));
    assert!(gen_bad_gap(9).is_err());
}

#[test]
fn generator_is_deterministic_and_in_range() {
    let a = gen_random(2, 7, 10).unwrap();
    assert!(a.d[0][1] >= int(1) && a.d[0][1] <= int(10));
    assert_eq!(a, gen_random(2, 7, 10).unwrap());
    assert!(validate(&gen_random(8, 1, 100).unwrap()).unwrap().ok);
    assert!(matches!(gen_random(1, 0, 10), Err(Error::Argument(_))));
}

#[test]
fn induced_subinstance_examples() {
    let inst = gen_random(6, 4, 30).unwrap();
    let all: Vec<usize> = (0..6).collect();
    let (same, map) = induced_subinstance(&inst, &all, 0, 5).unwrap();
    assert_eq!(same, inst);
    assert_eq!(map, all);
    let (pair, map) = induced_subinstance(&inst, &[0, 5], 0, 5).unwrap();
    assert_eq!(pair.n, 2);
    assert_eq!(pair.d[0][1], inst.d[0][5]);
    assert_eq!(map, vec![0, 5]);
    assert!(induced_subinstance(&inst, &[0, 2], 0, 5).is_err());
    assert!(induced_subinstance(&inst, &[0, 2], 2, 2).is_err());
}

#[test]
fn json_round_trip() {
    let inst = gen_random(5, 3, 20)
        .unwrap()
        .with_weights(vec![int(1), int(2), int(3), int(4), int(5)])
        .unwrap();
    let back = MetricInstance::from_json(&inst.to_json()).unwrap();
    assert_eq!(back, inst);
    let text = r#"{"n":2,"s":0,"t":1,"d":[[0,"3/2"],[1,0]]}"#;
    let parsed = MetricInstance::from_json(text).unwrap();
    assert_eq!(parsed.d[0][1], atspp::rational::ratio(3, 2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generated_instances_are_metric(n in 2usize..12, seed in any::<u64>(), max in 1u64..200) {
        let inst = gen_random(n, seed, max).unwrap();
        prop_assert!(validate(&inst).unwrap().ok);
        for u in 0..n {
            for v in 0..n {
                prop_assert!(u == v || inst.d[u][v] > Rational::zero());
            }
        }
    }

    #[test]
    fn restrictions_stay_metric(seed in any::<u64>(), mask in 0u32..256) {
        let inst = gen_random(10, seed, 100).unwrap();
        let mut nodes: Vec<usize> = (1..9).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        nodes.extend([0, 9]);
        let (sub, map) = induced_subinstance(&inst, &nodes, 0, 9).unwrap();
        prop_assert!(validate(&sub).unwrap().ok);
        for a in 0..sub.n {
            for b in 0..sub.n {
                prop_assert_eq!(&sub.d[a][b], &inst.d[map[a]][map[b]]);
            }
        }
    }
}
