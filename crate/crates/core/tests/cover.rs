mod common;

use std::collections::BTreeSet;

use atspp::cover::{
    check_lp_alpha_point, min_k_path_cycle_cover, min_path_cycle_cover, round_alpha_point,
};
use atspp::graph::ArcFlow;
use atspp::lp::solve_lp_alpha;
use atspp::metric::{gen_random, induced_subinstance, MetricInstance};
use atspp::rational::{int, ratio, Rational};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random target set containing both endpoints.
fn random_target(inst: &MetricInstance, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mid = inst.interior();
    mid.shuffle(&mut rng);
    let keep = rng.random_range(1..=mid.len().max(1)).min(mid.len());
    let mut w: Vec<usize> = mid[..keep].to_vec();
    w.extend([inst.s, inst.t]);
    w.sort();
    w
}

/// Checks that `paths` and `cycles` partition `w`.
fn assert_partition(
    inst: &MetricInstance,
    w: &[usize],
    paths: &[Vec<usize>],
    cycles: &[Vec<usize>],
) {
    let mut seen = BTreeSet::new();
    for p in paths {
        assert_eq!(p.first(), Some(&inst.s));
        assert_eq!(p.last(), Some(&inst.t));
        for &v in &p[1..p.len() - 1] {
            assert!(seen.insert(v), "node {v} covered twice");
        }
    }
    for c in cycles {
        assert!(c.len() >= 2, "self-loop cycle {c:?}");
        for &v in c {
            assert!(v != inst.s && v != inst.t);
            assert!(seen.insert(v), "node {v} covered twice");
        }
    }
    let mid: BTreeSet<usize> = w
        .iter()
        .copied()
        .filter(|&v| v != inst.s && v != inst.t)
        .collect();
    assert_eq!(seen, mid);
}

#[test]
fn covers_match_brute_force() {
    for seed in 0..25 {
        let n = 3 + seed as usize % 5;
        let inst = gen_random(n, seed, 50).unwrap();
        let w = random_target(&inst, seed);
        for k in 1..=3 {
            let c = min_k_path_cycle_cover(&inst, &w, k).unwrap();
            assert_eq!(c.paths.len(), k);
            assert_partition(&inst, &w, &c.paths, &c.cycles);
            let walk_cost: Rational = c.paths.iter().map(|p| inst.walk_cost(p)).sum::<Rational>()
                + c.cycles
                    .iter()
                    .map(|cy| {
                        let mut closed = cy.clone();
                        closed.push(cy[0]);
                        inst.walk_cost(&closed)
                    })
                    .sum::<Rational>();
            assert_eq!(c.cost, walk_cost, "seed {seed} k {k}");
            assert_eq!(
                c.cost,
                common::brute_k_cover(&inst, &w, k),
                "seed {seed} k {k}"
            );
        }
        let one = min_path_cycle_cover(&inst, &w).unwrap();
        assert_eq!(one.cost, common::brute_k_cover(&inst, &w, 1));
    }
}

#[test]
fn bad_targets_rejected() {
    let inst = gen_random(5, 1, 10).unwrap();
    assert!(min_path_cycle_cover(&inst, &[0, 1, 2]).is_err());
    assert!(min_path_cycle_cover(&inst, &[0, 4, 4]).is_err());
    assert!(min_path_cycle_cover(&inst, &[0, 4, 9]).is_err());
    assert!(min_k_path_cycle_cover(&inst, &[0, 4], 0).is_err());
}

#[test]
fn cover_is_below_the_lp_of_its_target() {
    for seed in 0..15 {
        let inst = gen_random(4 + seed as usize % 4, seed, 50).unwrap();
        let w = random_target(&inst, seed + 7);
        let (sub, _) = induced_subinstance(&inst, &w, inst.s, inst.t).unwrap();
        let cover = min_path_cycle_cover(&inst, &w).unwrap();
        let (lp1, _) = solve_lp_alpha(&sub, &int(1)).unwrap();
        assert!(cover.cost <= lp1, "seed {seed}");
        for k in [2i64, 3] {
            let c = min_k_path_cycle_cover(&inst, &w, k as usize).unwrap();
            let (lpk, _) = solve_lp_alpha(&sub, &ratio(1, k)).unwrap();
            assert!(c.cost <= int(k) * lpk, "seed {seed} k {k}");
        }
    }
}

/// LP(α) optimum on the sub-instance induced by `w`, in original indices.
fn lp_point(inst: &MetricInstance, w: &[usize], alpha: &Rational) -> ArcFlow {
    let (sub, map) = induced_subinstance(inst, w, inst.s, inst.t).unwrap();
    let (_, x) = solve_lp_alpha(&sub, alpha).unwrap();
    ArcFlow::from_arcs(
        inst.n,
        x.iter().map(|((u, v), a)| ((map[u], map[v]), a.clone())),
    )
}

#[test]
fn rounding_certificates_hold() {
    for seed in 0..10 {
        let inst = gen_random(4 + seed as usize % 4, seed, 50).unwrap();
        let w = random_target(&inst, seed + 100);
        for alpha in [ratio(2, 3), ratio(9, 10), int(1)] {
            let x = lp_point(&inst, &w, &alpha);
            check_lp_alpha_point(&inst, &w, &x, &alpha).unwrap();
            let cert = round_alpha_point(&inst, &w, &x, &alpha).unwrap();
            assert_eq!(cert.gamma, ratio(1, 3) + (int(3) * &alpha).recip());
            assert_eq!(cert.input_cost, x.cost(&inst));
            assert!(cert.cost <= cert.bound);
            assert_eq!(cert.cost, cert.x_tilde.cost(&inst));
            common::cover_lp_feasible(&inst, &w, &cert.x_tilde).unwrap();
            assert_eq!(cert.path.first(), Some(&inst.s));
            assert_eq!(cert.path.last(), Some(&inst.t));
            // An integral cover never beats the fractional one it came from.
            assert!(min_path_cycle_cover(&inst, &w).unwrap().cost <= cert.cost);
        }
    }
}

#[test]
fn rounding_rejects_bad_input() {
    let inst = gen_random(5, 2, 30).unwrap();
    let w: Vec<usize> = (0..5).collect();
    let x = lp_point(&inst, &w, &int(1));
    assert!(round_alpha_point(&inst, &w, &x, &ratio(1, 2)).is_err());
    assert!(round_alpha_point(&inst, &w, &x, &ratio(3, 2)).is_err());
    let half = lp_point(&inst, &w, &ratio(1, 2));
    if check_lp_alpha_point(&inst, &w, &half, &int(1)).is_err() {
        assert!(round_alpha_point(&inst, &w, &half, &int(1)).is_err());
    }
    let direct = ArcFlow::from_walk(5, &[inst.s, inst.t], &int(1));
    assert!(check_lp_alpha_point(&inst, &w, &direct, &int(1)).is_err());
}
