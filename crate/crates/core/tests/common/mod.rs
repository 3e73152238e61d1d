//! Independent brute-force references shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use atspp::graph::ArcFlow;
use atspp::metric::MetricInstance;
use atspp::rational::Rational;
use itertools::Itertools;
use num_traits::{One, Zero};

/// Interior nodes of `inst`, ascending.
pub fn interior(inst: &MetricInstance) -> Vec<usize> {
    (0..inst.n)
        .filter(|&v| v != inst.s && v != inst.t)
        .collect()
}

fn with_ends(inst: &MetricInstance, mid: &[usize]) -> Vec<usize> {
    let mut p = vec![inst.s];
    p.extend_from_slice(mid);
    p.push(inst.t);
    p
}

fn walk_len(inst: &MetricInstance, p: &[usize]) -> Rational {
    p.windows(2).map(|w| inst.d[w[0]][w[1]].clone()).sum()
}

fn weighted_latency(inst: &MetricInstance, p: &[usize]) -> Rational {
    let mut acc = Rational::zero();
    let mut total = Rational::zero();
    for w in p.windows(2) {
        acc += &inst.d[w[0]][w[1]];
        let c = inst
            .weights
            .as_ref()
            .map_or_else(Rational::one, |c| c[w[1]].clone());
        total += c * &acc;
    }
    total
}

/// Cheapest Hamiltonian path over every ordering of the interior.
pub fn brute_atspp(inst: &MetricInstance) -> Rational {
    let mid = interior(inst);
    mid.iter()
        .copied()
        .permutations(mid.len())
        .map(|p| walk_len(inst, &with_ends(inst, &p)))
        .min()
        .expect("at least one ordering")
}

/// Smallest total (weighted) latency over every ordering of the interior.
pub fn brute_latency(inst: &MetricInstance) -> Rational {
    let mid = interior(inst);
    mid.iter()
        .copied()
        .permutations(mid.len())
        .map(|p| weighted_latency(inst, &with_ends(inst, &p)))
        .min()
        .expect("at least one ordering")
}

/// `k` paths, unused ones priced as `[s, t]`: every labelling of interior
/// nodes by path, every ordering within each path.
pub fn brute_k_person(inst: &MetricInstance, k: usize) -> Rational {
    let mid = interior(inst);
    let mut best: Option<Rational> = None;
    for labels in (0..mid.len())
        .map(|_| 0..k)
        .multi_cartesian_product()
        .chain(
            // multi_cartesian_product yields nothing for an empty product.
            std::iter::once(Vec::new()).filter(|_| mid.is_empty()),
        )
    {
        let mut total = Rational::zero();
        for path in 0..k {
            let group: Vec<usize> = mid
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == path)
                .map(|(&v, _)| v)
                .collect();
            total += group
                .iter()
                .copied()
                .permutations(group.len())
                .map(|p| walk_len(inst, &with_ends(inst, &p)))
                .min()
                .expect("one ordering");
        }
        if best.as_ref().is_none_or(|b| total < *b) {
            best = Some(total);
        }
    }
    best.expect("some labelling")
}

/// Minimum over successor bijections: `k` copies of `s` and the interior
/// nodes of `w` send one arc each into the interior or one of `k` copies of
/// `t`, never to themselves. Such a map is exactly a k-path-cycle cover.
pub fn brute_k_cover(inst: &MetricInstance, w: &[usize], k: usize) -> Rational {
    let mid: Vec<usize> = w
        .iter()
        .copied()
        .filter(|&v| v != inst.s && v != inst.t)
        .collect();
    let rows: Vec<usize> = std::iter::repeat_n(inst.s, k)
        .chain(mid.iter().copied())
        .collect();
    let cols: Vec<usize> = mid
        .iter()
        .copied()
        .chain(std::iter::repeat_n(inst.t, k))
        .collect();
    (0..cols.len())
        .permutations(cols.len())
        .filter(|p| {
            p.iter()
                .enumerate()
                .all(|(r, &c)| r < k || rows[r] != cols[c])
        })
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(r, &c)| inst.d[rows[r]][cols[c]].clone())
                .sum::<Rational>()
        })
        .min()
        .expect("a cover exists")
}

/// Minimum incoming weight over all node sets avoiding `s` inside `nodes`.
pub fn brute_min_cut(x: &ArcFlow, nodes: &[usize], s: usize) -> Rational {
    let others: Vec<usize> = nodes.iter().copied().filter(|&v| v != s).collect();
    let mut best: Option<Rational> = None;
    for mask in 1u32..(1 << others.len()) {
        let set: BTreeSet<usize> = others
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        let into: Rational = x
            .iter()
            .filter(|((u, v), _)| !set.contains(u) && set.contains(v))
            .map(|(_, a)| a.clone())
            .sum();
        if best.as_ref().is_none_or(|b| into < *b) {
            best = Some(into);
        }
    }
    best.unwrap_or_default()
}

/// Feasibility for the degree-only cover relaxation on `w`: balance and
/// inflow at least 1 at interior nodes, one unit out of `s` and into `t`,
/// nothing into `s` or out of `t`, support inside `w`.
pub fn cover_lp_feasible(inst: &MetricInstance, w: &[usize], x: &ArcFlow) -> Result<(), String> {
    let set: BTreeSet<usize> = w.iter().copied().collect();
    let (s, t) = (inst.s, inst.t);
    for ((u, v), a) in x.iter() {
        if !set.contains(&u) || !set.contains(&v) {
            return Err(format!("arc ({u},{v}) leaves the node set"));
        }
        if *a < Rational::zero() {
            return Err(format!("negative arc ({u},{v})"));
        }
    }
    let one = Rational::one();
    if x.out_flow(s) != one
        || x.in_flow(t) != one
        || !x.in_flow(s).is_zero()
        || !x.out_flow(t).is_zero()
    {
        return Err("endpoint degrees".into());
    }
    for &v in set.iter().filter(|&&v| v != s && v != t) {
        if x.out_flow(v) != x.in_flow(v) || x.in_flow(v) < one {
            return Err(format!(
                "node {v}: in {} out {}",
                x.in_flow(v),
                x.out_flow(v)
            ));
        }
    }
    Ok(())
}

/// Whether `order` is a Hamiltonian `s`-`t` path of `inst`.
pub fn is_hamiltonian(inst: &MetricInstance, order: &[usize]) -> bool {
    order.len() == inst.n
        && order.first() == Some(&inst.s)
        && order.last() == Some(&inst.t)
        && order.iter().collect::<BTreeSet<_>>().len() == inst.n
}
