//! Minimum-cost path-cycle covers and the rounding of LP(α) points with
//! α > ½ to the path-cycle cover polytope.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{decompose_flow, min_cost_perfect_matching, topological_order, ArcFlow};
use crate::lp::min_cut_value;
use crate::metric::MetricInstance;
use crate::rational::{self, Rational};

/// One `s`-`t` path plus node-disjoint cycles covering a node set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathCycleCover {
    pub path: Vec<usize>,
    pub cycles: Vec<Vec<usize>>,
    #[serde(with = "rational::serde_rational")]
    pub cost: Rational,
}

/// `k` paths from `s` to `t`, disjoint apart from their ends, plus cycles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KPathCycleCover {
    pub paths: Vec<Vec<usize>>,
    pub cycles: Vec<Vec<usize>>,
    #[serde(with = "rational::serde_rational")]
    pub cost: Rational,
}

impl PathCycleCover {
    /// Arc multiset as a flow with unit amounts.
    pub fn arcs(&self, n: usize) -> ArcFlow {
        let mut f = ArcFlow::from_walk(n, &self.path, &Rational::one());
        for c in &self.cycles {
            add_cycle(&mut f, c);
        }
        f
    }
}

impl KPathCycleCover {
    pub fn arcs(&self, n: usize) -> ArcFlow {
        let mut f = ArcFlow::new(n);
        for p in &self.paths {
            f.add_walk(p, &Rational::one());
        }
        for c in &self.cycles {
            add_cycle(&mut f, c);
        }
        f
    }
}

fn add_cycle(f: &mut ArcFlow, cycle: &[usize]) {
    for i in 0..cycle.len() {
        f.add(cycle[i], cycle[(i + 1) % cycle.len()], &Rational::one());
    }
}

fn check_target(inst: &MetricInstance, w: &[usize]) -> Result<Vec<usize>> {
    let set: BTreeSet<usize> = w.iter().copied().collect();
    if set.len() != w.len() {
        return Err(Error::Argument("cover target set repeats a node".into()));
    }
    if let Some(&v) = set.iter().find(|&&v| v >= inst.n) {
        return Err(Error::Argument(format!(
            "cover target node {v} out of range"
        )));
    }
    if !set.contains(&inst.s) || !set.contains(&inst.t) {
        return Err(Error::Argument(
            "cover target set must contain s and t".into(),
        ));
    }
    Ok(set
        .into_iter()
        .filter(|&v| v != inst.s && v != inst.t)
        .collect())
}

/// Minimum-cost cover of `w` by one `s`-`t` path and node-disjoint cycles.
pub fn min_path_cycle_cover(inst: &MetricInstance, w: &[usize]) -> Result<PathCycleCover> {
    let c = min_k_path_cycle_cover(inst, w, 1)?;
    let path = c.paths.into_iter().next().expect("one path");
    Ok(PathCycleCover {
        path,
        cycles: c.cycles,
        cost: c.cost,
    })
}

/// Minimum-cost cover of `w` by `k` paths from `s` to `t` and cycles.
///
/// Reduction to an assignment problem: rows are `k` copies of `s` and the
/// interior nodes (out-slots), columns the interior nodes and `k` copies of
/// `t` (in-slots).
pub fn min_k_path_cycle_cover(
    inst: &MetricInstance,
    w: &[usize],
    k: usize,
) -> Result<KPathCycleCover> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    let interior = check_target(inst, w)?;
    let (s, t) = (inst.s, inst.t);
    let m = interior.len();
    let rows: Vec<usize> = std::iter::repeat_n(s, k)
        .chain(interior.iter().copied())
        .collect();
    let cols: Vec<usize> = interior
        .iter()
        .copied()
        .chain(std::iter::repeat_n(t, k))
        .collect();
    let matrix: Vec<Vec<Option<Rational>>> = rows
        .iter()
        .map(|&u| {
            cols.iter()
                .map(|&v| (u != v).then(|| inst.dist(u, v).clone()))
                .collect()
        })
        .collect();
    let matching = min_cost_perfect_matching(&matrix)?;
    // Successor of each interior node; columns >= m are copies of t.
    let succ = |row: usize| -> Option<usize> {
        let col = matching.assignment[row];
        (col < m).then_some(col)
    };
    let mut used = vec![false; m];
    let mut paths = Vec::with_capacity(k);
    for r in 0..k {
        let mut path = vec![s];
        let mut cur = succ(r);
        while let Some(i) = cur {
            used[i] = true;
            path.push(interior[i]);
            cur = succ(k + i);
        }
        path.push(t);
        paths.push(path);
    }
    let mut cycles = Vec::new();
    for start in 0..m {
        if used[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !used[i] {
            used[i] = true;
            cycle.push(interior[i]);
            i = succ(k + i).ok_or_else(|| Error::Contract("cover cycle reached t".into()))?;
        }
        if i != start {
            return Err(Error::Contract(
                "matching successor map is not a permutation on cycles".into(),
            ));
        }
        cycles.push(cycle);
    }
    let cover = KPathCycleCover {
        paths,
        cycles,
        cost: matching.cost,
    };
    debug_assert_eq!(cover.arcs(inst.n).cost(inst), cover.cost);
    Ok(cover)
}

/// Output of [`round_alpha_point`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundingCertificate {
    #[serde(with = "rational::serde_rational")]
    pub gamma: Rational,
    /// Nodes still carrying path flow after shortcutting, in path order.
    pub path: Vec<usize>,
    pub x_tilde: ArcFlow,
    #[serde(with = "rational::serde_rational")]
    pub input_cost: Rational,
    #[serde(with = "rational::serde_rational")]
    pub path_cost: Rational,
    #[serde(with = "rational::serde_rational")]
    pub cycle_cost: Rational,
    #[serde(with = "rational::serde_rational")]
    pub cost: Rational,
    /// `3/(2α−1)` times the input cost.
    #[serde(with = "rational::serde_rational")]
    pub bound: Rational,
}

/// Checks that `x` is a feasible LP(α) point supported on `w`.
pub fn check_lp_alpha_point(
    inst: &MetricInstance,
    w: &[usize],
    x: &ArcFlow,
    alpha: &Rational,
) -> Result<()> {
    let (s, t) = (inst.s, inst.t);
    let set: BTreeSet<usize> = w.iter().copied().collect();
    for ((u, v), a) in x.iter() {
        if !set.contains(&u) || !set.contains(&v) {
            return Err(Error::Contract(format!(
                "arc ({u}, {v}) leaves the node set"
            )));
        }
        if v == s || u == t {
            return Err(Error::Contract(format!(
                "arc ({u}, {v}) enters s or leaves t"
            )));
        }
        if a.is_negative() {
            return Err(Error::Contract(format!("negative flow on ({u}, {v})")));
        }
    }
    if x.out_flow(s) != Rational::one() || x.in_flow(t) != Rational::one() {
        return Err(Error::Contract("x is not a unit s-t flow".into()));
    }
    let excess = x.excess();
    if let Some(v) = set
        .iter()
        .find(|&&v| v != s && v != t && !excess[v].is_zero())
    {
        return Err(Error::Contract(format!("flow not conserved at node {v}")));
    }
    // Restrict separation to the nodes of w.
    let (sub, map) = crate::metric::induced_subinstance(inst, w, s, t)?;
    let pos = |v: usize| map.iter().position(|&o| o == v).expect("node of w");
    let local = ArcFlow::from_arcs(
        sub.n,
        x.iter().map(|((u, v), a)| ((pos(u), pos(v)), a.clone())),
    );
    match min_cut_value(&local, sub.s) {
        Some(c) if c < *alpha => Err(Error::Contract(format!(
            "x violates a cut constraint: min cut {} < alpha {}",
            rational::format(&c),
            rational::format(alpha)
        ))),
        _ => Ok(()),
    }
}

/// Turns a feasible LP(α) point `x` on `w`, α > ½, into a fractional path-cycle
/// cover of `w` costing at most `3/(2α−1)` times as much.
pub fn round_alpha_point(
    inst: &MetricInstance,
    w: &[usize],
    x: &ArcFlow,
    alpha: &Rational,
) -> Result<RoundingCertificate> {
    let half = rational::ratio(1, 2);
    if *alpha <= half || *alpha > Rational::one() {
        return Err(Error::Argument(format!(
            "rounding needs alpha in (1/2, 1], got {}",
            rational::format(alpha)
        )));
    }
    check_lp_alpha_point(inst, w, x, alpha)?;
    let (s, t) = (inst.s, inst.t);
    let n = inst.n;
    let scaled = x.scaled(&alpha.recip());
    let dec = decompose_flow(&scaled, s, t)?;
    let gamma = rational::ratio(1, 3) + (rational::int(3) * alpha).recip();

    let mut through = vec![Rational::zero(); n];
    for p in &dec.paths {
        for &v in &p.nodes {
            through[v] += &p.amount;
        }
    }
    let keep = |v: usize| v == s || v == t || through[v] >= gamma;
    let mut arcs = Vec::new();
    let mut survivors = BTreeSet::new();
    for p in &dec.paths {
        let short: Vec<usize> = p.nodes.iter().copied().filter(|&v| keep(v)).collect();
        survivors.extend(short.iter().copied());
        arcs.extend(short.windows(2).map(|a| (a[0], a[1])));
    }
    let survivors: Vec<usize> = survivors.into_iter().collect();
    let path = topological_order(&survivors, &arcs)?;
    if path.first() != Some(&s) || path.last() != Some(&t) {
        return Err(Error::assertion(
            "rounding",
            "topological order of surviving nodes does not run from s to t",
        ));
    }

    let cycles = dec.cycle_flow(n);
    let mut x_tilde = ArcFlow::from_walk(n, &path, &Rational::one());
    x_tilde.add_flow(&cycles, &(Rational::one() - &gamma).recip());

    let input_cost = x.cost(inst);
    let path_cost = inst.walk_cost(&path);
    let cycle_cost = cycles.cost(inst);
    let cost = x_tilde.cost(inst);
    let bound = rational::int(3) / (rational::int(2) * alpha - Rational::one()) * &input_cost;

    // Cover relaxation feasibility: unit s-t flow, conservation, unit throughput.
    if x_tilde.out_flow(s) != Rational::one() || x_tilde.in_flow(t) != Rational::one() {
        return Err(Error::assertion(
            "rounding",
            "rounded flow is not a unit s-t flow",
        ));
    }
    let excess = x_tilde.excess();
    if let Some(v) = (0..n).find(|&v| v != s && v != t && !excess[v].is_zero()) {
        return Err(Error::assertion(
            "rounding",
            format!("rounded flow not conserved at node {v}"),
        ));
    }
    let inflow = x_tilde.inflows();
    if let Some(&v) = w.iter().find(|&&v| v != s && inflow[v] < Rational::one()) {
        return Err(Error::assertion(
            "rounding",
            format!("node {v} receives less than one unit"),
        ));
    }
    if cost > bound {
        return Err(Error::assertion(
            "rounding",
            format!(
                "cost {} exceeds bound {}",
                rational::format(&cost),
                rational::format(&bound)
            ),
        ));
    }
    Ok(RoundingCertificate {
        gamma,
        path,
        x_tilde,
        input_cost,
        path_cost,
        cycle_cost,
        cost,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{gen_random, unit_metric};
    use crate::rational::{int, ratio};

    #[test]
    fn two_node_cover() {
        let inst = MetricInstance::from_integers(&[vec![0, 3], vec![3, 0]], 0, 1).unwrap();
        let c = min_path_cycle_cover(&inst, &[0, 1]).unwrap();
        assert_eq!(c.path, vec![0, 1]);
        assert!(c.cycles.is_empty());
        assert_eq!(c.cost, int(3));
        let k = min_k_path_cycle_cover(&inst, &[0, 1], 3).unwrap();
        assert_eq!(k.paths, vec![vec![0, 1]; 3]);
        assert_eq!(k.cost, int(9));
    }

    #[test]
    fn unit_metric_cover_cost() {
        let inst = unit_metric(6, 0, 5).unwrap();
        let c = min_path_cycle_cover(&inst, &[0, 2, 3, 5]).unwrap();
        assert_eq!(c.cost, int(3));
    }

    #[test]
    fn cover_partitions_target() {
        let inst = gen_random(8, 4, 30).unwrap();
        let w: Vec<usize> = (0..8).collect();
        let c = min_path_cycle_cover(&inst, &w).unwrap();
        let mut seen: Vec<usize> = c.path.clone();
        seen.extend(c.cycles.iter().flatten());
        seen.sort();
        assert_eq!(seen, w);
        assert_eq!(c.arcs(8).cost(&inst), c.cost);
    }

    #[test]
    fn integral_path_rounds_to_itself() {
        let inst = unit_metric(5, 0, 4).unwrap();
        let x = ArcFlow::from_walk(5, &[0, 2, 1, 3, 4], &int(1));
        let w: Vec<usize> = (0..5).collect();
        let cert = round_alpha_point(&inst, &w, &x, &int(1)).unwrap();
        assert_eq!(cert.gamma, ratio(2, 3));
        assert_eq!(cert.path, vec![0, 2, 1, 3, 4]);
        assert_eq!(cert.x_tilde, x);
        assert_eq!(cert.bound, int(12));
    }

    #[test]
    fn infeasible_point_rejected() {
        let inst = unit_metric(4, 0, 3).unwrap();
        let x = ArcFlow::from_walk(4, &[0, 1, 3], &int(1));
        let w: Vec<usize> = (0..4).collect();
        assert!(matches!(
            round_alpha_point(&inst, &w, &x, &int(1)),
            Err(Error::Contract(_))
        ));
    }
}
