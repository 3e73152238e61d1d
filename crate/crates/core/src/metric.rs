//! Asymmetric metric instances.
//!
//! A [`MetricInstance`] is a complete digraph on nodes `0..n` with exact
//! rational distances, a source `s` and a sink `t`. Solvers assume the
//! directed triangle inequality; [`validate`] reports every place it fails.

use std::collections::BTreeSet;
use std::path::Path;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricInstance {
    pub n: usize,
    pub s: usize,
    pub t: usize,
    #[serde(with = "rational::serde_rational_matrix")]
    pub d: Vec<Vec<Rational>>,
    /// Per-node weights for weighted latency. `None` means all ones.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "rational::serde_rational_opt_vec"
    )]
    pub weights: Option<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `d[u][w] > d[u][v] + d[v][w]`.
    Triangle {
        u: usize,
        v: usize,
        w: usize,
    },
    Negative {
        u: usize,
        v: usize,
    },
    NonzeroDiagonal {
        u: usize,
    },
    NonPositiveWeight {
        v: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl MetricInstance {
    /// Builds an instance after checking its shape: square matrix, `s` and
    /// `t` in range and distinct, weights of length `n`. Metric properties
    /// are not checked here; see [`validate`].
    pub fn new(d: Vec<Vec<Rational>>, s: usize, t: usize) -> Result<Self> {
        let inst = MetricInstance {
            n: d.len(),
            s,
            t,
            d,
            weights: None,
        };
        inst.check_structure()?;
        Ok(inst)
    }

    pub fn with_weights(mut self, weights: Vec<Rational>) -> Result<Self> {
        self.weights = Some(weights);
        self.check_structure()?;
        Ok(self)
    }

    pub fn from_integers(d: &[Vec<i64>], s: usize, t: usize) -> Result<Self> {
        Self::new(
            d.iter()
                .map(|row| row.iter().map(|&x| int(x)).collect())
                .collect(),
            s,
            t,
        )
    }

    pub fn check_structure(&self) -> Result<()> {
        if self.n != self.d.len() {
            return Err(Error::Structural(format!(
                "n = {} but matrix has {} rows",
                self.n,
                self.d.len()
            )));
        }
        if let Some((i, row)) = self
            .d
            .iter()
            .enumerate()
            .find(|(_, row)| row.len() != self.n)
        {
            return Err(Error::Structural(format!(
                "row {i} has {} entries, expected {}",
                row.len(),
                self.n
            )));
        }
        if self.s >= self.n || self.t >= self.n {
            return Err(Error::Structural(format!(
                "s = {}, t = {} out of range for n = {}",
                self.s, self.t, self.n
            )));
        }
        if self.s == self.t {
            return Err(Error::Structural("s and t must differ".into()));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.n {
                return Err(Error::Structural(format!(
                    "{} weights for {} nodes",
                    w.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn dist(&self, u: usize, v: usize) -> &Rational {
        &self.d[u][v]
    }

    /// Weight of node `v`; one when the instance is unweighted.
    pub fn weight(&self, v: usize) -> Rational {
        match &self.weights {
            Some(w) => w[v].clone(),
            None => rational::one(),
        }
    }

    /// Interior nodes, i.e. all nodes except `s` and `t`, in index order.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&v| v != self.s && v != self.t)
            .collect()
    }

    /// Total length of a walk given as a node sequence.
    pub fn walk_cost(&self, walk: &[usize]) -> Rational {
        walk.windows(2).map(|p| &self.d[p[0]][p[1]]).sum()
    }

    /// Multiplies every distance by `factor`.
    pub fn scaled(&self, factor: &Rational) -> MetricInstance {
        MetricInstance {
            d: self
                .d
                .iter()
                .map(|row| row.iter().map(|x| x * factor).collect())
                .collect(),
            ..self.clone()
        }
    }

    /// Smallest off-diagonal distance.
    pub fn min_off_diagonal(&self) -> Option<Rational> {
        (0..self.n)
            .flat_map(|u| (0..self.n).filter(move |&v| v != u).map(move |v| (u, v)))
            .map(|(u, v)| self.d[u][v].clone())
            .min()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: MetricInstance = serde_json::from_str(text)?;
        inst.check_structure()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

/// Reports every negative entry, nonzero diagonal entry, non-positive
/// weight and violated triangle `(u, v, w)` with
/// `d[u][w] > d[u][v] + d[v][w]`.
#[allow(clippy::needless_range_loop)]
pub fn validate(inst: &MetricInstance) -> Result<ValidationReport> {
    inst.check_structure()?;
    let n = inst.n;
    let d = &inst.d;
    let mut violations = Vec::new();
    for u in 0..n {
        if !d[u][u].is_zero() {
            violations.push(Violation::NonzeroDiagonal { u });
        }
        for v in 0..n {
            if d[u][v].is_negative() {
                violations.push(Violation::Negative { u, v });
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            if v == u {
                continue;
            }
            for w in 0..n {
                if w == u || w == v {
                    continue;
                }
                if d[u][w] > &d[u][v] + &d[v][w] {
                    violations.push(Violation::Triangle { u, v, w });
                }
            }
        }
    }
    if let Some(weights) = &inst.weights {
        for (v, c) in weights.iter().enumerate() {
            if !c.is_positive() {
                violations.push(Violation::NonPositiveWeight { v });
            }
        }
    }
    Ok(ValidationReport {
        ok: violations.is_empty(),
        violations,
    })
}

/// Shortest-path metric of a weighted digraph on `n` nodes.
///
/// Parallel arcs keep the cheapest copy. Every ordered pair must be
/// connected; the first unreachable pair is reported as infeasible.
#[allow(clippy::needless_range_loop)]
pub fn metric_closure(
    n: usize,
    arcs: &[(usize, usize, Rational)],
    s: usize,
    t: usize,
) -> Result<MetricInstance> {
    let mut dist: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    for (u, row) in dist.iter_mut().enumerate() {
        row[u] = Some(Rational::zero());
    }
    for (u, v, w) in arcs {
        if *u >= n || *v >= n {
            return Err(Error::Structural(format!(
                "arc ({u}, {v}) out of range for n = {n}"
            )));
        }
        if w.is_negative() {
            return Err(Error::Structural(format!(
                "arc ({u}, {v}) has negative weight"
            )));
        }
        let better = match &dist[*u][*v] {
            Some(cur) => w < cur,
            None => true,
        };
        if better {
            dist[*u][*v] = Some(w.clone());
        }
    }
    // Floyd–Warshall.
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = dist[i][k].clone() else {
                continue;
            };
            for j in 0..n {
                let Some(dkj) = &dist[k][j] else { continue };
                let via = &dik + dkj;
                if dist[i][j].as_ref().is_none_or(|cur| via < *cur) {
                    dist[i][j] = Some(via);
                }
            }
        }
    }
    let mut d = Vec::with_capacity(n);
    for (u, row) in dist.into_iter().enumerate() {
        let mut out = Vec::with_capacity(n);
        for (v, x) in row.into_iter().enumerate() {
            match x {
                Some(x) => out.push(x),
                None => {
                    return Err(Error::Infeasible(format!(
                        "node {v} is unreachable from node {u}"
                    )))
                }
            }
        }
        d.push(out);
    }
    MetricInstance::new(d, s, t)
}

/// Random instance: integer arc weights uniform in `[1, max_weight]` on the
/// complete digraph, closed under shortest paths, `s = 0` and `t = n - 1`.
/// Deterministic in `(n, seed, max_weight)`.
pub fn gen_random(n: usize, seed: u64, max_weight: u64) -> Result<MetricInstance> {
    if n < 2 {
        return Err(Error::Argument(format!("need n >= 2, got {n}")));
    }
    if max_weight < 1 {
        return Err(Error::Argument("max_weight must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::with_capacity(n * (n - 1));
    for u in 0..n {
        for v in 0..n {
            if u != v {
                let w = rng.random_range(1..=max_weight);
                arcs.push((u, v, Rational::from_integer(w.into())));
            }
        }
    }
    metric_closure(n, &arcs, 0, n - 1)
}

/// Random positive node weights in `[1, max_weight]`, deterministic in the seed.
pub fn gen_weights(n: usize, seed: u64, max_weight: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_3e16_8175);
    (0..n)
        .map(|_| Rational::from_integer(rng.random_range(1..=max_weight.max(1)).into()))
        .collect()
}

/// The unit-cost arcs of the six-node gap family, zero-based: node `i` here
/// is node `i + 1` in the usual one-based drawing, so `s = 0` and `t = 5`.
pub const BAD_GAP_UNIT_ARCS: [(usize, usize); 8] = [
    (0, 1),
    (1, 2),
    (2, 1),
    (2, 5),
    (0, 3),
    (3, 4),
    (4, 3),
    (4, 5),
];

/// The fractional point on the gap family: `½` on six arcs, `1` on the two
/// arcs `(1,2)` and `(3,4)` (zero-based).
pub fn bad_gap_fractional_point() -> Vec<((usize, usize), Rational)> {
    let half = rational::ratio(1, 2);
    vec![
        ((0, 1), half.clone()),
        ((2, 1), half.clone()),
        ((2, 5), half.clone()),
        ((0, 3), half.clone()),
        ((4, 3), half.clone()),
        ((4, 5), half),
        ((1, 2), rational::one()),
        ((3, 4), rational::one()),
    ]
}

/// Six-node instance with a large LP(½) integrality gap.
///
/// Two unit-cost chains `s → 1 ⇄ 2 → t` and `s → 3 ⇄ 4 → t`; every other
/// ordered pair gets an arc of cost `D`, then the metric closure is taken.
/// Any Hamiltonian `s`-`t` path must jump between the chains and so costs
/// at least `D`, while a half-integral LP(½) point costs 5.
pub fn gen_bad_gap(big_d: u64) -> Result<MetricInstance> {
    if big_d < 10 {
        return Err(Error::Argument(format!(
            "D must be at least 10, got {big_d}"
        )));
    }
    let n = 6;
    let unit: BTreeSet<(usize, usize)> = BAD_GAP_UNIT_ARCS.into_iter().collect();
    let mut arcs = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let w = if unit.contains(&(u, v)) { 1 } else { big_d };
            arcs.push((u, v, Rational::from_integer(w.into())));
        }
    }
    metric_closure(n, &arcs, 0, 5)
}

/// Restriction of `inst` to the node set `nodes` with new endpoints.
///
/// Nodes are renumbered in ascending order of their original index; the
/// returned table maps new indices to original ones. Distances are copied,
/// so a metric instance stays metric.
pub fn induced_subinstance(
    inst: &MetricInstance,
    nodes: &[usize],
    s: usize,
    t: usize,
) -> Result<(MetricInstance, Vec<usize>)> {
    if s == t {
        return Err(Error::Argument("sub-instance endpoints must differ".into()));
    }
    let set: BTreeSet<usize> = nodes.iter().copied().collect();
    if let Some(&bad) = set.iter().find(|&&v| v >= inst.n) {
        return Err(Error::Argument(format!("node {bad} out of range")));
    }
    if !set.contains(&s) || !set.contains(&t) {
        return Err(Error::Argument(format!(
            "endpoints {s}, {t} must belong to the node set"
        )));
    }
    let map: Vec<usize> = set.into_iter().collect();
    let pos = |v: usize| map.binary_search(&v).expect("endpoint present");
    let d = map
        .iter()
        .map(|&u| map.iter().map(|&v| inst.d[u][v].clone()).collect())
        .collect();
    let mut sub = MetricInstance::new(d, pos(s), pos(t))?;
    if let Some(w) = &inst.weights {
        sub.weights = Some(map.iter().map(|&v| w[v].clone()).collect());
    }
    Ok((sub, map))
}

/// Instance with every off-diagonal distance equal to one.
pub fn unit_metric(n: usize, s: usize, t: usize) -> Result<MetricInstance> {
    let d = (0..n)
        .map(|u| {
            (0..n)
                .map(|v| if u == v { 0 } else { 1 })
                .collect::<Vec<i64>>()
        })
        .collect::<Vec<_>>();
    MetricInstance::from_integers(&d, s, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_node_instance_is_valid() {
        let inst = MetricInstance::from_integers(&[vec![0, 1], vec![1, 0]], 0, 1).unwrap();
        assert!(validate(&inst).unwrap().ok);
    }

    #[test]
    fn triangle_violation_reported() {
        let d = vec![vec![0, 1, 5], vec![1, 0, 1], vec![1, 1, 0]];
        let inst = MetricInstance::from_integers(&d, 0, 2).unwrap();
        let report = validate(&inst).unwrap();
        assert!(!report.ok);
        assert!(report
            .violations
            .contains(&Violation::Triangle { u: 0, v: 1, w: 2 }));
    }

    #[test]
    fn negative_and_diagonal_reported() {
        let d = vec![vec![1, -1], vec![1, 0]];
        let inst = MetricInstance::from_integers(&d, 0, 1).unwrap();
        let report = validate(&inst).unwrap();
        assert!(report
            .violations
            .contains(&Violation::NonzeroDiagonal { u: 0 }));
        assert!(report
            .violations
            .contains(&Violation::Negative { u: 0, v: 1 }));
    }

    #[test]
    fn non_square_matrix_is_structural_error() {
        let d = vec![vec![int(0), int(1)], vec![int(1)]];
        assert!(matches!(
            MetricInstance::new(d, 0, 1),
            Err(Error::Structural(_))
        ));
        let d = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert!(matches!(
            MetricInstance::new(d.clone(), 0, 0),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            MetricInstance::new(d, 0, 2),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn closure_forces_shortest_path() {
        let arcs = vec![
            (0, 1, int(1)),
            (1, 2, int(1)),
            (0, 2, int(5)),
            (2, 0, int(1)),
            (1, 0, int(1)),
            (2, 1, int(1)),
        ];
        let inst = metric_closure(3, &arcs, 0, 2).unwrap();
        assert_eq!(inst.d[0][2], int(2));
        assert!(validate(&inst).unwrap().ok);
    }

    #[test]
    fn closure_reports_unreachable_pair() {
        let arcs = vec![(0, 1, int(1))];
        let err = metric_closure(2, &arcs, 0, 1).unwrap_err();
        assert!(
            matches!(err, Error::Infeasible(msg) if msg.contains("node 0 is unreachable from node 1"))
        );
    }

    #[test]
    fn closure_of_complete_unit_digraph() {
        let mut arcs = Vec::new();
        for u in 0..4 {
            for v in 0..4 {
                if u != v {
                    arcs.push((u, v, int(1)));
                }
            }
        }
        let inst = metric_closure(4, &arcs, 0, 3).unwrap();
        assert_eq!(inst, unit_metric(4, 0, 3).unwrap());
    }

    #[test]
    fn random_generation_is_deterministic_and_metric() {
        let a = gen_random(2, 7, 10).unwrap();
        assert!(a.d[0][1] >= int(1) && a.d[0][1] <= int(10));
        assert_eq!(
            gen_random(6, 42, 50).unwrap(),
            gen_random(6, 42, 50).unwrap()
        );
        assert_ne!(
            gen_random(6, 42, 50).unwrap(),
            gen_random(6, 43, 50).unwrap()
        );
        assert!(validate(&gen_random(8, 1, 100).unwrap()).unwrap().ok);
        assert!(gen_random(1, 0, 10).is_err());
        assert!(gen_random(3, 0, 0).is_err());
    }

    #[test]
    fn generated_distances_are_positive() {
        let inst = gen_random(7, 3, 20).unwrap();
        assert!(inst.min_off_diagonal().unwrap() >= int(1));
    }

    #[test]
    fn bad_gap_instance_shape() {
        let inst = gen_bad_gap(1000).unwrap();
        assert_eq!((inst.n, inst.s, inst.t), (6, 0, 5));
        assert!(validate(&inst).unwrap().ok);
        for (u, v) in BAD_GAP_UNIT_ARCS {
            assert_eq!(inst.d[u][v], int(1));
        }
        // Crossing between the two chains costs D.
        assert_eq!(inst.d[1][3], int(1000));
        assert_eq!(inst.d[4][2], int(1000));
        let cost: Rational = bad_gap_fractional_point()
            .into_iter()
            .map(|((u, v), x)| x * &inst.d[u][v])
            .sum();
        assert_eq!(cost, int(5));
        assert!(gen_bad_gap(9).is_err());
    }

    #[test]
    fn induced_subinstance_cases() {
        let inst = gen_random(7, 11, 30).unwrap();
        let all: Vec<usize> = (0..7).collect();
        let (same, map) = induced_subinstance(&inst, &all, 0, 6).unwrap();
        assert_eq!(same, inst);
        assert_eq!(map, all);

        let (pair, map) = induced_subinstance(&inst, &[6, 0], 0, 6).unwrap();
        assert_eq!(pair.n, 2);
        assert_eq!(map, vec![0, 6]);
        assert_eq!(pair.d[pair.s][pair.t], inst.d[0][6]);

        let (sub, map) = induced_subinstance(&inst, &[5, 1, 3, 0, 2], 3, 5).unwrap();
        assert_eq!(map, vec![0, 1, 2, 3, 5]);
        assert_eq!((sub.s, sub.t), (3, 4));
        assert!(validate(&sub).unwrap().ok);

        assert!(induced_subinstance(&inst, &[0, 1], 0, 0).is_err());
        assert!(induced_subinstance(&inst, &[0, 1], 0, 6).is_err());
    }

    #[test]
    fn json_round_trip_and_string_rationals() {
        let inst = gen_random(4, 5, 9)
            .unwrap()
            .with_weights(vec![int(1), rational::ratio(1, 2), int(3), int(1)])
            .unwrap();
        let back = MetricInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);

        let text = r#"{"n": 2, "s": 0, "t": 1, "d": [[0, "3/2"], [0.5, 0]]}"#;
        let inst = MetricInstance::from_json(text).unwrap();
        assert_eq!(inst.d[0][1], rational::ratio(3, 2));
        assert_eq!(inst.d[1][0], rational::ratio(1, 2));
        assert!(inst.weights.is_none());

        let bad = r#"{"n": 3, "s": 0, "t": 1, "d": [[0, 1], [1, 0]]}"#;
        assert!(MetricInstance::from_json(bad).is_err());
    }
}
