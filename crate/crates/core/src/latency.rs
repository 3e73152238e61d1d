//! Directed (weighted) latency: the bucket-and-stitch approximation.
//!
//! The latency LP is solved, latencies are floored at `ell(t)/n²` and the
//! instance is rescaled so the smallest latency is 1. Nodes are bucketed by
//! `⌊log₂ ell⌋`; every bucket contributes `s`-`v` paths built by the ATSPP
//! cover loop and the multi-path cover, which are appended to a running walk
//! `S`. All bounds are checked exactly in the rescaled units.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::atspp::{multipath_cover, solve_atspp};
use crate::ceil_log2;
use crate::check::CheckLog;
use crate::error::{Error, Result};
use crate::graph::shortcut;
use crate::lp::{normalize_latencies, solve_latency_lp, LatencyLpSolution};
use crate::metric::{induced_subinstance, MetricInstance};
use crate::rational::{self, int, pow2, ratio, Rational};

/// A Hamiltonian `s`-`t` order with its latencies in original units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyOrder {
    pub nodes: Vec<usize>,
    /// Latency per node index.
    #[serde(with = "rational::serde_rational_vec")]
    pub latencies: Vec<Rational>,
    #[serde(with = "rational::serde_rational")]
    pub total: Rational,
}

/// One `(i, j)` step of the bucket loop. Lengths are in rescaled units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PivotRecord {
    pub i: usize,
    pub j: usize,
    pub pivot: usize,
    /// `|V_i|` when the step starts.
    pub bucket_size: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub path: Vec<usize>,
    #[serde(with = "rational::serde_rational_vec")]
    pub path_cover_costs: Vec<Rational>,
    pub multipaths: Vec<Vec<usize>>,
    #[serde(with = "rational::serde_rational_vec")]
    pub multipath_cover_costs: Vec<Rational>,
    #[serde(with = "rational::serde_rational")]
    pub app_path: Rational,
    #[serde(with = "rational::serde_rational_vec")]
    pub app_multipaths: Vec<Rational>,
    /// Length added to `S` by this step.
    #[serde(with = "rational::serde_rational")]
    pub growth: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketState {
    /// Rescaling factor applied to distances and latencies.
    #[serde(with = "rational::serde_rational")]
    pub sigma: Rational,
    /// Floored and rescaled latencies.
    #[serde(with = "rational::serde_rational_vec")]
    pub ell: Vec<Rational>,
    pub g: usize,
    /// Initial buckets `V_1..V_g`.
    pub buckets: Vec<Vec<usize>>,
    /// `|V_i|` at the start and end of outer iteration `i`, for `i < g`.
    pub start_sizes: Vec<usize>,
    pub end_sizes: Vec<usize>,
    pub pivots: Vec<PivotRecord>,
    /// Nodes handed to the final `s`-`t` path.
    pub final_nodes: Vec<usize>,
    pub final_path: Vec<usize>,
    #[serde(with = "rational::serde_rational_vec")]
    pub final_cover_costs: Vec<Rational>,
    #[serde(with = "rational::serde_rational")]
    pub final_app: Rational,
    /// `S` before the last shortcut.
    pub walk: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatencyRun {
    pub order: LatencyOrder,
    /// Latency LP optimum in original units.
    #[serde(with = "rational::serde_rational")]
    pub lp_value: Rational,
    /// Value after the floor rule, original units.
    #[serde(with = "rational::serde_rational")]
    pub floored_value: Rational,
    /// Largest sub-instance handed to the ATSPP cover loop.
    pub max_subinstance: usize,
    /// Bound `total ≤ c_total · lp_value` assembled from the checked
    /// per-step bounds. Absent for weighted instances, where the
    /// quarter-shrink of the buckets is not guaranteed.
    #[serde(with = "rational::serde_rational_opt")]
    pub c_total: Option<Rational>,
    pub trace: BucketState,
    pub checks: CheckLog,
}

/// Latency of every node along `order`; nodes not on it get zero.
pub fn latencies(inst: &MetricInstance, order: &[usize]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); inst.n];
    let mut acc = Rational::zero();
    for w in order.windows(2) {
        acc += inst.dist(w[0], w[1]);
        out[w[1]] = acc.clone();
    }
    out
}

/// Total weighted latency of a Hamiltonian `s`-`t` order. `weights`
/// overrides the instance weights; without either every node counts once.
pub fn total_latency(
    inst: &MetricInstance,
    order: &[usize],
    weights: Option<&[Rational]>,
) -> Result<Rational> {
    let mut seen = vec![false; inst.n];
    let ok_shape =
        order.len() == inst.n && order.first() == Some(&inst.s) && order.last() == Some(&inst.t);
    if !ok_shape
        || order
            .iter()
            .any(|&v| v >= inst.n || std::mem::replace(&mut seen[v], true))
    {
        return Err(Error::Argument(format!(
            "{order:?} is not a Hamiltonian {}-{} order",
            inst.s, inst.t
        )));
    }
    if let Some(w) = weights {
        if w.len() != inst.n {
            return Err(Error::Argument(format!(
                "{} weights for {} nodes",
                w.len(),
                inst.n
            )));
        }
    }
    let lat = latencies(inst, order);
    let c = |v: usize| weights.map_or_else(|| inst.weight(v), |w| w[v].clone());
    Ok((0..inst.n).map(|v| c(v) * &lat[v]).sum())
}

/// Extends `walk` by the part of `path` from its first node not already on
/// `walk`. Returns the new walk and the length of the connecting arc.
pub fn append(walk: &[usize], path: &[usize], inst: &MetricInstance) -> (Vec<usize>, Rational) {
    let on: BTreeSet<usize> = walk.iter().copied().collect();
    let Some(k) = path.iter().position(|v| !on.contains(v)) else {
        return (walk.to_vec(), Rational::zero());
    };
    let last = *walk.last().expect("walk starts at s");
    let mut out = walk.to_vec();
    out.extend_from_slice(&path[k..]);
    (out, inst.dist(last, path[k]).clone())
}

/// Per-step constant `(2⌈log₂ m⌉+1)·9 + 38⌈log₂ n⌉` bounding the length a
/// step of level `i` adds to `S`, in units of `2^i`.
pub fn step_constant(n: usize, m: usize) -> Rational {
    let l = ceil_log2(n) as i64;
    let lm = ceil_log2(m.max(1)) as i64;
    int((2 * lm + 1) * 9 + 2 * l + 24 * l + 12 * l)
}

/// `(1 + 1/n) · 4 · 4K` with `K` the per-step constant: a node first reached
/// at level `k` has latency at most `4K·2^k`, and bucket shrinkage turns
/// that into four times the floored LP value.
pub fn c_total(n: usize, m: usize) -> Rational {
    (Rational::one() + ratio(1, n as i64)) * int(16) * step_constant(n, m)
}

fn sorted(set: &BTreeSet<usize>) -> Vec<usize> {
    set.iter().copied().collect()
}

/// Runs the algorithm on a fresh latency LP solution.
pub fn solve_latency(inst: &MetricInstance) -> Result<LatencyRun> {
    check_input(inst)?;
    let lp = solve_latency_lp(inst)?;
    solve_latency_with_lp(inst, &lp)
}

fn check_input(inst: &MetricInstance) -> Result<()> {
    if inst.n < 2 {
        return Err(Error::Argument("latency needs at least two nodes".into()));
    }
    for u in 0..inst.n {
        for v in (0..inst.n).filter(|&v| v != u) {
            if !inst.dist(u, v).is_positive() {
                return Err(Error::Argument(format!(
                    "distance {u}->{v} must be positive"
                )));
            }
        }
    }
    Ok(())
}

/// Runs the algorithm on a given optimal latency LP solution.
pub fn solve_latency_with_lp(inst: &MetricInstance, lp: &LatencyLpSolution) -> Result<LatencyRun> {
    check_input(inst)?;
    let (n, s, t) = (inst.n, inst.s, inst.t);
    let weighted = inst.weights.is_some();
    let lg = ceil_log2(n) as usize;
    let mut checks = CheckLog::new();

    let (floored, sigma) = normalize_latencies(lp, inst)?;
    let nn = int((n * n) as i64);
    checks.require(
        "floor value",
        floored.objective <= (Rational::one() + ratio(1, n as i64)) * &lp.objective,
        || {
            format!(
                "{} > (1+1/n)·{}",
                rational::format(&floored.objective),
                rational::format(&lp.objective)
            )
        },
    )?;
    let ell: Vec<Rational> = (0..n)
        .map(|v| {
            if v == s {
                Rational::zero()
            } else {
                &floored.ell[v] * &sigma
            }
        })
        .collect();
    let others: Vec<usize> = (0..n).filter(|&v| v != s).collect();
    let min = others
        .iter()
        .map(|&v| &ell[v])
        .min()
        .expect("n >= 2")
        .clone();
    let max = others
        .iter()
        .map(|&v| &ell[v])
        .max()
        .expect("n >= 2")
        .clone();
    checks.require(
        "latency spread",
        min.is_one() && max <= nn && max == ell[t],
        || {
            format!(
                "min {}, max {}, ell(t) {}",
                rational::format(&min),
                rational::format(&max),
                rational::format(&ell[t])
            )
        },
    )?;
    let scaled = inst.scaled(&sigma);

    let g = rational::floor_log2(&ell[t]) as usize + 1;
    checks.require("bucket count", g <= 2 * lg + 1, || {
        format!("g = {g} > 2·{lg}+1")
    })?;
    let mut buckets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g + 1];
    for &v in &others {
        buckets[rational::floor_log2(&ell[v]) as usize + 1].insert(v);
    }
    let initial: Vec<Vec<usize>> = buckets[1..].iter().map(sorted).collect();
    let lower: Rational = (1..=g)
        .map(|i| buckets[i].iter().map(|&v| inst.weight(v)).sum::<Rational>() * pow2(i as i32 - 1))
        .sum();
    let lstar: Rational = others.iter().map(|&v| inst.weight(v) * &ell[v]).sum();
    checks.require("bucket lower bound", lstar >= lower, || {
        format!(
            "Σ c·ell = {} < {}",
            rational::format(&lstar),
            rational::format(&lower)
        )
    })?;

    let mut trace = BucketState {
        sigma: sigma.clone(),
        ell: ell.clone(),
        g,
        buckets: initial,
        start_sizes: Vec::new(),
        end_sizes: Vec::new(),
        pivots: Vec::new(),
        final_nodes: Vec::new(),
        final_path: Vec::new(),
        final_cover_costs: Vec::new(),
        final_app: Rational::zero(),
        walk: Vec::new(),
    };
    let mut walk = vec![s];
    let mut level = vec![0usize; n];
    let mut max_sub = 2usize;
    let lgq = int(lg as i64);

    let result = (|| -> Result<()> {
        for i in 1..g {
            let bound = pow2(i as i32);
            let start = buckets[i].len();
            trace.start_sizes.push(start);
            for j in 1..=2 {
                if buckets[i].is_empty() {
                    continue;
                }
                let vi = &buckets[i];
                let half = ratio(1, 2);
                let in_set = |v: usize| -> Vec<usize> {
                    vi.iter()
                        .copied()
                        .filter(|&u| u != v && floored.x(u, v) >= half)
                        .collect()
                };
                let score = |set: &[usize]| -> Rational {
                    if weighted {
                        set.iter().map(|&u| inst.weight(u)).sum()
                    } else {
                        int(set.len() as i64)
                    }
                };
                let mut pivot = None;
                let mut best = -Rational::one();
                for &v in vi {
                    let sc = score(&in_set(v));
                    if sc > best {
                        best = sc;
                        pivot = Some(v);
                    }
                }
                let v = pivot.expect("bucket non-empty");
                let b = in_set(v);
                let size = vi.len();
                let covered = 2 * (b.len() + 1) >= size;
                let witness = || format!("|B ∪ {{{v}}}| = {} < {size}/2 at ({i},{j})", b.len() + 1);
                if weighted {
                    checks.note("pivot coverage", covered, witness);
                } else {
                    checks.require("pivot coverage", covered, witness)?;
                }
                let threshold = ratio(2, 3) + ratio((2 * i + j - 2) as i64, 24 * lg as i64);
                let a: Vec<usize> = (0..n)
                    .filter(|&u| u != s && u != v && floored.x(u, v) >= threshold)
                    .collect();

                let before = scaled.walk_cost(&walk);
                let mut nodes: Vec<usize> = a.clone();
                nodes.extend([s, v]);
                max_sub = max_sub.max(nodes.len());
                let (sub, map) = induced_subinstance(&scaled, &nodes, s, v)?;
                let run = solve_atspp(&sub, None)?;
                let m = sub.n;
                let cover_cap = int(9) * &bound;
                let worst = run.cover_costs.iter().max().cloned().unwrap_or_default();
                checks.require("sub-path cover bound", worst <= cover_cap, || {
                    format!("cover {} > 9·2^{i} at ({i},{j})", rational::format(&worst))
                })?;
                let path_cap = int((2 * ceil_log2(m) as i64 + 1) * 9) * &bound;
                checks.require("sub-path length", run.path.cost <= path_cap, || {
                    format!(
                        "path {} > {} at ({i},{j})",
                        rational::format(&run.path.cost),
                        rational::format(&path_cap)
                    )
                })?;
                let path: Vec<usize> = run.path.nodes.iter().map(|&x| map[x]).collect();
                let (w2, app_path) = append(&walk, &path, &scaled);
                mark(&mut level, &walk, &w2, i);
                walk = w2;
                let cap = int(24) * &lgq * &bound;
                checks.require("long append", app_path <= cap, || {
                    format!(
                        "app {} > 24·{lg}·2^{i} at ({i},{j})",
                        rational::format(&app_path)
                    )
                })?;

                let mut bnodes = b.clone();
                bnodes.extend([s, v]);
                let (bsub, bmap) = induced_subinstance(&scaled, &bnodes, s, v)?;
                let multi = multipath_cover(&bsub, 2)?;
                let worst = multi.cover_costs.iter().max().cloned().unwrap_or_default();
                checks.require("two-path cover bound", worst <= int(2) * &bound, || {
                    format!(
                        "2-cover {} > 2·2^{i} at ({i},{j})",
                        rational::format(&worst)
                    )
                })?;
                checks.require("two-path count", multi.paths.len() <= 2 * lg, || {
                    format!("{} paths > 2·{lg} at ({i},{j})", multi.paths.len())
                })?;
                let mut multipaths = Vec::new();
                let mut app_multi = Vec::new();
                for p in &multi.paths {
                    let p: Vec<usize> = p.iter().map(|&x| bmap[x]).collect();
                    let (w2, app) = append(&walk, &p, &scaled);
                    mark(&mut level, &walk, &w2, i);
                    walk = w2;
                    checks.require("short append", app <= int(6) * &bound, || {
                        format!("app {} > 6·2^{i} at ({i},{j})", rational::format(&app))
                    })?;
                    multipaths.push(p);
                    app_multi.push(app);
                }
                let growth = scaled.walk_cost(&walk) - before;
                let step_cap = step_constant(n, m) * &bound;
                checks.require("step growth", growth <= step_cap, || {
                    format!(
                        "S grew by {} > {} at ({i},{j})",
                        rational::format(&growth),
                        rational::format(&step_cap)
                    )
                })?;

                let removed: BTreeSet<usize> = a.iter().chain(&b).copied().chain([v]).collect();
                buckets[i].retain(|u| !removed.contains(u));
                trace.pivots.push(PivotRecord {
                    i,
                    j,
                    pivot: v,
                    bucket_size: size,
                    a,
                    b,
                    path,
                    path_cover_costs: run.cover_costs,
                    multipaths,
                    multipath_cover_costs: multi.cover_costs,
                    app_path,
                    app_multipaths: app_multi,
                    growth,
                });
            }
            let end = buckets[i].len();
            trace.end_sizes.push(end);
            let shrunk = 4 * end <= start;
            let witness = || format!("|V_{i}| went from {start} to {end}");
            if weighted {
                checks.note("quarter shrink", shrunk, witness);
            } else {
                checks.require("quarter shrink", shrunk, witness)?;
            }
            let rest = std::mem::take(&mut buckets[i]);
            buckets[i + 1].extend(rest);
        }

        let on: BTreeSet<usize> = walk.iter().copied().collect();
        let mut last: BTreeSet<usize> = buckets[g].clone();
        last.extend((0..n).filter(|v| !on.contains(v)));
        last.extend([s, t]);
        trace.final_nodes = sorted(&last);
        max_sub = max_sub.max(last.len());
        let (sub, map) = induced_subinstance(&scaled, &trace.final_nodes, s, t)?;
        let run = solve_atspp(&sub, None)?;
        let bound = pow2(g as i32);
        let worst = run.cover_costs.iter().max().cloned().unwrap_or_default();
        checks.require("final cover bound", worst <= bound, || {
            format!("cover {} > 2^{g}", rational::format(&worst))
        })?;
        let path: Vec<usize> = run.path.nodes.iter().map(|&x| map[x]).collect();
        let before = scaled.walk_cost(&walk);
        let (w2, app) = append(&walk, &path, &scaled);
        mark(&mut level, &walk, &w2, g);
        walk = w2;
        checks.require("short append", app <= int(6) * &bound, || {
            format!("final app {} > 6·2^{g}", rational::format(&app))
        })?;
        let growth = scaled.walk_cost(&walk) - before;
        let step_cap = step_constant(n, sub.n) * &bound;
        checks.require("step growth", growth <= step_cap, || {
            format!(
                "final step grew S by {} > {}",
                rational::format(&growth),
                rational::format(&step_cap)
            )
        })?;
        trace.final_path = path;
        trace.final_cover_costs = run.cover_costs;
        trace.final_app = app;
        Ok(())
    })();
    trace.walk = walk.clone();
    if let Err(e) = result {
        return Err(e.with_trace(&trace));
    }

    let order = shortcut(&walk);
    let hamiltonian = order.len() == n && order.first() == Some(&s) && order.last() == Some(&t);
    checks
        .require("hamiltonian", hamiltonian, || format!("{order:?}"))
        .map_err(|e| e.with_trace(&trace))?;

    let k4 = int(4) * step_constant(n, max_sub);
    let lat_scaled = latencies(&scaled, &order);
    for &v in &others {
        let cap = &k4 * pow2(level[v] as i32);
        checks
            .require("node latency", lat_scaled[v] <= cap, || {
                format!(
                    "node {v} first reached at level {} has latency {}",
                    level[v],
                    rational::format(&lat_scaled[v])
                )
            })
            .map_err(|e| e.with_trace(&trace))?;
    }

    let lat = latencies(inst, &order);
    let total = total_latency(inst, &order, None)?;
    let bound = if weighted {
        None
    } else {
        Some(c_total(n, max_sub))
    };
    if let Some(c) = &bound {
        checks
            .require("total bound", total <= c * &lp.objective, || {
                format!(
                    "total {} > {} · {}",
                    rational::format(&total),
                    rational::format(c),
                    rational::format(&lp.objective)
                )
            })
            .map_err(|e| e.with_trace(&trace))?;
    }
    Ok(LatencyRun {
        order: LatencyOrder {
            nodes: order,
            latencies: lat,
            total,
        },
        lp_value: lp.objective.clone(),
        floored_value: floored.objective,
        max_subinstance: max_sub,
        c_total: bound,
        trace,
        checks,
    })
}

/// Records `level` for nodes that first appear in `after`.
fn mark(level: &mut [usize], before: &[usize], after: &[usize], lvl: usize) {
    let on: BTreeSet<usize> = before.iter().copied().collect();
    for &v in &after[before.len()..] {
        if !on.contains(&v) && level[v] == 0 {
            level[v] = lvl;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{gen_random, unit_metric};

    #[test]
    fn append_examples() {
        let inst = unit_metric(6, 0, 5).unwrap();
        let (s, a, b, c, d, e) = (0, 1, 2, 3, 4, 5);
        let (w, app) = append(&[s, a, b, c], &[s, b, d, c, e], &inst);
        assert_eq!(w, vec![s, a, b, c, d, c, e]);
        assert_eq!(app, int(1));
        let (w, app) = append(&[s, a, b], &[s, b], &inst);
        assert_eq!(w, vec![s, a, b]);
        assert!(app.is_zero());
    }

    #[test]
    fn total_latency_examples() {
        assert_eq!(
            total_latency(&unit_metric(3, 0, 2).unwrap(), &[0, 1, 2], None).unwrap(),
            int(3)
        );
        let inst = MetricInstance::from_integers(&[vec![0, 2], vec![2, 0]], 0, 1).unwrap();
        assert_eq!(
            total_latency(&inst, &[0, 1], Some(&[int(1), int(5)])).unwrap(),
            int(10)
        );
        assert!(total_latency(&inst, &[1, 0], None).is_err());
        assert!(total_latency(&unit_metric(3, 0, 2).unwrap(), &[0, 2], None).is_err());
    }

    #[test]
    fn two_nodes() {
        let inst = MetricInstance::from_integers(&[vec![0, 7], vec![3, 0]], 0, 1).unwrap();
        let run = solve_latency(&inst).unwrap();
        assert_eq!(run.order.nodes, vec![0, 1]);
        assert_eq!(run.order.total, int(7));
    }

    #[test]
    fn unit_three() {
        let run = solve_latency(&unit_metric(3, 0, 2).unwrap()).unwrap();
        assert_eq!(run.order.total, int(3));
        assert!(run.checks.all_passed());
    }

    #[test]
    fn random_runs_pass_their_checks() {
        for seed in 0..4 {
            let inst = gen_random(6, seed, 20).unwrap();
            let run = solve_latency(&inst).unwrap();
            assert!(run.checks.all_passed(), "{:?}", run.checks);
            assert!(run.order.total >= run.lp_value);
        }
    }

    #[test]
    fn zero_distance_rejected() {
        let inst = MetricInstance::from_integers(&[vec![0, 0], vec![1, 0]], 0, 1).unwrap();
        assert!(matches!(solve_latency(&inst), Err(Error::Argument(_))));
    }
}
