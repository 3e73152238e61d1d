use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::{max_flow_min_cut, ArcFlow};
use crate::lp::{Cmp, Constraint, LpModel, LpSolver, LpStatus};
use crate::metric::MetricInstance;
use crate::par;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LatencyLpOptions {
    /// Adds `f^v_uw <= f^t_uw` for every flow variable. Off by default; the
    /// algorithm never relies on it.
    pub universal_flow: bool,
}

/// Column indices of the latency LP variables.
#[derive(Debug, Clone)]
pub struct LatencyLpIndex {
    pub n: usize,
    pub s: usize,
    pub t: usize,
    /// `ell[v]`, absent for `s`.
    pub ell: Vec<Option<usize>>,
    pub x: BTreeMap<(usize, usize), usize>,
    pub x3: BTreeMap<(usize, usize, usize), usize>,
    /// `f[v][(u, w)]`; empty for `v = s`.
    pub f: Vec<BTreeMap<(usize, usize), usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyLpSolution {
    pub x: BTreeMap<(usize, usize), Rational>,
    pub x3: BTreeMap<(usize, usize, usize), Rational>,
    /// The `v`-flow for every `v != s`; the entry for `s` is empty.
    pub f: Vec<ArcFlow>,
    /// Latency per node; `ell[s] = 0`.
    pub ell: Vec<Rational>,
    /// `Σ_{v != s} c(v)·ell(v)`.
    pub objective: Rational,
    pub rounds: usize,
    pub cuts: usize,
}

impl LatencyLpSolution {
    pub fn x(&self, u: usize, w: usize) -> Rational {
        self.x.get(&(u, w)).cloned().unwrap_or_default()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let fmt = rational::format;
        let x: BTreeMap<String, String> = self
            .x
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|((u, w), v)| (format!("{u},{w}"), fmt(v)))
            .collect();
        let f: BTreeMap<String, &ArcFlow> = self
            .f
            .iter()
            .enumerate()
            .filter(|(_, fl)| !fl.is_empty())
            .map(|(v, fl)| (v.to_string(), fl))
            .collect();
        json!({
            "objective": fmt(&self.objective),
            "latency": self.ell.iter().map(fmt).collect::<Vec<_>>(),
            "x": x,
            "flows": f,
            "separation_rounds": self.rounds,
            "cuts": self.cuts,
        })
    }
}

/// The latency LP without the set constraints, which are separated lazily.
pub fn build_latency_lp(inst: &MetricInstance) -> Result<LpModel> {
    Ok(build_latency_lp_with(inst, LatencyLpOptions::default())?.0)
}

pub fn build_latency_lp_with(
    inst: &MetricInstance,
    opts: LatencyLpOptions,
) -> Result<(LpModel, LatencyLpIndex)> {
    let (n, s, t) = (inst.n, inst.s, inst.t);
    if n < 2 {
        return Err(Error::Argument(
            "the latency LP needs at least two nodes".into(),
        ));
    }
    let mut m = LpModel::new();
    let mut idx = LatencyLpIndex {
        n,
        s,
        t,
        ell: vec![None; n],
        x: BTreeMap::new(),
        x3: BTreeMap::new(),
        f: vec![BTreeMap::new(); n],
    };
    for v in (0..n).filter(|&v| v != s) {
        idx.ell[v] = Some(m.add_var(format!("l_{v}")));
    }
    for u in 0..n {
        for w in (0..n).filter(|&w| w != u) {
            idx.x.insert((u, w), m.add_var(format!("x_{u}_{w}")));
        }
    }
    for u in 0..n {
        for v in 0..n {
            for w in 0..n {
                if u != v && v != w && u != w {
                    idx.x3
                        .insert((u, v, w), m.add_var(format!("x_{u}_{v}_{w}")));
                }
            }
        }
    }
    for v in (0..n).filter(|&v| v != s) {
        for u in (0..n).filter(|&u| u != v) {
            for w in (0..n).filter(|&w| w != u && w != s) {
                idx.f[v].insert((u, w), m.add_var(format!("f{v}_{u}_{w}")));
            }
        }
    }

    let one = Rational::one;
    let neg = || -Rational::one();
    let ell = |v: usize| idx.ell[v].expect("v != s");
    for v in (0..n).filter(|&v| v != s) {
        let mut terms = vec![(ell(v), one())];
        terms.extend(
            idx.f[v]
                .iter()
                .map(|(&(u, w), &j)| (j, -inst.dist(u, w).clone())),
        );
        m.add_constraint(format!("flow_len_{v}"), terms, Cmp::Ge, rational::zero())?;
    }
    for (&(u, w, v), &j) in &idx.x3 {
        if v == s {
            continue;
        }
        let len = inst.dist(s, u) + inst.dist(u, w) + inst.dist(w, v);
        m.add_constraint(
            format!("order_len_{u}_{w}_{v}"),
            vec![(ell(v), one()), (j, -len)],
            Cmp::Ge,
            rational::zero(),
        )?;
    }
    for v in (0..n).filter(|&v| v != s && v != t) {
        m.add_constraint(
            format!("last_{v}"),
            vec![(ell(t), one()), (ell(v), neg())],
            Cmp::Ge,
            rational::zero(),
        )?;
    }
    for (&(u, w), &j) in &idx.x {
        for v in (0..n).filter(|&v| v != u && v != w) {
            let terms = vec![
                (j, one()),
                (idx.x3[&(v, u, w)], neg()),
                (idx.x3[&(u, v, w)], neg()),
                (idx.x3[&(u, w, v)], neg()),
            ];
            m.add_constraint(
                format!("triple_{u}_{w}_{v}"),
                terms,
                Cmp::Eq,
                rational::zero(),
            )?;
        }
    }
    for (&(u, w), &j) in &idx.x {
        if u < w {
            m.add_constraint(
                format!("pair_{u}_{w}"),
                vec![(j, one()), (idx.x[&(w, u)], one())],
                Cmp::Eq,
                rational::one(),
            )?;
        }
    }
    for u in (0..n).filter(|&u| u != s) {
        m.add_constraint(
            format!("first_{u}"),
            vec![(idx.x[&(s, u)], one())],
            Cmp::Eq,
            rational::one(),
        )?;
    }
    for u in (0..n).filter(|&u| u != t && u != s) {
        m.add_constraint(
            format!("final_{u}"),
            vec![(idx.x[&(u, t)], one())],
            Cmp::Eq,
            rational::one(),
        )?;
    }
    for v in (0..n).filter(|&v| v != s) {
        let fv = &idx.f[v];
        for u in (0..n).filter(|&u| u != s && u != v) {
            let mut terms: Vec<(usize, Rational)> = fv
                .iter()
                .filter(|((_, b), _)| *b == u)
                .map(|(_, &j)| (j, one()))
                .collect();
            terms.extend(
                fv.iter()
                    .filter(|((a, _), _)| *a == u)
                    .map(|(_, &j)| (j, neg())),
            );
            m.add_constraint(format!("conserve{v}_{u}"), terms, Cmp::Eq, rational::zero())?;
        }
        let src: Vec<_> = fv
            .iter()
            .filter(|((a, _), _)| *a == s)
            .map(|(_, &j)| (j, one()))
            .collect();
        m.add_constraint(format!("source{v}"), src, Cmp::Eq, rational::one())?;
        let snk: Vec<_> = fv
            .iter()
            .filter(|((_, b), _)| *b == v)
            .map(|(_, &j)| (j, one()))
            .collect();
        m.add_constraint(format!("sink{v}"), snk, Cmp::Eq, rational::one())?;
        for u in (0..n).filter(|&u| u != v) {
            let mut terms: Vec<(usize, Rational)> = fv
                .iter()
                .filter(|((a, _), _)| *a == u)
                .map(|(_, &j)| (j, one()))
                .collect();
            terms.push((idx.x[&(u, v)], neg()));
            m.add_constraint(format!("through{v}_{u}"), terms, Cmp::Eq, rational::zero())?;
        }
        if opts.universal_flow && v != t {
            for (arc, &j) in fv {
                if let Some(&jt) = idx.f[t].get(arc) {
                    m.add_constraint(
                        format!("universal{v}_{}_{}", arc.0, arc.1),
                        vec![(j, one()), (jt, neg())],
                        Cmp::Le,
                        rational::zero(),
                    )?;
                }
            }
        }
    }
    let objective = (0..n)
        .filter(|&v| v != s)
        .map(|v| (ell(v), inst.weight(v)))
        .collect();
    m.set_objective(objective)?;
    Ok((m, idx))
}

/// Solves the latency LP to exact optimality, separating the set
/// constraints with max-flow computations.
pub fn solve_latency_lp(inst: &MetricInstance) -> Result<LatencyLpSolution> {
    solve_latency_lp_with(inst, LatencyLpOptions::default())
}

pub fn solve_latency_lp_with(
    inst: &MetricInstance,
    opts: LatencyLpOptions,
) -> Result<LatencyLpSolution> {
    let (model, idx) = build_latency_lp_with(inst, opts)?;
    let mut lp = LpSolver::solve(&model)?;
    let (n, s) = (inst.n, inst.s);
    let cap = crate::lp::round_cap(n);
    let mut rounds = 0;
    let mut cuts = 0;
    let mut seen: BTreeSet<(usize, usize, BTreeSet<usize>)> = BTreeSet::new();
    loop {
        if lp.status() != LpStatus::Optimal {
            return Err(Error::Lp(format!("latency LP became {:?}", lp.status())));
        }
        let sol = extract(&idx, lp.values(), lp.objective().clone(), rounds, cuts);
        let violated = violated_set_constraints(&sol, s);
        if violated.is_empty() {
            lp.verify()?;
            return Ok(sol);
        }
        rounds += 1;
        if rounds > cap {
            return Err(Error::Lp(format!(
                "latency LP separation exceeded {cap} rounds (n = {n}, {cuts} cuts, value {})",
                rational::format(lp.objective())
            )));
        }
        for (v, y, sink_side) in violated {
            if !seen.insert((v, y, sink_side.clone())) {
                return Err(Error::Lp(
                    "separation returned a set constraint already in the model".into(),
                ));
            }
            let mut terms: Vec<(usize, Rational)> = idx.f[v]
                .iter()
                .filter(|((u, w), _)| !sink_side.contains(u) && sink_side.contains(w))
                .map(|(_, &j)| (j, Rational::one()))
                .collect();
            terms.push((idx.x[&(y, v)], -Rational::one()));
            let name = format!("set{v}_{y}_{:?}", sink_side.iter().collect::<Vec<_>>());
            lp.add_row(Constraint {
                name,
                terms,
                cmp: Cmp::Ge,
                rhs: Rational::zero(),
            })?;
            cuts += 1;
        }
    }
}

/// Pairs `(v, y)` whose max `s`-`y` flow under `f^v` is below `x_yv`, with
/// the sink side of a minimum cut.
pub fn violated_set_constraints(
    sol: &LatencyLpSolution,
    s: usize,
) -> Vec<(usize, usize, BTreeSet<usize>)> {
    let n = sol.ell.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .filter(|&v| v != s)
        .flat_map(|v| {
            (0..n)
                .filter(move |&y| y != s && y != v)
                .map(move |y| (v, y))
        })
        .collect();
    let cuts = par::map(&pairs, |&(v, y)| {
        let need = sol.x(y, v);
        if need.is_zero() {
            return None;
        }
        let cut = max_flow_min_cut(&sol.f[v], s, y);
        (cut.value < need).then_some(cut.sink_side)
    });
    pairs
        .into_iter()
        .zip(cuts)
        .filter_map(|((v, y), c)| c.map(|c| (v, y, c)))
        .collect()
}

fn extract(
    idx: &LatencyLpIndex,
    values: &[Rational],
    objective: Rational,
    rounds: usize,
    cuts: usize,
) -> LatencyLpSolution {
    let x = idx
        .x
        .iter()
        .map(|(&k, &j)| (k, values[j].clone()))
        .collect();
    let x3 = idx
        .x3
        .iter()
        .map(|(&k, &j)| (k, values[j].clone()))
        .collect();
    let f = idx
        .f
        .iter()
        .map(|fv| {
            ArcFlow::from_arcs(
                idx.n,
                fv.iter()
                    .filter(|(_, &j)| !values[j].is_zero())
                    .map(|(&a, &j)| (a, values[j].clone())),
            )
        })
        .collect();
    let ell = idx
        .ell
        .iter()
        .map(|j| j.map(|j| values[j].clone()).unwrap_or_default())
        .collect();
    LatencyLpSolution {
        x,
        x3,
        f,
        ell,
        objective,
        rounds,
        cuts,
    }
}

/// Raises every latency to at least `ell(t)/n²` and returns the factor
/// `σ = 1/min ell'` that rescales the smallest latency to 1.
pub fn normalize_latencies(
    sol: &LatencyLpSolution,
    inst: &MetricInstance,
) -> Result<(LatencyLpSolution, Rational)> {
    let (n, s, t) = (inst.n, inst.s, inst.t);
    if let Some(v) = (0..n).find(|&v| v != s && sol.ell[v].is_zero()) {
        return Err(Error::DegenerateLatency(v));
    }
    let floor = &sol.ell[t] / Rational::from_integer(((n * n) as i64).into());
    let mut out = sol.clone();
    for v in (0..n).filter(|&v| v != s) {
        if out.ell[v] < floor {
            out.ell[v] = floor.clone();
        }
    }
    out.objective = (0..n)
        .filter(|&v| v != s)
        .map(|v| inst.weight(v) * &out.ell[v])
        .sum();
    let min = (0..n)
        .filter(|&v| v != s)
        .map(|v| &out.ell[v])
        .min()
        .expect("n >= 2")
        .clone();
    Ok((out, min.recip()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{gen_random, unit_metric};
    use crate::rational::int;

    #[test]
    fn two_nodes() {
        let inst = MetricInstance::from_integers(&[vec![0, 4], vec![4, 0]], 0, 1).unwrap();
        let sol = solve_latency_lp(&inst).unwrap();
        assert_eq!(sol.objective, int(4));
        assert_eq!(sol.x(0, 1), int(1));
        assert_eq!(sol.f[1].get(0, 1), int(1));
    }

    #[test]
    fn three_node_triples() {
        let inst = unit_metric(3, 0, 2).unwrap();
        let (m, idx) = build_latency_lp_with(&inst, LatencyLpOptions::default()).unwrap();
        assert_eq!(idx.x3.len(), 6);
        assert!(m.num_vars() > 6);
        let sol = solve_latency_lp(&inst).unwrap();
        assert!(sol.objective <= int(3));
    }

    #[test]
    fn random_five_is_bounded_and_cut_feasible() {
        let inst = gen_random(5, 3, 10).unwrap();
        let sol = solve_latency_lp(&inst).unwrap();
        assert!(violated_set_constraints(&sol, inst.s).is_empty());
        for ((u, w), v) in &sol.x {
            assert_eq!(v + sol.x(*w, *u), int(1));
        }
    }

    #[test]
    fn universal_flow_only_tightens() {
        let inst = gen_random(5, 8, 10).unwrap();
        let loose = solve_latency_lp(&inst).unwrap();
        let tight = solve_latency_lp_with(
            &inst,
            LatencyLpOptions {
                universal_flow: true,
            },
        )
        .unwrap();
        assert!(tight.objective >= loose.objective);
    }
}
