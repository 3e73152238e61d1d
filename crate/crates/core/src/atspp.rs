//! Iterated path-cycle covers.
//!
//! [`solve_atspp`] repeatedly covers the active node set by a minimum
//! path-cycle cover, folds the cyclic part into a circulation `H` with one
//! representative per component, and finally threads a path through the
//! acyclic part `F` and splices the cycles of `H` back in. The same loop
//! with `k`-path-cycle covers drives [`solve_k_person`]; [`multipath_cover`]
//! is the simpler variant that deletes covered nodes outright.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::ceil_log2;
use crate::check::CheckLog;
use crate::cover::min_k_path_cycle_cover;
use crate::error::{Error, Result};
use crate::graph::{
    decompose_flow, euler_tour, max_bipartite_matching, reachability, shortcut, topological_order,
    undirected_components, ArcFlow,
};
use crate::metric::MetricInstance;
use crate::rational::{self, Rational};

/// A Hamiltonian `s`-`t` path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamPath {
    pub nodes: Vec<usize>,
    #[serde(with = "rational::serde_rational")]
    pub cost: Rational,
}

/// State of the cover loop after an iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverLoopState {
    pub iteration: usize,
    /// Active node set.
    pub w: Vec<usize>,
    pub labels: Vec<u32>,
    /// Acyclic part as unit `s`-`t` paths.
    pub f: Vec<Vec<usize>>,
    /// Circulation as an arc multiset.
    pub h: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentRecord {
    pub nodes: Vec<usize>,
    /// In-degree within the component, aligned with `nodes`.
    pub in_degree: Vec<usize>,
    pub representative: usize,
    /// Label of the representative after the update.
    pub label: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    #[serde(with = "rational::serde_rational")]
    pub cover_cost: Rational,
    pub cover_paths: Vec<Vec<usize>>,
    pub cover_cycles: Vec<Vec<usize>>,
    pub components: Vec<ComponentRecord>,
    pub state: CoverLoopState,
}

#[derive(Debug, Clone, Serialize)]
pub struct AtsppRun {
    pub path: HamPath,
    pub iterations: usize,
    #[serde(with = "rational::serde_rational_vec")]
    pub cover_costs: Vec<Rational>,
    pub trace: Vec<IterationRecord>,
    pub checks: CheckLog,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultipathRun {
    pub paths: Vec<Vec<usize>>,
    #[serde(with = "rational::serde_rational")]
    pub cost: Rational,
    pub iterations: usize,
    #[serde(with = "rational::serde_rational_vec")]
    pub cover_costs: Vec<Rational>,
    pub checks: CheckLog,
}

#[derive(Debug, Clone, Serialize)]
pub struct KPersonRun {
    pub paths: Vec<Vec<usize>>,
    #[serde(with = "rational::serde_rational")]
    pub cost: Rational,
    pub iterations: usize,
    #[serde(with = "rational::serde_rational_vec")]
    pub cover_costs: Vec<Rational>,
    /// Chains found by the comparability matching, before padding.
    pub chains: usize,
    /// Largest number of times one arc of `F` is used when every chain
    /// step is routed along `F`.
    pub max_arc_use: usize,
    pub trace: Vec<IterationRecord>,
    pub checks: CheckLog,
}

/// Default iteration count `2⌈log₂ n⌉ + 1`.
pub fn default_iterations(n: usize) -> usize {
    2 * ceil_log2(n) as usize + 1
}

/// Default iteration count `(k+1)⌈log₂ n⌉ + 1` for the k-person algorithm.
pub fn k_person_iterations(n: usize, k: usize) -> usize {
    (k + 1) * ceil_log2(n) as usize + 1
}

fn as_count(q: &Rational) -> Result<usize> {
    if !q.is_integer() {
        return Err(Error::assertion(
            "integral flow",
            format!("flow amount {} is fractional", rational::format(q)),
        ));
    }
    q.to_integer()
        .to_usize()
        .ok_or_else(|| Error::assertion("integral flow", "flow amount out of range"))
}

struct LoopOutcome {
    w: BTreeSet<usize>,
    f: Vec<Vec<usize>>,
    h: Vec<(usize, usize)>,
    cover_costs: Vec<Rational>,
}

/// Main loop shared by the single- and k-person algorithms.
fn cover_loop(
    inst: &MetricInstance,
    k: usize,
    iters: usize,
    checks: &mut CheckLog,
    trace: &mut Vec<IterationRecord>,
) -> Result<LoopOutcome> {
    let (n, s, t) = (inst.n, inst.s, inst.t);
    let lg = ceil_log2(n);
    let one = Rational::one();
    let mut w: BTreeSet<usize> = (0..n).collect();
    let mut labels = vec![0u32; n];
    let mut f: Vec<Vec<usize>> = Vec::new();
    let mut h: Vec<(usize, usize)> = Vec::new();
    let mut cover_costs = Vec::with_capacity(iters);

    for iteration in 1..=iters {
        let wv: Vec<usize> = w.iter().copied().collect();
        let cover = min_k_path_cycle_cover(inst, &wv, k)?;
        cover_costs.push(cover.cost.clone());

        let mut flow = ArcFlow::new(n);
        for p in &f {
            flow.add_walk(p, &one);
        }
        flow.add_flow(&cover.arcs(n), &one);
        let dec = decompose_flow(&flow, s, t)?;

        let mut paths = Vec::new();
        for p in &dec.paths {
            for _ in 0..as_count(&p.amount)? {
                paths.push(p.nodes.clone());
            }
        }
        let mut cyclic = Vec::new();
        for c in &dec.cycles {
            let times = as_count(&c.amount)?;
            for arc in c.arcs(true) {
                cyclic.extend(std::iter::repeat_n(arc, times));
            }
        }

        let mut components = Vec::new();
        for nodes in undirected_components(&cyclic) {
            let members: BTreeSet<usize> = nodes.iter().copied().collect();
            checks.require("component inside W", members.is_subset(&w), || {
                format!("iteration {iteration}: component {nodes:?} leaves W")
            })?;
            let arcs: Vec<(usize, usize)> = cyclic
                .iter()
                .copied()
                .filter(|(u, _)| members.contains(u))
                .collect();
            let in_degree: Vec<usize> = nodes
                .iter()
                .map(|&v| arcs.iter().filter(|a| a.1 == v).count())
                .collect();
            let ones = in_degree.iter().filter(|&&d| d == 1).count();
            checks.require("two in-degree-one nodes per component", ones >= 2, || {
                format!("iteration {iteration}: component {nodes:?} has in-degrees {in_degree:?}")
            })?;
            let (pos, &rep) = nodes
                .iter()
                .enumerate()
                .min_by_key(|&(i, &v)| (labels[v] as usize + in_degree[i], v))
                .expect("component is non-empty");
            labels[rep] += in_degree[pos] as u32;
            checks.require("label bound", labels[rep] <= lg, || {
                format!(
                    "iteration {iteration}: label of {rep} reached {} > {lg}",
                    labels[rep]
                )
            })?;
            let dropped: BTreeSet<usize> = members.iter().copied().filter(|&v| v != rep).collect();
            for p in &mut paths {
                p.retain(|v| !dropped.contains(v));
            }
            w.retain(|v| !dropped.contains(v));
            h.extend(arcs);
            components.push(ComponentRecord {
                nodes,
                in_degree,
                representative: rep,
                label: labels[rep],
            });
        }
        f = paths;

        let wv: Vec<usize> = w.iter().copied().collect();
        let f_arcs = path_arcs(&f);
        let acyclic = topological_order(&wv, &f_arcs);
        checks.require("F acyclic on W", acyclic.is_ok(), || {
            format!("iteration {iteration}: {:?}", acyclic.err())
        })?;
        let balanced = is_balanced(&h);
        checks.require("H balanced", balanced, || {
            format!("iteration {iteration}: H is not a circulation")
        })?;
        let touched: BTreeSet<usize> = h.iter().flat_map(|&(u, v)| [u, v]).collect();
        let missing: Vec<usize> = (0..n)
            .filter(|v| !w.contains(v) && !touched.contains(v))
            .collect();
        checks.require("every node in W or H", missing.is_empty(), || {
            format!("iteration {iteration}: nodes {missing:?} lost")
        })?;

        trace.push(IterationRecord {
            cover_cost: cover.cost,
            cover_paths: cover.paths,
            cover_cycles: cover.cycles,
            components,
            state: CoverLoopState {
                iteration,
                w: wv,
                labels: labels.clone(),
                f: f.clone(),
                h: h.clone(),
            },
        });
    }

    // Every pass adds a unit through each active interior node and the
    // representatives lose exactly what their labels gain.
    for &v in w.iter().filter(|&&v| v != s && v != t) {
        let through = f.iter().filter(|p| p.contains(&v)).count();
        let expected = iters as i64 - labels[v] as i64;
        checks.require(
            "F paths through v equal T minus label",
            through as i64 == expected,
            || format!("node {v}: {through} paths, T - l_v = {expected}"),
        )?;
    }
    Ok(LoopOutcome {
        w,
        f,
        h,
        cover_costs,
    })
}

fn path_arcs(paths: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let set: BTreeSet<(usize, usize)> = paths
        .iter()
        .flat_map(|p| p.windows(2).map(|a| (a[0], a[1])))
        .collect();
    set.into_iter().collect()
}

fn is_balanced(arcs: &[(usize, usize)]) -> bool {
    let mut bal: BTreeMap<usize, i64> = BTreeMap::new();
    for &(u, v) in arcs {
        *bal.entry(u).or_default() += 1;
        *bal.entry(v).or_default() -= 1;
    }
    bal.values().all(|&b| b == 0)
}

/// Splices every component of `h` into the path holding its unique node of
/// `w`: follow the path to that node, go once around the shortcut Euler
/// tour of the component, continue along the path.
fn splice_circulation(
    paths: &mut [Vec<usize>],
    h: &[(usize, usize)],
    w: &BTreeSet<usize>,
    checks: &mut CheckLog,
) -> Result<()> {
    for nodes in undirected_components(h) {
        if nodes.len() < 2 {
            continue;
        }
        let shared: Vec<usize> = nodes.iter().copied().filter(|v| w.contains(v)).collect();
        checks.require("one shared node per H component", shared.len() == 1, || {
            format!("H component {nodes:?} meets W in {shared:?}")
        })?;
        let v = shared[0];
        let members: BTreeSet<usize> = nodes.iter().copied().collect();
        let arcs: Vec<(usize, usize)> = h
            .iter()
            .copied()
            .filter(|(a, _)| members.contains(a))
            .collect();
        let tour = euler_tour(&arcs, v)
            .map_err(|e| Error::assertion("H component Eulerian", e.to_string()))?;
        let walk: Vec<usize> = std::iter::once(v).chain(tour.iter().map(|a| a.1)).collect();
        let cycle = shortcut(&walk);
        let Some((p, pos)) = paths
            .iter()
            .enumerate()
            .find_map(|(i, p)| p.iter().position(|&x| x == v).map(|pos| (i, pos)))
        else {
            return Err(Error::assertion(
                "representative on a path",
                format!("node {v} is on no path"),
            ));
        };
        paths[p].splice(pos + 1..pos + 1, cycle[1..].iter().copied());
    }
    Ok(())
}

/// The iterated cover algorithm for ATSPP. `iters` overrides the default
/// `2⌈log₂ n⌉ + 1` iterations; fewer may make the final threading fail,
/// which is reported as an assertion error.
pub fn solve_atspp(inst: &MetricInstance, iters: Option<usize>) -> Result<AtsppRun> {
    let mut trace = Vec::new();
    run_atspp(inst, iters, &mut trace).map_err(|e| e.with_trace(&trace))
}

fn run_atspp(
    inst: &MetricInstance,
    iters: Option<usize>,
    trace: &mut Vec<IterationRecord>,
) -> Result<AtsppRun> {
    let n = inst.n;
    if n < 2 {
        return Err(Error::Argument(format!("need n >= 2, got {n}")));
    }
    let (s, t) = (inst.s, inst.t);
    if iters == Some(0) {
        return Err(Error::Argument("at least one iteration is needed".into()));
    }
    let iters = iters.unwrap_or_else(|| default_iterations(n));
    let mut checks = CheckLog::new();
    let out = cover_loop(inst, 1, iters, &mut checks, trace)?;

    let wv: Vec<usize> = out.w.iter().copied().collect();
    let f_arcs = path_arcs(&out.f);
    let order = topological_order(&wv, &f_arcs)
        .map_err(|e| Error::assertion("F acyclic on W", e.to_string()))?;
    checks.require(
        "threaded path runs from s to t",
        order.first() == Some(&s) && order.last() == Some(&t),
        || format!("order {order:?}"),
    )?;
    let arc_set: BTreeSet<(usize, usize)> = f_arcs.into_iter().collect();
    for pair in order.windows(2) {
        checks.require(
            "consecutive pair is an F arc",
            arc_set.contains(&(pair[0], pair[1])),
            || format!("({}, {}) has no flow in F", pair[0], pair[1]),
        )?;
    }
    let mut paths = vec![order];
    splice_circulation(&mut paths, &out.h, &out.w, &mut checks)?;
    let nodes = shortcut(&paths[0]);
    check_hamiltonian(inst, &nodes, &mut checks)?;
    let cost = inst.walk_cost(&nodes);
    let total: Rational = out.cover_costs.iter().sum();
    checks.require("cost within total cover cost", cost <= total, || {
        format!(
            "path cost {} > cover total {}",
            rational::format(&cost),
            rational::format(&total)
        )
    })?;
    Ok(AtsppRun {
        path: HamPath { nodes, cost },
        iterations: iters,
        cover_costs: out.cover_costs,
        trace: std::mem::take(trace),
        checks,
    })
}

fn check_hamiltonian(inst: &MetricInstance, nodes: &[usize], checks: &mut CheckLog) -> Result<()> {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    let ok = nodes.first() == Some(&inst.s)
        && nodes.last() == Some(&inst.t)
        && sorted.iter().copied().eq(0..inst.n);
    checks.require("hamiltonian s-t path", ok, || format!("{nodes:?}"))
}

/// Covers all nodes by at most `k⌈log₂ n⌉` paths from `s` to `t`.
///
/// Each round takes a minimum `k`-path-cycle cover of the active set, drops
/// every path node and all but the lowest-index node of every cycle. The
/// union of all covers plus one dummy `t → s` arc per path is Eulerian;
/// cutting its Euler tour at the dummy arcs gives the paths.
pub fn multipath_cover(inst: &MetricInstance, k: usize) -> Result<MultipathRun> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    let (n, s, t) = (inst.n, inst.s, inst.t);
    let mut checks = CheckLog::new();
    let mut w: BTreeSet<usize> = (0..n).collect();
    let mut arcs: Vec<(usize, usize)> = Vec::new();
    let mut cover_costs = Vec::new();
    loop {
        let wv: Vec<usize> = w.iter().copied().collect();
        let cover = min_k_path_cycle_cover(inst, &wv, k)?;
        cover_costs.push(cover.cost.clone());
        let before = w.len() - 2;
        for p in &cover.paths {
            arcs.extend(p.windows(2).map(|a| (a[0], a[1])));
            for v in &p[1..p.len() - 1] {
                w.remove(v);
            }
        }
        for c in &cover.cycles {
            arcs.extend((0..c.len()).map(|i| (c[i], c[(i + 1) % c.len()])));
            let rep = *c.iter().min().expect("cycle is non-empty");
            for v in c.iter().filter(|&&v| v != rep) {
                w.remove(v);
            }
        }
        let after = w.len() - 2;
        checks.require("W at least halves", 2 * after <= before, || {
            format!("{before} -> {after} interior nodes")
        })?;
        if after == 0 {
            break;
        }
    }
    let iterations = cover_costs.len();
    let lg = (ceil_log2(n) as usize).max(1);
    checks.require("iterations at most log n", iterations <= lg, || {
        format!("{iterations} > {lg}")
    })?;

    arcs.extend(std::iter::repeat_n((t, s), k * iterations));
    let tour = euler_tour(&arcs, s)
        .map_err(|e| Error::assertion("cover union Eulerian and connected", e.to_string()))?;
    checks.require("cover union Eulerian and connected", true, String::new)?;
    let mut paths = Vec::new();
    let mut walk = vec![s];
    for (u, v) in tour {
        if (u, v) == (t, s) {
            paths.push(shortcut(&walk));
            walk = vec![s];
        } else {
            walk.push(v);
        }
    }
    checks.require("tour closes with a dummy arc", walk == [s], || {
        format!("dangling walk {walk:?}")
    })?;
    checks.require(
        "path count",
        paths.len() == k * iterations && paths.len() <= k * lg,
        || format!("{} paths, k = {k}, {iterations} rounds", paths.len()),
    )?;
    let covered: BTreeSet<usize> = paths.iter().flatten().copied().collect();
    checks.require("every node covered", covered.len() == n, || {
        format!("covered {covered:?}")
    })?;
    let cost: Rational = paths.iter().map(|p| inst.walk_cost(p)).sum();
    let total: Rational = cover_costs.iter().sum();
    checks.require("cost within total cover cost", cost <= total, || {
        format!("{} > {}", rational::format(&cost), rational::format(&total))
    })?;
    Ok(MultipathRun {
        paths,
        cost,
        iterations,
        cover_costs,
        checks,
    })
}

/// k-person ATSPP: the cover loop with `k`-path-cycle covers, then a chain
/// partition of the comparability order of `F` by bipartite matching.
pub fn solve_k_person(inst: &MetricInstance, k: usize, iters: Option<usize>) -> Result<KPersonRun> {
    let mut trace = Vec::new();
    run_k_person(inst, k, iters, &mut trace).map_err(|e| e.with_trace(&trace))
}

fn run_k_person(
    inst: &MetricInstance,
    k: usize,
    iters: Option<usize>,
    trace: &mut Vec<IterationRecord>,
) -> Result<KPersonRun> {
    let (n, s, t) = (inst.n, inst.s, inst.t);
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::Argument(format!("need n >= 2, got {n}")));
    }
    if iters == Some(0) {
        return Err(Error::Argument("at least one iteration is needed".into()));
    }
    let iters = iters.unwrap_or_else(|| k_person_iterations(n, k));
    let mut checks = CheckLog::new();
    let out = cover_loop(inst, k, iters, &mut checks, trace)?;

    let interior: Vec<usize> = out
        .w
        .iter()
        .copied()
        .filter(|&v| v != s && v != t)
        .collect();
    let f_arcs = path_arcs(&out.f);
    let reach =
        reachability(n, &f_arcs).map_err(|e| Error::assertion("F acyclic on W", e.to_string()))?;
    let adj: Vec<Vec<usize>> = interior
        .iter()
        .map(|&u| {
            (0..interior.len())
                .filter(|&j| reach[u][interior[j]])
                .collect()
        })
        .collect();
    let matched = max_bipartite_matching(&adj, interior.len());
    let mut has_pred = vec![false; interior.len()];
    for y in matched.iter().flatten() {
        has_pred[*y] = true;
    }
    let mut chains: Vec<Vec<usize>> = Vec::new();
    for start in (0..interior.len()).filter(|&i| !has_pred[i]) {
        let mut chain = vec![interior[start]];
        let mut cur = start;
        while let Some(next) = matched[cur] {
            chain.push(interior[next]);
            cur = next;
        }
        chains.push(chain);
    }
    let chain_count = chains.len();
    checks.require("at most k chains", chain_count <= k, || {
        format!(
            "{chain_count} chains for k = {k} ({} active interior nodes)",
            interior.len()
        )
    })?;

    let mut paths: Vec<Vec<usize>> = chains
        .into_iter()
        .map(|c| {
            std::iter::once(s)
                .chain(c)
                .chain(std::iter::once(t))
                .collect()
        })
        .collect();
    paths.resize(k, vec![s, t]);

    // Routing every chain step along F instead of the direct arc bounds the
    // cost by arc usage; record how often each F arc would be used.
    let mut usage: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for p in paths.iter().filter(|p| p.len() > 2) {
        for pair in p.windows(2) {
            let route = route_in(&f_arcs, pair[0], pair[1]);
            checks.require("chain step routable in F", route.is_some(), || {
                format!("no F path from {} to {}", pair[0], pair[1])
            })?;
            for arc in route.unwrap_or_default() {
                *usage.entry(arc).or_default() += 1;
            }
        }
    }
    let max_arc_use = usage.values().copied().max().unwrap_or(0);
    checks.note("F arc used at most k times", max_arc_use <= k, || {
        format!("an arc of F is used {max_arc_use} times")
    });

    splice_circulation(&mut paths, &out.h, &out.w, &mut checks)?;
    let paths: Vec<Vec<usize>> = paths.iter().map(|p| shortcut(p)).collect();
    let mut seen = vec![0usize; n];
    for p in &paths {
        for &v in &p[1..p.len() - 1] {
            seen[v] += 1;
        }
    }
    let ok = paths
        .iter()
        .all(|p| p.len() >= 2 && p[0] == s && p[p.len() - 1] == t)
        && (0..n).filter(|&v| v != s && v != t).all(|v| seen[v] == 1);
    checks.require(
        "k paths cover every node once",
        ok && paths.len() == k,
        || format!("{paths:?}"),
    )?;
    let cost: Rational = paths.iter().map(|p| inst.walk_cost(p)).sum();
    let total: Rational = out.cover_costs.iter().sum();
    checks.note(
        "cost within k times total cover cost",
        cost <= rational::int(k as i64) * &total,
        || {
            format!(
                "{} > {k} * {}",
                rational::format(&cost),
                rational::format(&total)
            )
        },
    );
    Ok(KPersonRun {
        paths,
        cost,
        iterations: iters,
        cover_costs: out.cover_costs,
        chains: chain_count,
        max_arc_use,
        trace: std::mem::take(trace),
        checks,
    })
}

/// Fewest-arc route from `a` to `b` over `arcs`, lowest indices first.
fn route_in(arcs: &[(usize, usize)], a: usize, b: usize) -> Option<Vec<(usize, usize)>> {
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, v) in arcs {
        succ.entry(u).or_default().push(v);
    }
    let mut pred: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([a]);
    while let Some(u) = queue.pop_front() {
        if u == b {
            break;
        }
        for &v in succ.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            if v != a && !pred.contains_key(&v) {
                pred.insert(v, u);
                queue.push_back(v);
            }
        }
    }
    if a != b && !pred.contains_key(&b) {
        return None;
    }
    let mut route = Vec::new();
    let mut cur = b;
    while cur != a {
        let p = pred[&cur];
        route.push((p, cur));
        cur = p;
    }
    route.reverse();
    Some(route)
}
