use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::error::{Error, Result};

/// Orders `nodes` so every arc goes forward. Ties are broken by smallest
/// node index, so the order is deterministic.
pub fn topological_order(nodes: &[usize], arcs: &[(usize, usize)]) -> Result<Vec<usize>> {
    let set: BTreeSet<usize> = nodes.iter().copied().collect();
    let mut indeg: BTreeMap<usize, usize> = set.iter().map(|&v| (v, 0)).collect();
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, v) in arcs {
        if !set.contains(&u) || !set.contains(&v) {
            return Err(Error::Contract(format!(
                "arc ({u}, {v}) leaves the node set"
            )));
        }
        *indeg.get_mut(&v).expect("node present") += 1;
        succ.entry(u).or_default().push(v);
    }
    let mut heap: BinaryHeap<Reverse<usize>> = indeg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&v, _)| Reverse(v))
        .collect();
    let mut order = Vec::with_capacity(set.len());
    while let Some(Reverse(u)) = heap.pop() {
        order.push(u);
        for &v in succ.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indeg.get_mut(&v).expect("node present");
            *d -= 1;
            if *d == 0 {
                heap.push(Reverse(v));
            }
        }
    }
    if order.len() < set.len() {
        let left: BTreeSet<usize> = set.iter().copied().filter(|v| indeg[v] > 0).collect();
        return Err(Error::Cyclic(find_cycle(&left, arcs)));
    }
    Ok(order)
}

/// Some cycle among `nodes`, each of which has an in-arc from `nodes`.
fn find_cycle(nodes: &BTreeSet<usize>, arcs: &[(usize, usize)]) -> Vec<usize> {
    // Walk backwards along in-arcs until a node repeats.
    let mut pred: BTreeMap<usize, usize> = BTreeMap::new();
    for &(u, v) in arcs {
        if nodes.contains(&u) && nodes.contains(&v) {
            pred.entry(v).or_insert(u);
        }
    }
    let mut seen: Vec<usize> = Vec::new();
    let mut cur = *nodes.iter().next().expect("non-empty");
    loop {
        if let Some(pos) = seen.iter().position(|&x| x == cur) {
            let mut cycle = seen[pos..].to_vec();
            cycle.reverse();
            return cycle;
        }
        seen.push(cur);
        cur = pred[&cur];
    }
}

/// Closed walk from `start` using every arc of the multiset exactly once
/// (Hierholzer). Every node must be balanced and the support connected.
pub fn euler_tour(arcs: &[(usize, usize)], start: usize) -> Result<Vec<(usize, usize)>> {
    if arcs.is_empty() {
        return Ok(Vec::new());
    }
    let mut balance: BTreeMap<usize, i64> = BTreeMap::new();
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, v) in arcs {
        *balance.entry(u).or_default() += 1;
        *balance.entry(v).or_default() -= 1;
        out.entry(u).or_default().push(v);
    }
    if let Some((v, b)) = balance.iter().find(|(_, &b)| b != 0) {
        return Err(Error::Contract(format!(
            "node {v} is unbalanced ({b:+}) in Euler tour input"
        )));
    }
    if !balance.contains_key(&start) {
        return Err(Error::Contract(format!("start node {start} has no arcs")));
    }
    let components = undirected_components(arcs);
    if components.len() > 1 {
        return Err(Error::Contract(format!(
            "arc support has {} components",
            components.len()
        )));
    }
    // Pop from the back; reverse so lower heads are used first.
    for heads in out.values_mut() {
        heads.reverse();
    }
    let mut stack = vec![start];
    let mut circuit = Vec::with_capacity(arcs.len() + 1);
    while let Some(&u) = stack.last() {
        match out.get_mut(&u).and_then(Vec::pop) {
            Some(v) => stack.push(v),
            None => circuit.push(stack.pop().expect("non-empty")),
        }
    }
    circuit.reverse();
    Ok(circuit.windows(2).map(|p| (p[0], p[1])).collect())
}

/// Keeps the first occurrence of every node and drops later repeats.
pub fn shortcut(walk: &[usize]) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    walk.iter().copied().filter(|v| seen.insert(*v)).collect()
}

/// Transitive closure of an acyclic arc set on nodes `0..n`; `r[u][v]` is
/// true when a nonempty directed path leads from `u` to `v`.
pub fn reachability(n: usize, arcs: &[(usize, usize)]) -> Result<Vec<Vec<bool>>> {
    let all: Vec<usize> = (0..n).collect();
    let order = topological_order(&all, arcs)?;
    let mut succ = vec![Vec::new(); n];
    for &(u, v) in arcs {
        succ[u].push(v);
    }
    let mut reach = vec![vec![false; n]; n];
    for &u in order.iter().rev() {
        for &v in &succ[u] {
            reach[u][v] = true;
            let (lo, hi) = if u < v {
                reach.split_at_mut(v)
            } else {
                reach.split_at_mut(u)
            };
            let (ru, rv) = if u < v {
                (&mut lo[u], &hi[0])
            } else {
                (&mut hi[0], &lo[v])
            };
            for w in 0..n {
                ru[w] |= rv[w];
            }
        }
    }
    Ok(reach)
}

/// Connected components of the undirected support of `arcs`, each sorted,
/// listed by smallest member. Nodes without arcs are not reported.
pub fn undirected_components(arcs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<usize, usize>, x: usize) -> usize {
        let p = *parent.entry(x).or_insert(x);
        if p == x {
            return x;
        }
        let root = find(parent, p);
        parent.insert(x, root);
        root
    }
    for &(u, v) in arcs {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent.insert(a.max(b), a.min(b));
        }
    }
    let nodes: Vec<usize> = parent.keys().copied().collect();
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in nodes {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
    comps.sort_by_key(|c| c[0]);
    comps
}
