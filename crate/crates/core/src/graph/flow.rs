use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::metric::MetricInstance;
use crate::rational::{self, Rational};

/// Sparse arc values over nodes `0..n`. Only positive values are stored and
/// self-loops are rejected.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArcFlow {
    n: usize,
    arcs: BTreeMap<(usize, usize), Rational>,
}

impl ArcFlow {
    pub fn new(n: usize) -> Self {
        ArcFlow {
            n,
            arcs: BTreeMap::new(),
        }
    }

    pub fn from_arcs<I>(n: usize, arcs: I) -> Self
    where
        I: IntoIterator<Item = ((usize, usize), Rational)>,
    {
        let mut f = ArcFlow::new(n);
        for ((u, v), x) in arcs {
            f.add(u, v, &x);
        }
        f
    }

    /// Unit flow along each consecutive pair of `walk`.
    pub fn from_walk(n: usize, walk: &[usize], amount: &Rational) -> Self {
        let mut f = ArcFlow::new(n);
        f.add_walk(walk, amount);
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn get(&self, u: usize, v: usize) -> Rational {
        self.arcs
            .get(&(u, v))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.arcs.contains_key(&(u, v))
    }

    /// Adds `amount` (which may be negative) to arc `(u, v)`.
    ///
    /// Panics on a self-loop or if the arc value would become negative.
    pub fn add(&mut self, u: usize, v: usize, amount: &Rational) {
        assert!(u != v, "self-loop ({u}, {u}) in arc flow");
        assert!(u < self.n && v < self.n, "arc ({u}, {v}) out of range");
        if amount.is_zero() {
            return;
        }
        let entry = self.arcs.entry((u, v)).or_insert_with(Rational::zero);
        *entry += amount;
        assert!(!entry.is_negative(), "arc ({u}, {v}) driven negative");
        if entry.is_zero() {
            self.arcs.remove(&(u, v));
        }
    }

    pub fn add_walk(&mut self, walk: &[usize], amount: &Rational) {
        for p in walk.windows(2) {
            self.add(p[0], p[1], amount);
        }
    }

    pub fn add_flow(&mut self, other: &ArcFlow, factor: &Rational) {
        for ((u, v), x) in &other.arcs {
            self.add(*u, *v, &(x * factor));
        }
    }

    pub fn scaled(&self, factor: &Rational) -> ArcFlow {
        let mut f = ArcFlow::new(self.n);
        f.add_flow(self, factor);
        f
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> + '_ {
        self.arcs.iter().map(|(k, v)| (*k, v))
    }

    /// Arcs leaving `u`, in increasing head order.
    pub fn out_arcs(&self, u: usize) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        self.arcs
            .range((u, 0)..(u + 1, 0))
            .map(|((_, v), x)| (*v, x))
    }

    pub fn out_flow(&self, u: usize) -> Rational {
        self.out_arcs(u).map(|(_, x)| x).sum()
    }

    pub fn in_flow(&self, v: usize) -> Rational {
        self.arcs
            .iter()
            .filter(|((_, h), _)| *h == v)
            .map(|(_, x)| x)
            .sum()
    }

    /// Flow balance `out - in` of every node.
    pub fn excess(&self) -> Vec<Rational> {
        let mut e = vec![Rational::zero(); self.n];
        for ((u, v), x) in &self.arcs {
            e[*u] += x;
            e[*v] -= x;
        }
        e
    }

    /// Amount entering each node.
    pub fn inflows(&self) -> Vec<Rational> {
        let mut e = vec![Rational::zero(); self.n];
        for ((_, v), x) in &self.arcs {
            e[*v] += x;
        }
        e
    }

    pub fn cost(&self, inst: &MetricInstance) -> Rational {
        self.arcs
            .iter()
            .map(|((u, v), x)| x * &inst.d[*u][*v])
            .sum()
    }

    pub fn support(&self) -> Vec<(usize, usize)> {
        self.arcs.keys().copied().collect()
    }
}

impl Serialize for ArcFlow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.arcs.len()))?;
        for ((u, v), x) in &self.arcs {
            seq.serialize_element(&(u, v, rational::format(x)))?;
        }
        seq.end()
    }
}

/// A node sequence carrying `amount` units. For cycles the first node is not
/// repeated at the end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedPath {
    pub nodes: Vec<usize>,
    #[serde(with = "rational::serde_rational")]
    pub amount: Rational,
}

impl WeightedPath {
    /// Arcs of the sequence; for cycles include the closing arc.
    pub fn arcs(&self, closed: bool) -> Vec<(usize, usize)> {
        let mut arcs: Vec<_> = self.nodes.windows(2).map(|p| (p[0], p[1])).collect();
        if closed && self.nodes.len() > 1 {
            arcs.push((*self.nodes.last().unwrap(), self.nodes[0]));
        }
        arcs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub cycles: Vec<WeightedPath>,
    pub paths: Vec<WeightedPath>,
}

impl Decomposition {
    /// Sums amount times arc incidence over all cycles and paths.
    pub fn recompose(&self, n: usize) -> ArcFlow {
        let mut f = ArcFlow::new(n);
        for c in &self.cycles {
            for (u, v) in c.arcs(true) {
                f.add(u, v, &c.amount);
            }
        }
        for p in &self.paths {
            for (u, v) in p.arcs(false) {
                f.add(u, v, &p.amount);
            }
        }
        f
    }

    pub fn path_flow(&self, n: usize) -> ArcFlow {
        let mut f = ArcFlow::new(n);
        for p in &self.paths {
            f.add_walk(&p.nodes, &p.amount);
        }
        f
    }

    pub fn cycle_flow(&self, n: usize) -> ArcFlow {
        let mut f = ArcFlow::new(n);
        for c in &self.cycles {
            for (u, v) in c.arcs(true) {
                f.add(u, v, &c.amount);
            }
        }
        f
    }
}

/// Splits `f` into cycles and `s`-`t` paths whose union is acyclic.
///
/// Cycles are extracted first: depth-first from the lowest-index node with
/// outgoing support, following out-arcs in index order, subtracting the
/// bottleneck of each cycle found. The acyclic residual is then peeled into
/// `s`-`t` paths the same way. Every interior node must be balanced and the
/// excess at `s` must equal the deficit at `t`.
pub fn decompose_flow(f: &ArcFlow, s: usize, t: usize) -> Result<Decomposition> {
    let n = f.n();
    let excess = f.excess();
    for (v, e) in excess.iter().enumerate() {
        if v != s && v != t && !e.is_zero() {
            return Err(Error::Contract(format!(
                "node {v} is unbalanced (out - in = {})",
                rational::format(e)
            )));
        }
    }
    if excess[s].is_negative() || excess[s] != -excess[t].clone() {
        return Err(Error::Contract(format!(
            "source excess {} does not match sink deficit {}",
            rational::format(&excess[s]),
            rational::format(&-excess[t].clone())
        )));
    }

    let mut rest = f.clone();
    let mut cycles = Vec::new();
    // Nodes from which no cycle is reachable; arc removal cannot change that.
    let mut done = vec![false; n];
    for start in 0..n {
        while !done[start] {
            match find_cycle_from(&rest, start, &mut done) {
                Some(cycle) => {
                    let amount = closed_arcs(&cycle)
                        .map(|(u, v)| rest.get(u, v))
                        .min()
                        .expect("non-empty cycle");
                    for (u, v) in closed_arcs(&cycle) {
                        rest.add(u, v, &-amount.clone());
                    }
                    cycles.push(WeightedPath {
                        nodes: cycle,
                        amount,
                    });
                }
                None => break,
            }
        }
    }

    let mut paths = Vec::new();
    loop {
        let first = rest.out_arcs(s).next().map(|(v, _)| v);
        let Some(first) = first else { break };
        let mut nodes = vec![s, first];
        let mut cur = first;
        while cur != t {
            let next = rest
                .out_arcs(cur)
                .next()
                .map(|(v, _)| v)
                .ok_or_else(|| Error::Contract(format!("flow strands at node {cur}")))?;
            nodes.push(next);
            cur = next;
            if nodes.len() > n {
                return Err(Error::Contract("path walk did not terminate".into()));
            }
        }
        let amount = nodes
            .windows(2)
            .map(|p| rest.get(p[0], p[1]))
            .min()
            .expect("non-empty path");
        rest.add_walk(&nodes, &-amount.clone());
        paths.push(WeightedPath { nodes, amount });
    }
    if !rest.is_empty() {
        return Err(Error::Contract(format!(
            "{} arcs left after decomposition",
            rest.len()
        )));
    }
    Ok(Decomposition { cycles, paths })
}

fn closed_arcs(cycle: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..cycle.len()).map(move |i| (cycle[i], cycle[(i + 1) % cycle.len()]))
}

/// Iterative DFS from `start`; returns the first cycle closed by a back arc.
/// Nodes fully explored without finding one are marked in `done`.
fn find_cycle_from(f: &ArcFlow, start: usize, done: &mut [bool]) -> Option<Vec<usize>> {
    let n = f.n();
    let mut on_stack = vec![false; n];
    let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    let heads = |u: usize| f.out_arcs(u).map(|(v, _)| v).collect::<Vec<_>>();
    stack.push((start, heads(start), 0));
    on_stack[start] = true;
    loop {
        let next = match stack.last_mut() {
            None => break,
            Some((_, succ, idx)) if *idx < succ.len() => {
                *idx += 1;
                Some(succ[*idx - 1])
            }
            Some(_) => None,
        };
        match next {
            Some(v) if on_stack[v] => {
                let from = stack
                    .iter()
                    .position(|(w, _, _)| *w == v)
                    .expect("on stack");
                return Some(stack[from..].iter().map(|(w, _, _)| *w).collect());
            }
            Some(v) if !done[v] => {
                on_stack[v] = true;
                stack.push((v, heads(v), 0));
            }
            Some(_) => {}
            None => {
                let (u, _, _) = stack.pop().expect("non-empty stack");
                on_stack[u] = false;
                done[u] = true;
            }
        }
    }
    None
}
