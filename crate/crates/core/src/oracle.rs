//! Exact exponential-time baselines.
//!
//! Subset dynamic programs over the interior nodes (`s` is always first and
//! `t` always last). When all inputs share a small common denominator the
//! tables run on scaled `i128`s; otherwise on rationals. Both are exact.

use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::MetricInstance;
use crate::rational::{self, Rational};

pub const ATSPP_CAP: usize = 18;
pub const LATENCY_CAP: usize = 16;
pub const K_PERSON_CAP: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactResult {
    #[serde(with = "rational::serde_rational")]
    pub value: Rational,
    /// Optimal `s`-`t` paths: one for the single-path problems, exactly `k`
    /// for the k-person problem.
    pub paths: Vec<Vec<usize>>,
}

impl ExactResult {
    pub fn order(&self) -> &[usize] {
        &self.paths[0]
    }
}

trait Value: Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {}
impl<T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T> + Mul<Output = T>> Value for T {}

/// Common-denominator scaling of `xs` to integers, if every scaled value
/// stays below 2^40 so sums of products cannot overflow `i128`.
fn scale(xs: &[&Rational]) -> Option<(BigInt, Vec<i128>)> {
    let lcm = xs.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let limit = BigInt::one() << 40;
    let mut out = Vec::with_capacity(xs.len());
    for q in xs {
        let v = q.numer() * (&lcm / q.denom());
        if v >= limit || v <= -limit.clone() {
            return None;
        }
        out.push(v.to_i128()?);
    }
    Some((lcm, out))
}

fn check_size(inst: &MetricInstance, cap: usize) -> Result<()> {
    if inst.n > cap {
        return Err(Error::TooLarge { n: inst.n, cap });
    }
    Ok(())
}

/// Distance matrix in the chosen number type with its unit.
fn matrices(
    inst: &MetricInstance,
    weighted: bool,
) -> Option<(Vec<Vec<i128>>, Vec<i128>, Rational)> {
    let n = inst.n;
    let flat: Vec<&Rational> = inst.d.iter().flatten().collect();
    let (dl, dv) = scale(&flat)?;
    let weights: Vec<Rational> = (0..n)
        .map(|v| {
            if weighted {
                inst.weight(v)
            } else {
                Rational::one()
            }
        })
        .collect();
    let (wl, wv) = scale(&weights.iter().collect::<Vec<_>>())?;
    let d = dv.chunks(n).map(<[i128]>::to_vec).collect();
    Some((d, wv, Rational::new(BigInt::one(), dl * wl)))
}

fn rational_matrices(inst: &MetricInstance, weighted: bool) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let w = (0..inst.n)
        .map(|v| {
            if weighted {
                inst.weight(v)
            } else {
                Rational::one()
            }
        })
        .collect();
    (inst.d.clone(), w)
}

/// Shared Held-Karp table: `cost[mask][j]` is the cheapest way to start at
/// `s`, visit exactly the interior nodes in `mask` and stop at interior
/// node `j`. `step(mask, j, k)` prices the move from `j` (or `s` when `j`
/// is `None`) to `k` given the visited interior set `mask`.
struct Table<T> {
    cost: Vec<Vec<Option<T>>>,
    parent: Vec<Vec<usize>>,
}

const NONE: usize = usize::MAX;

fn held_karp<T: Value>(m: usize, step: impl Fn(usize, Option<usize>, usize) -> T) -> Table<T> {
    let full = 1usize << m;
    let mut cost: Vec<Vec<Option<T>>> = vec![vec![None; m]; full];
    let mut parent = vec![vec![NONE; m]; full];
    for k in 0..m {
        cost[1 << k][k] = Some(step(0, None, k));
    }
    for mask in 1..full {
        for j in 0..m {
            let Some(base) = cost[mask][j].clone() else {
                continue;
            };
            for k in 0..m {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let c = base.clone() + step(mask, Some(j), k);
                if cost[next][k].as_ref().is_none_or(|cur| c < *cur) {
                    cost[next][k] = Some(c);
                    parent[next][k] = j;
                }
            }
        }
    }
    Table { cost, parent }
}

impl<T: Value> Table<T> {
    /// Best completion of `mask` to `t`, as (value, interior order).
    fn finish(&self, mask: usize, direct: T, to_t: impl Fn(usize) -> T) -> (T, Vec<usize>) {
        if mask == 0 {
            return (direct, Vec::new());
        }
        let mut best: Option<(T, usize)> = None;
        for j in 0..self.cost[mask].len() {
            let Some(c) = self.cost[mask][j].clone() else {
                continue;
            };
            let c = c + to_t(j);
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, j));
            }
        }
        let (value, mut j) = best.expect("non-empty mask is reachable");
        let mut order = Vec::new();
        let mut mask = mask;
        loop {
            order.push(j);
            let p = self.parent[mask][j];
            mask &= !(1 << j);
            if p == NONE {
                break;
            }
            j = p;
        }
        order.reverse();
        (value, order)
    }
}

fn wrap(inst: &MetricInstance, interior: &[usize], order: &[usize]) -> Vec<usize> {
    std::iter::once(inst.s)
        .chain(order.iter().map(|&i| interior[i]))
        .chain(std::iter::once(inst.t))
        .collect()
}

fn atspp_dp<T: Value>(inst: &MetricInstance, d: &[Vec<T>]) -> (T, Vec<usize>) {
    let (s, t) = (inst.s, inst.t);
    let interior = inst.interior();
    let m = interior.len();
    let table = held_karp(m, |_, j, k| {
        d[j.map_or(s, |j| interior[j])][interior[k]].clone()
    });
    let (v, order) = table.finish((1 << m) - 1, d[s][t].clone(), |j| d[interior[j]][t].clone());
    (v, wrap(inst, &interior, &order))
}

/// Cheapest Hamiltonian `s`-`t` path.
pub fn exact_atspp(inst: &MetricInstance) -> Result<ExactResult> {
    check_size(inst, ATSPP_CAP)?;
    let (value, order) = match matrices(inst, false) {
        Some((d, _, unit)) => {
            let (v, o) = atspp_dp(inst, &d);
            (Rational::from_integer(v.into()) * unit, o)
        }
        None => atspp_dp(inst, &inst.d),
    };
    Ok(ExactResult {
        value,
        paths: vec![order],
    })
}

fn latency_dp<T: Value>(inst: &MetricInstance, d: &[Vec<T>], w: &[T]) -> (T, Vec<usize>) {
    let (s, t) = (inst.s, inst.t);
    let interior = inst.interior();
    let m = interior.len();
    let total = (0..inst.n)
        .filter(|&v| v != s)
        .fold(T::zero(), |acc, v| acc + w[v].clone());
    // Weight of the interior nodes in each mask.
    let mut in_mask = vec![T::zero(); 1 << m];
    for mask in 1..(1usize << m) {
        let low = mask.trailing_zeros() as usize;
        in_mask[mask] = in_mask[mask & (mask - 1)].clone() + w[interior[low]].clone();
    }
    // Every node not yet visited waits for the arc being travelled.
    let pending = |mask: usize| total.clone() - in_mask[mask].clone();
    let table = held_karp(m, |mask, j, k| {
        d[j.map_or(s, |j| interior[j])][interior[k]].clone() * pending(mask)
    });
    let full = (1usize << m) - 1;
    let (v, order) = table.finish(full, d[s][t].clone() * w[t].clone(), |j| {
        d[interior[j]][t].clone() * w[t].clone()
    });
    (v, wrap(inst, &interior, &order))
}

/// Minimum total (weighted) latency over Hamiltonian `s`-`t` paths.
pub fn exact_latency(inst: &MetricInstance) -> Result<ExactResult> {
    check_size(inst, LATENCY_CAP)?;
    let (value, order) = match matrices(inst, true) {
        Some((d, w, unit)) => {
            let (v, o) = latency_dp(inst, &d, &w);
            (Rational::from_integer(v.into()) * unit, o)
        }
        None => {
            let (d, w) = rational_matrices(inst, true);
            latency_dp(inst, &d, &w)
        }
    };
    Ok(ExactResult {
        value,
        paths: vec![order],
    })
}

/// Minimum total length of exactly `k` `s`-`t` paths that together visit
/// every interior node once. Unused paths are `[s, t]` and cost `d_st`.
pub fn exact_k_person(inst: &MetricInstance, k: usize) -> Result<ExactResult> {
    check_size(inst, K_PERSON_CAP)?;
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    let (s, t) = (inst.s, inst.t);
    let interior = inst.interior();
    let m = interior.len();
    let d = &inst.d;
    let table = held_karp(m, |_, j, kk| {
        d[j.map_or(s, |j| interior[j])][interior[kk]].clone()
    });
    let full = 1usize << m;
    let single: Vec<(Rational, Vec<usize>)> = (0..full)
        .map(|mask| table.finish(mask, d[s][t].clone(), |j| d[interior[j]][t].clone()))
        .collect();
    // best[j][mask]: cheapest j paths covering mask, with the last part.
    let mut best: Vec<Vec<(Rational, usize)>> = vec![single
        .iter()
        .enumerate()
        .map(|(mask, c)| (c.0.clone(), mask))
        .collect()];
    for _ in 1..k {
        let prev = best.last().expect("non-empty");
        let mut next = Vec::with_capacity(full);
        for mask in 0..full {
            let mut choice = (prev[mask].0.clone() + &single[0].0, 0);
            let mut sub = mask;
            while sub > 0 {
                let c = &single[sub].0 + &prev[mask & !sub].0;
                if c < choice.0 {
                    choice = (c, sub);
                }
                sub = (sub - 1) & mask;
            }
            next.push(choice);
        }
        best.push(next);
    }
    let mut paths = Vec::with_capacity(k);
    let mut mask = full - 1;
    for level in (0..k).rev() {
        let part = best[level][mask].1;
        paths.push(wrap(inst, &interior, &single[part].1));
        mask &= !part;
    }
    let value = best[k - 1][full - 1].0.clone();
    Ok(ExactResult { value, paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{gen_random, gen_weights, unit_metric};
    use crate::rational::{int, ratio};

    #[test]
    fn two_nodes() {
        let inst = MetricInstance::from_integers(&[vec![0, 3], vec![1, 0]], 0, 1).unwrap();
        assert_eq!(exact_atspp(&inst).unwrap().value, int(3));
        assert_eq!(exact_latency(&inst).unwrap().value, int(3));
        let kp = exact_k_person(&inst, 3).unwrap();
        assert_eq!(kp.value, int(9));
        assert_eq!(kp.paths, vec![vec![0, 1]; 3]);
    }

    #[test]
    fn unit_metric_values() {
        assert_eq!(
            exact_atspp(&unit_metric(6, 0, 5).unwrap()).unwrap().value,
            int(5)
        );
        assert_eq!(
            exact_latency(&unit_metric(3, 0, 2).unwrap()).unwrap().value,
            int(3)
        );
    }

    #[test]
    fn weighted_two_nodes() {
        let inst = MetricInstance::from_integers(&[vec![0, 2], vec![2, 0]], 0, 1)
            .unwrap()
            .with_weights(vec![int(1), int(5)])
            .unwrap();
        assert_eq!(exact_latency(&inst).unwrap().value, int(10));
    }

    #[test]
    fn integer_and_rational_paths_agree() {
        let inst = gen_random(7, 2, 30)
            .unwrap()
            .with_weights(gen_weights(7, 2, 4))
            .unwrap();
        let (d, w) = rational_matrices(&inst, true);
        assert_eq!(
            exact_latency(&inst).unwrap().value,
            latency_dp(&inst, &d, &w).0
        );
        assert_eq!(
            exact_atspp(&inst).unwrap().value,
            atspp_dp(&inst, &inst.d).0
        );
        let third = inst.scaled(&ratio(1, 3));
        assert_eq!(
            exact_atspp(&third).unwrap().value,
            exact_atspp(&inst).unwrap().value * ratio(1, 3)
        );
    }

    #[test]
    fn size_caps() {
        assert!(matches!(
            exact_atspp(&unit_metric(19, 0, 1).unwrap()),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            exact_latency(&unit_metric(17, 0, 1).unwrap()),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            exact_k_person(&unit_metric(10, 0, 1).unwrap(), 2),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn order_achieves_value() {
        let inst = gen_random(8, 5, 40).unwrap();
        let r = exact_atspp(&inst).unwrap();
        assert_eq!(inst.walk_cost(r.order()), r.value);
        let kp = exact_k_person(&inst, 2).unwrap();
        let total: Rational = kp.paths.iter().map(|p| inst.walk_cost(p)).sum();
        assert_eq!(total, kp.value);
    }
}
