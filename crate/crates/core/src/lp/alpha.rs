use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{max_flow_min_cut, ArcFlow, MinCut};
use crate::lp::{Cmp, Constraint, LpModel, LpSolver, LpStatus};
use crate::metric::MetricInstance;
use crate::par;
use crate::rational::{self, Rational};

/// Result of the LP(α) cutting-plane loop.
#[derive(Debug, Clone)]
pub struct AlphaLp {
    pub value: Rational,
    pub x: ArcFlow,
    /// Separation rounds that added at least one cut.
    pub rounds: usize,
    pub cuts: usize,
}

/// Cap on separation rounds; the loop aborts with diagnostics beyond it.
pub fn round_cap(n: usize) -> usize {
    10 * n * n
}

/// Arcs carrying an LP(α) variable: no arc enters `s` or leaves `t`.
fn lp_arcs(inst: &MetricInstance) -> Vec<(usize, usize)> {
    let mut arcs = Vec::new();
    for u in 0..inst.n {
        for v in 0..inst.n {
            if u != v && u != inst.t && v != inst.s {
                arcs.push((u, v));
            }
        }
    }
    arcs
}

/// LP column of each arc variable.
pub type ArcVars = BTreeMap<(usize, usize), usize>;

/// The starting model: degree constraints and singleton cuts.
pub fn build_lp_alpha(inst: &MetricInstance, alpha: &Rational) -> Result<(LpModel, ArcVars)> {
    check_alpha(alpha)?;
    let (s, t) = (inst.s, inst.t);
    let mut model = LpModel::new();
    let mut var = BTreeMap::new();
    for (u, v) in lp_arcs(inst) {
        var.insert((u, v), model.add_var(format!("x_{u}_{v}")));
    }
    let one = Rational::one();
    let out_of = |u: usize| -> Vec<(usize, Rational)> {
        var.iter()
            .filter(|((a, _), _)| *a == u)
            .map(|(_, &j)| (j, one.clone()))
            .collect()
    };
    let into = |v: usize| -> Vec<(usize, Rational)> {
        var.iter()
            .filter(|((_, b), _)| *b == v)
            .map(|(_, &j)| (j, one.clone()))
            .collect()
    };
    model.add_constraint("out_s", out_of(s), Cmp::Eq, rational::one())?;
    model.add_constraint("in_t", into(t), Cmp::Eq, rational::one())?;
    for v in inst.interior() {
        let mut terms = into(v);
        terms.extend(out_of(v).into_iter().map(|(j, a)| (j, -a)));
        model.add_constraint(format!("conserve_{v}"), terms, Cmp::Eq, rational::zero())?;
        model.add_constraint(format!("cut_{v}"), into(v), Cmp::Ge, alpha.clone())?;
    }
    model.set_objective(
        var.iter()
            .map(|(&(u, v), &j)| (j, inst.dist(u, v).clone()))
            .collect(),
    )?;
    Ok((model, var))
}

fn check_alpha(alpha: &Rational) -> Result<()> {
    if !alpha.is_positive() || *alpha > Rational::one() {
        return Err(Error::Argument(format!(
            "alpha must lie in (0, 1], got {}",
            rational::format(alpha)
        )));
    }
    Ok(())
}

/// Nodes whose `s`-cut capacity under `x` falls below `alpha`, each with a
/// minimum cut. Empty means every cut set constraint holds.
pub fn most_violated_cuts(x: &ArcFlow, s: usize, alpha: &Rational) -> Vec<(usize, MinCut)> {
    let targets: Vec<usize> = (0..x.n()).filter(|&v| v != s).collect();
    let cuts = par::map(&targets, |&v| max_flow_min_cut(x, s, v));
    targets
        .into_iter()
        .zip(cuts)
        .filter(|(_, c)| c.value < *alpha)
        .collect()
}

/// Minimum over `v != s` of the maximum `s`-`v` flow under `x`.
pub fn min_cut_value(x: &ArcFlow, s: usize) -> Option<Rational> {
    let targets: Vec<usize> = (0..x.n()).filter(|&v| v != s).collect();
    par::map(&targets, |&v| max_flow_min_cut(x, s, v).value)
        .into_iter()
        .min()
}

/// Optimal value and solution of LP(α).
pub fn solve_lp_alpha(inst: &MetricInstance, alpha: &Rational) -> Result<(Rational, ArcFlow)> {
    let r = solve_lp_alpha_detailed(inst, alpha)?;
    Ok((r.value, r.x))
}

pub fn solve_lp_alpha_detailed(inst: &MetricInstance, alpha: &Rational) -> Result<AlphaLp> {
    let (model, var) = build_lp_alpha(inst, alpha)?;
    let mut lp = LpSolver::solve(&model)?;
    let mut rounds = 0;
    let mut cuts = 0;
    let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    loop {
        if lp.status() != LpStatus::Optimal {
            return Err(Error::Lp(format!("LP(alpha) became {:?}", lp.status())));
        }
        let x = to_flow(inst.n, &var, lp.values());
        let violated = most_violated_cuts(&x, inst.s, alpha);
        if violated.is_empty() {
            lp.verify()?;
            return Ok(AlphaLp {
                value: lp.objective().clone(),
                x,
                rounds,
                cuts,
            });
        }
        rounds += 1;
        if rounds > round_cap(inst.n) {
            return Err(Error::Lp(format!(
                "LP(alpha) separation exceeded {} rounds (n = {}, {} cuts, value {})",
                round_cap(inst.n),
                inst.n,
                cuts,
                rational::format(lp.objective())
            )));
        }
        let fresh: BTreeSet<BTreeSet<usize>> =
            violated.into_iter().map(|(_, c)| c.sink_side).collect();
        for sink_side in fresh {
            if !seen.insert(sink_side.clone()) {
                return Err(Error::Lp(
                    "separation returned a cut that is already in the model".into(),
                ));
            }
            let terms: Vec<(usize, Rational)> = var
                .iter()
                .filter(|((u, w), _)| !sink_side.contains(u) && sink_side.contains(w))
                .map(|(_, &j)| (j, Rational::one()))
                .collect();
            let name = format!("cut_{:?}", sink_side.iter().collect::<Vec<_>>());
            lp.add_row(Constraint {
                name,
                terms,
                cmp: Cmp::Ge,
                rhs: alpha.clone(),
            })?;
            cuts += 1;
        }
    }
}

fn to_flow(n: usize, var: &BTreeMap<(usize, usize), usize>, values: &[Rational]) -> ArcFlow {
    ArcFlow::from_arcs(
        n,
        var.iter()
            .filter(|(_, &j)| !values[j].is_zero())
            .map(|(&arc, &j)| (arc, values[j].clone())),
    )
}
