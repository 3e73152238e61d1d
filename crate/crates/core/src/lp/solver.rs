//! The LP solver used by the drivers.
//!
//! A floating-point tableau proposes a basis. The basis is then factored in
//! exact arithmetic, primal values and duals are recomputed exactly, and
//! optimality is certified by exact primal and dual feasibility; remaining
//! exact pivots (primal or dual, Bland's rule after a degenerate run) repair
//! any basis the float pass got wrong. If neither repair applies the exact
//! tableau method in [`Simplex`] solves the model from scratch. Reported
//! solutions are therefore exact optima whichever path produced them.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::float::{FloatStatus, FloatTableau};
use crate::lp::lu::SparseLu;
use crate::lp::model::{Cmp, Constraint, LpModel, LpSolution, LpStatus};
use crate::lp::simplex::Simplex;
use crate::lp::standard::{ColKind, StandardForm};
use crate::rational::{to_f64, Rational};

const EXACT_PIVOT_CAP: usize = 20_000;
const DEGENERATE_STREAK: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub float_pivots: usize,
    pub exact_pivots: usize,
    pub factorizations: usize,
    /// Solves that fell back to the exact tableau method.
    pub fallbacks: usize,
}

#[derive(Debug, Clone)]
pub struct LpSolver {
    model: LpModel,
    sf: StandardForm,
    float: Option<FloatTableau>,
    basis: Vec<usize>,
    status: LpStatus,
    values: Vec<Rational>,
    objective: Rational,
    pub stats: SolverStats,
}

enum Crossover {
    Done(LpStatus, Vec<usize>, Vec<Rational>),
    Stuck,
}

impl LpSolver {
    pub fn solve(model: &LpModel) -> Result<LpSolver> {
        let sf = StandardForm::from_model(model);
        let mut float = FloatTableau::new(&sf);
        let fs = float.solve();
        let mut solver = LpSolver {
            model: model.clone(),
            basis: sf.start.clone(),
            sf,
            float: None,
            status: LpStatus::Optimal,
            values: Vec::new(),
            objective: Rational::zero(),
            stats: SolverStats {
                float_pivots: float.pivots,
                ..Default::default()
            },
        };
        if fs == FloatStatus::Optimal {
            let basis = float.basis.clone();
            solver.float = Some(float);
            if solver.try_crossover(basis)? {
                return Ok(solver);
            }
        }
        solver.fallback()?;
        Ok(solver)
    }

    pub fn status(&self) -> LpStatus {
        self.status
    }

    pub fn objective(&self) -> &Rational {
        &self.objective
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn model(&self) -> &LpModel {
        &self.model
    }

    pub fn solution(&self) -> LpSolution {
        LpSolution {
            status: self.status,
            values: self.values.clone(),
            objective: self.objective.clone(),
        }
    }

    /// Re-checks the reported optimum against every model constraint.
    pub fn verify(&self) -> Result<()> {
        if self.status != LpStatus::Optimal {
            return Ok(());
        }
        if let Some(j) = self.values.iter().position(|v| v.is_negative()) {
            return Err(Error::Lp(format!(
                "variable {} is negative",
                self.model.var_name(j)
            )));
        }
        if let Some(c) = self.model.first_violation(&self.values) {
            return Err(Error::Lp(format!(
                "constraint `{}` violated at the reported optimum",
                c.name
            )));
        }
        if self.model.objective_value(&self.values) != self.objective {
            return Err(Error::Lp(
                "objective value does not match the solution".into(),
            ));
        }
        Ok(())
    }

    /// Adds an inequality and re-optimizes.
    pub fn add_row(&mut self, con: Constraint) -> Result<LpStatus> {
        if self.status != LpStatus::Optimal {
            return Err(Error::Lp(
                "rows can only be added to an optimal model".into(),
            ));
        }
        if con.cmp == Cmp::Eq {
            return Err(Error::Lp(
                "equality rows cannot be added incrementally".into(),
            ));
        }
        self.model.add_constraint(
            con.name.clone(),
            con.terms.clone(),
            con.cmp,
            con.rhs.clone(),
        )?;
        let con = self.model.constraints().last().expect("just added").clone();
        let slack = self.sf.add_cut(&con);
        let mut next = self.basis.clone();
        next.push(slack);
        let row = self.sf.rows.last().expect("row added");
        let sparse: Vec<(usize, f64)> = row.iter().map(|(j, a)| (*j, to_f64(a))).collect();
        let rhs = to_f64(self.sf.b.last().expect("row added"));
        if let Some(float) = self.float.as_mut() {
            float.add_row(&sparse, rhs, slack);
            let before = float.pivots;
            let fs = float.reoptimize();
            self.stats.float_pivots += float.pivots - before;
            if fs == FloatStatus::Optimal {
                let basis = float.basis.clone();
                if self.try_crossover(basis)? {
                    return Ok(self.status);
                }
            }
            self.float = None;
            // A fresh float solve is far cheaper than exact pivots.
            let mut fresh = FloatTableau::new(&self.sf);
            let fs = fresh.solve();
            self.stats.float_pivots += fresh.pivots;
            if fs == FloatStatus::Optimal {
                let basis = fresh.basis.clone();
                self.float = Some(fresh);
                if self.try_crossover(basis)? {
                    return Ok(self.status);
                }
                self.float = None;
            }
        }
        if self.try_crossover(next)? {
            return Ok(self.status);
        }
        self.fallback()?;
        Ok(self.status)
    }

    fn try_crossover(&mut self, basis: Vec<usize>) -> Result<bool> {
        match self.crossover(basis)? {
            Crossover::Done(status, basis, xb) => {
                self.status = status;
                let mut values = vec![Rational::zero(); self.sf.n_struct];
                for (p, &j) in basis.iter().enumerate() {
                    if j < self.sf.n_struct {
                        values[j] = xb[p].clone();
                    }
                }
                self.objective = self.model.objective_value(&values);
                self.values = values;
                self.basis = basis;
                Ok(true)
            }
            Crossover::Stuck => Ok(false),
        }
    }

    fn fallback(&mut self) -> Result<()> {
        self.stats.fallbacks += 1;
        self.float = None;
        let lp = Simplex::solve(&self.model)?;
        self.status = lp.status();
        self.values = lp.values();
        self.objective = lp.objective().clone();
        // Later rows re-solve from scratch as well.
        self.basis.clear();
        Ok(())
    }

    fn reduced_costs(&self, y: &[Rational], basic: &[bool]) -> Vec<Option<Rational>> {
        (0..self.sf.ncols())
            .map(|j| {
                if basic[j] || self.sf.kind[j] == ColKind::Artificial {
                    return None;
                }
                let mut d = self.sf.c[j].clone();
                for (i, a) in &self.sf.cols[j] {
                    if !y[*i].is_zero() {
                        d -= &y[*i] * a;
                    }
                }
                Some(d)
            })
            .collect()
    }

    /// Exact certification and repair of a candidate basis.
    fn crossover(&mut self, mut basis: Vec<usize>) -> Result<Crossover> {
        let m = self.sf.m();
        if basis.len() != m {
            return Ok(Crossover::Stuck);
        }
        let mut streak = 0usize;
        for _ in 0..EXACT_PIVOT_CAP {
            let cols: Vec<&[(usize, Rational)]> =
                basis.iter().map(|&j| self.sf.cols[j].as_slice()).collect();
            self.stats.factorizations += 1;
            let Some(lu) = SparseLu::factor(m, &cols) else {
                return Ok(Crossover::Stuck);
            };
            let xb = lu.solve(&self.sf.b);
            if basis
                .iter()
                .zip(&xb)
                .any(|(&j, x)| self.sf.kind[j] == ColKind::Artificial && !x.is_zero())
            {
                return Ok(Crossover::Stuck);
            }
            let cb: Vec<Rational> = basis.iter().map(|&j| self.sf.c[j].clone()).collect();
            let y = lu.solve_transpose(&cb);
            let mut basic = vec![false; self.sf.ncols()];
            for &j in &basis {
                basic[j] = true;
            }
            let d = self.reduced_costs(&y, &basic);
            let primal_ok = xb.iter().all(|x| !x.is_negative());
            let bland = streak >= DEGENERATE_STREAK;
            let negative_d = || -> Option<usize> {
                let mut best: Option<usize> = None;
                for (j, dj) in d.iter().enumerate() {
                    let Some(dj) = dj else { continue };
                    if dj.is_negative() {
                        if bland {
                            return Some(j);
                        }
                        if best.is_none_or(|b| dj < d[b].as_ref().expect("priced")) {
                            best = Some(j);
                        }
                    }
                }
                best
            };
            let entering = negative_d();
            match (primal_ok, entering) {
                (true, None) => return Ok(Crossover::Done(LpStatus::Optimal, basis, xb)),
                (true, Some(q)) => {
                    let mut aq = vec![Rational::zero(); m];
                    for (i, a) in &self.sf.cols[q] {
                        aq[*i] = a.clone();
                    }
                    let col = lu.solve(&aq);
                    let mut best: Option<(usize, Rational)> = None;
                    for p in 0..m {
                        let ratio =
                            if self.sf.kind[basis[p]] == ColKind::Artificial && !col[p].is_zero() {
                                Rational::zero()
                            } else if col[p].is_positive() {
                                &xb[p] / &col[p]
                            } else {
                                continue;
                            };
                        if best.as_ref().is_none_or(|(bp, br)| {
                            ratio < *br || (ratio == *br && basis[p] < basis[*bp])
                        }) {
                            best = Some((p, ratio));
                        }
                    }
                    let Some((p, ratio)) = best else {
                        return Ok(Crossover::Done(LpStatus::Unbounded, basis, xb));
                    };
                    streak = if ratio.is_zero() { streak + 1 } else { 0 };
                    basis[p] = q;
                }
                (false, None) => {
                    // Dual feasible: dual simplex step on the most negative
                    // row, or the lowest-index one under Bland.
                    let mut leave: Option<usize> = None;
                    for p in 0..m {
                        if !xb[p].is_negative() {
                            continue;
                        }
                        let better = match leave {
                            None => true,
                            Some(l) if bland => basis[p] < basis[l],
                            Some(l) => xb[p] < xb[l],
                        };
                        if better {
                            leave = Some(p);
                        }
                    }
                    let p = leave.expect("primal infeasible");
                    let mut e = vec![Rational::zero(); m];
                    e[p] = Rational::from_integer(1.into());
                    let rho = lu.solve_transpose(&e);
                    let mut best: Option<(usize, Rational)> = None;
                    for (j, dj) in d.iter().enumerate() {
                        let Some(dj) = dj else { continue };
                        let alpha: Rational =
                            self.sf.cols[j].iter().map(|(i, a)| &rho[*i] * a).sum();
                        if !alpha.is_negative() {
                            continue;
                        }
                        let ratio = dj / -alpha;
                        if best.as_ref().is_none_or(|(_, br)| ratio < *br) {
                            best = Some((j, ratio));
                        }
                    }
                    let Some((q, ratio)) = best else {
                        return Ok(Crossover::Done(LpStatus::Infeasible, basis, xb));
                    };
                    streak = if ratio.is_zero() { streak + 1 } else { 0 };
                    basis[p] = q;
                }
                (false, Some(_)) => return Ok(Crossover::Stuck),
            }
            self.stats.exact_pivots += 1;
        }
        Ok(Crossover::Stuck)
    }
}

/// Solves `model` exactly. Infeasibility and unboundedness are reported in
/// the status; errors mean the solver itself failed.
pub fn simplex_solve(model: &LpModel) -> Result<LpSolution> {
    let lp = LpSolver::solve(model)?;
    lp.verify()?;
    Ok(lp.solution())
}
