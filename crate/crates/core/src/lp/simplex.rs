//! Exact rational simplex on a sparse tableau.
//!
//! Rows are kept as sorted sparse vectors. Phase one minimizes the sum of
//! artificial variables; phase two the model objective. The primal pivot
//! rule is Dantzig's (most negative reduced cost) and switches to Bland's
//! rule after a run of degenerate pivots, which rules out cycling. Rows can
//! be appended to a solved tableau; the dual simplex method then restores
//! primal feasibility, which is how the cutting-plane drivers re-solve.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::model::{Cmp, Constraint, LpModel, LpSolution, LpStatus};
use crate::par;
use crate::rational::Rational;

type Row = Vec<(usize, Rational)>;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;
const MAX_PIVOTS: usize = 2_000_000;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimplexStats {
    pub primal_pivots: usize,
    pub dual_pivots: usize,
    pub bland_pivots: usize,
    pub redundant_rows: usize,
}

/// A solved (or infeasible/unbounded) tableau that accepts extra rows.
#[derive(Debug, Clone)]
pub struct Simplex {
    n_struct: usize,
    ncols: usize,
    rows: Vec<Row>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Row index of each basic column.
    basic_row: Vec<Option<usize>>,
    /// Phase-two cost of every column (zero for slacks).
    cost: Vec<Rational>,
    reduced: Vec<Rational>,
    z: Rational,
    status: LpStatus,
    model: LpModel,
    pub stats: SimplexStats,
}

enum Outcome {
    Optimal,
    Unbounded,
    Infeasible,
}

impl Simplex {
    /// Builds the tableau for `model` and solves it to optimality.
    pub fn solve(model: &LpModel) -> Result<Simplex> {
        let n_struct = model.num_vars();
        let mut rows: Vec<Row> = Vec::with_capacity(model.constraints().len());
        let mut rhs = Vec::with_capacity(model.constraints().len());
        let mut basis = Vec::with_capacity(model.constraints().len());
        let mut ncols = n_struct;
        let mut needs_artificial = Vec::new();

        for c in model.constraints() {
            let mut row: Row = c.terms.clone();
            let mut b = c.rhs.clone();
            let slack = match c.cmp {
                Cmp::Le => Some(Rational::one()),
                Cmp::Ge => Some(-Rational::one()),
                Cmp::Eq => None,
            };
            let slack_col = slack.map(|coef| {
                row.push((ncols, coef));
                ncols += 1;
                ncols - 1
            });
            if b.is_negative() {
                for (_, a) in row.iter_mut() {
                    *a = -a.clone();
                }
                b = -b;
            }
            let slack_is_basic =
                slack_col.is_some_and(|col| row.iter().any(|(j, a)| *j == col && a.is_one()));
            if slack_is_basic {
                basis.push(slack_col.expect("checked"));
            } else {
                basis.push(usize::MAX);
                needs_artificial.push(rows.len());
            }
            rows.push(row);
            rhs.push(b);
        }
        let n_real = ncols;
        for &i in &needs_artificial {
            rows[i].push((ncols, Rational::one()));
            basis[i] = ncols;
            ncols += 1;
        }

        let mut cost = vec![Rational::zero(); n_real];
        for (j, c) in model.objective() {
            cost[*j] = c.clone();
        }

        let mut lp = Simplex {
            n_struct,
            ncols,
            rows,
            rhs,
            basis,
            basic_row: Vec::new(),
            cost,
            reduced: vec![Rational::zero(); ncols],
            z: Rational::zero(),
            status: LpStatus::Optimal,
            model: model.clone(),
            stats: SimplexStats::default(),
        };
        lp.rebuild_basic_row();

        if !needs_artificial.is_empty() {
            // Phase one: minimize the artificial sum.
            for &i in &needs_artificial {
                for (j, a) in &lp.rows[i] {
                    if *j < n_real {
                        lp.reduced[*j] -= a;
                    }
                }
                lp.z += &lp.rhs[i];
            }
            match lp.primal()? {
                Outcome::Optimal => {}
                _ => return Err(Error::Lp("phase one did not reach an optimum".into())),
            }
            if lp.z.is_positive() {
                lp.status = LpStatus::Infeasible;
                return Ok(lp);
            }
            lp.drop_artificials(n_real)?;
        }

        lp.reset_phase_two();
        lp.status = match lp.primal()? {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::Infeasible => LpStatus::Infeasible,
        };
        Ok(lp)
    }

    pub fn status(&self) -> LpStatus {
        self.status
    }

    pub fn objective(&self) -> &Rational {
        &self.z
    }

    pub fn model(&self) -> &LpModel {
        &self.model
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Values of the structural variables at the current basis.
    pub fn values(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }

    pub fn solution(&self) -> LpSolution {
        let values = self.values();
        LpSolution {
            status: self.status,
            objective: self.z.clone(),
            values,
        }
    }

    /// Checks the current solution exactly against every model constraint
    /// and the objective value.
    pub fn verify(&self) -> Result<()> {
        if self.status != LpStatus::Optimal {
            return Ok(());
        }
        let x = self.values();
        if let Some(j) = x.iter().position(|v| v.is_negative()) {
            return Err(Error::Lp(format!(
                "variable {} is negative",
                self.model.var_name(j)
            )));
        }
        if let Some(c) = self.model.first_violation(&x) {
            return Err(Error::Lp(format!(
                "constraint `{}` violated at the reported optimum",
                c.name
            )));
        }
        if self.model.objective_value(&x) != self.z {
            return Err(Error::Lp("objective value does not match the basis".into()));
        }
        Ok(())
    }

    /// Appends `constraint` (over the structural variables) and re-optimizes
    /// with the dual simplex method. Only `<=` and `>=` rows are accepted.
    pub fn add_row(&mut self, constraint: Constraint) -> Result<LpStatus> {
        if self.status != LpStatus::Optimal {
            return Err(Error::Lp(
                "rows can only be added to an optimal tableau".into(),
            ));
        }
        let sign = match constraint.cmp {
            Cmp::Le => Rational::one(),
            Cmp::Ge => -Rational::one(),
            Cmp::Eq => {
                return Err(Error::Lp(
                    "equality rows cannot be added incrementally".into(),
                ))
            }
        };
        // Slack basic: s = b - a.x for <=, s = a.x - b for >=.
        let slack = self.ncols;
        self.ncols += 1;
        self.reduced.push(Rational::zero());
        self.cost.push(Rational::zero());
        self.basic_row.push(None);
        let mut row: Row = constraint
            .terms
            .iter()
            .map(|(j, a)| (*j, a * &sign))
            .collect();
        row.sort_by_key(|e| e.0);
        row.push((slack, Rational::one()));
        let mut b = &constraint.rhs * &sign;
        // Express the row in terms of the non-basic columns.
        let basics: Vec<(usize, Rational)> = row
            .iter()
            .filter_map(|(j, a)| self.basic_row[*j].map(|i| (i, a.clone())))
            .collect();
        for (i, f) in basics {
            row = axpy(&row, &f, &self.rows[i]);
            b -= &f * &self.rhs[i];
        }
        self.rows.push(row);
        self.rhs.push(b);
        self.basis.push(slack);
        self.basic_row[slack] = Some(self.rows.len() - 1);
        self.model.add_constraint(
            constraint.name,
            constraint.terms,
            constraint.cmp,
            constraint.rhs,
        )?;
        self.status = match self.dual()? {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => LpStatus::Infeasible,
            Outcome::Unbounded => LpStatus::Unbounded,
        };
        Ok(self.status)
    }

    fn rebuild_basic_row(&mut self) {
        self.basic_row = vec![None; self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            self.basic_row[b] = Some(i);
        }
    }

    fn entry(&self, i: usize, col: usize) -> Option<&Rational> {
        let row = &self.rows[i];
        row.binary_search_by_key(&col, |e| e.0)
            .ok()
            .map(|k| &row[k].1)
    }

    /// Drives zero-valued artificials out of the basis, deletes rows where
    /// that is impossible (they are redundant) and removes artificial columns.
    fn drop_artificials(&mut self, n_real: usize) -> Result<()> {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= n_real {
                let col = self.rows[i]
                    .iter()
                    .find(|(j, _)| *j < n_real)
                    .map(|(j, _)| *j);
                match col {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        self.rows.remove(i);
                        self.rhs.remove(i);
                        self.basis.remove(i);
                        self.stats.redundant_rows += 1;
                        self.rebuild_basic_row();
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in &mut self.rows {
            row.retain(|(j, _)| *j < n_real);
        }
        self.ncols = n_real;
        self.reduced.truncate(n_real);
        self.rebuild_basic_row();
        Ok(())
    }

    fn reset_phase_two(&mut self) {
        self.reduced = self.cost.clone();
        self.z = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, a) in &self.rows[i] {
                self.reduced[*j] -= &cb * a;
            }
            self.z += &cb * &self.rhs[i];
        }
    }

    fn primal(&mut self) -> Result<Outcome> {
        let mut streak = 0usize;
        loop {
            let bland = streak >= DEGENERATE_STREAK;
            let mut entering: Option<usize> = None;
            for (j, r) in self.reduced.iter().enumerate() {
                if !r.is_negative() || self.basic_row[j].is_some() {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                if entering.is_none_or(|e| *r < self.reduced[e]) {
                    entering = Some(j);
                }
            }
            let Some(col) = entering else {
                return Ok(Outcome::Optimal);
            };
            // Ratio test; ties go to the lowest basic column index.
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let Some(a) = self.entry(i, col) else {
                    continue;
                };
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((row, ratio)) = best else {
                return Ok(Outcome::Unbounded);
            };
            if ratio.is_zero() {
                streak += 1;
            } else {
                streak = 0;
            }
            if bland {
                self.stats.bland_pivots += 1;
            }
            self.pivot(row, col);
            self.stats.primal_pivots += 1;
            self.check_pivot_budget()?;
        }
    }

    fn dual(&mut self) -> Result<Outcome> {
        let mut streak = 0usize;
        loop {
            let bland = streak >= DEGENERATE_STREAK;
            let mut leaving: Option<usize> = None;
            for (i, b) in self.rhs.iter().enumerate() {
                if !b.is_negative() {
                    continue;
                }
                let better = match leaving {
                    None => true,
                    Some(l) if bland => self.basis[i] < self.basis[l],
                    Some(l) => *b < self.rhs[l],
                };
                if better {
                    leaving = Some(i);
                }
            }
            let Some(row) = leaving else {
                return Ok(Outcome::Optimal);
            };
            let mut best: Option<(usize, Rational)> = None;
            for (j, a) in &self.rows[row] {
                if !a.is_negative() || self.basic_row[*j].is_some() {
                    continue;
                }
                let ratio = &self.reduced[*j] / &(-a.clone());
                if best.as_ref().is_none_or(|(_, br)| ratio < *br) {
                    best = Some((*j, ratio));
                }
            }
            let Some((col, ratio)) = best else {
                return Ok(Outcome::Infeasible);
            };
            if ratio.is_zero() {
                streak += 1;
            } else {
                streak = 0;
            }
            if bland {
                self.stats.bland_pivots += 1;
            }
            self.pivot(row, col);
            self.stats.dual_pivots += 1;
            self.check_pivot_budget()?;
        }
    }

    fn check_pivot_budget(&self) -> Result<()> {
        if self.stats.primal_pivots + self.stats.dual_pivots > MAX_PIVOTS {
            return Err(Error::Lp(format!("pivot budget of {MAX_PIVOTS} exhausted")));
        }
        Ok(())
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let a = self.entry(r, col).expect("pivot element present").clone();
        let inv = a.recip();
        let mut prow = std::mem::take(&mut self.rows[r]);
        for (_, x) in prow.iter_mut() {
            *x *= &inv;
        }
        self.rhs[r] *= &inv;
        let prhs = self.rhs[r].clone();
        {
            let prow = &prow;
            let prhs = &prhs;
            let mut work: Vec<(&mut Row, &mut Rational)> =
                self.rows.iter_mut().zip(self.rhs.iter_mut()).collect();
            par::for_each_mut(&mut work, |i, (row, b)| {
                if i == r {
                    return;
                }
                let Ok(k) = row.binary_search_by_key(&col, |e| e.0) else {
                    return;
                };
                let f = row[k].1.clone();
                **row = axpy(row, &f, prow);
                **b -= &f * prhs;
            });
        }
        let f = self.reduced[col].clone();
        if !f.is_zero() {
            for (j, x) in &prow {
                self.reduced[*j] -= &f * x;
            }
            self.z += &f * &prhs;
        }
        self.rows[r] = prow;
        let old = self.basis[r];
        self.basic_row[old] = None;
        self.basis[r] = col;
        self.basic_row[col] = Some(r);
    }
}

/// `row - f * other` on sorted sparse rows, dropping exact zeros.
fn axpy(row: &[(usize, Rational)], f: &Rational, other: &[(usize, Rational)]) -> Row {
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut i, mut k) = (0, 0);
    while i < row.len() || k < other.len() {
        let take_row = k >= other.len() || (i < row.len() && row[i].0 < other[k].0);
        let take_other = i >= row.len() || (k < other.len() && other[k].0 < row[i].0);
        if take_row {
            out.push(row[i].clone());
            i += 1;
        } else if take_other {
            out.push((other[k].0, -(f * &other[k].1)));
            k += 1;
        } else {
            let v = &row[i].1 - f * &other[k].1;
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            k += 1;
        }
    }
    out
}

/// Solves `model` from scratch. Infeasibility and unboundedness are reported
/// in the status; errors mean the solver itself failed.
pub fn tableau_solve(model: &LpModel) -> Result<LpSolution> {
    let lp = Simplex::solve(model)?;
    lp.verify()?;
    Ok(lp.solution())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn model(vars: usize) -> (LpModel, Vec<usize>) {
        let mut m = LpModel::new();
        let ids = (0..vars).map(|j| m.add_var(format!("x{j}"))).collect();
        (m, ids)
    }

    #[test]
    fn single_lower_bound() {
        let (mut m, x) = model(1);
        m.add_constraint("c", vec![(x[0], int(1))], Cmp::Ge, int(3))
            .unwrap();
        m.set_objective(vec![(x[0], int(1))]).unwrap();
        let sol = tableau_solve(&m).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective, int(3));
    }

    #[test]
    fn covering_constraint() {
        let (mut m, x) = model(2);
        m.add_constraint("c", vec![(x[0], int(1)), (x[1], int(1))], Cmp::Ge, int(1))
            .unwrap();
        m.set_objective(vec![(x[0], int(1)), (x[1], int(1))])
            .unwrap();
        assert_eq!(tableau_solve(&m).unwrap().objective, int(1));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let (mut m, x) = model(1);
        m.add_constraint("lo", vec![(x[0], int(1))], Cmp::Ge, int(2))
            .unwrap();
        m.add_constraint("hi", vec![(x[0], int(1))], Cmp::Le, int(1))
            .unwrap();
        assert_eq!(tableau_solve(&m).unwrap().status, LpStatus::Infeasible);

        let (mut m, x) = model(2);
        m.add_constraint("c", vec![(x[0], int(1)), (x[1], int(-1))], Cmp::Eq, int(0))
            .unwrap();
        m.set_objective(vec![(x[0], int(-1))]).unwrap();
        assert_eq!(tableau_solve(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn fractional_optimum() {
        // min -x - y  s.t. 2x + y <= 4, x + 3y <= 6  ->  x = 6/5, y = 8/5.
        let (mut m, x) = model(2);
        m.add_constraint("a", vec![(x[0], int(2)), (x[1], int(1))], Cmp::Le, int(4))
            .unwrap();
        m.add_constraint("b", vec![(x[0], int(1)), (x[1], int(3))], Cmp::Le, int(6))
            .unwrap();
        m.set_objective(vec![(x[0], int(-1)), (x[1], int(-1))])
            .unwrap();
        let sol = tableau_solve(&m).unwrap();
        assert_eq!(sol.values, vec![ratio(6, 5), ratio(8, 5)]);
        assert_eq!(sol.objective, ratio(-14, 5));
    }

    #[test]
    fn redundant_equalities() {
        let (mut m, x) = model(2);
        m.add_constraint("a", vec![(x[0], int(1)), (x[1], int(1))], Cmp::Eq, int(2))
            .unwrap();
        m.add_constraint("b", vec![(x[0], int(2)), (x[1], int(2))], Cmp::Eq, int(4))
            .unwrap();
        m.set_objective(vec![(x[0], int(1)), (x[1], int(2))])
            .unwrap();
        let lp = Simplex::solve(&m).unwrap();
        assert_eq!(lp.status(), LpStatus::Optimal);
        assert_eq!(*lp.objective(), int(2));
        assert_eq!(lp.stats.redundant_rows, 1);
    }

    #[test]
    fn negative_rhs_rows() {
        // -x <= -2 is x >= 2.
        let (mut m, x) = model(1);
        m.add_constraint("c", vec![(x[0], int(-1))], Cmp::Le, int(-2))
            .unwrap();
        m.set_objective(vec![(x[0], int(1))]).unwrap();
        assert_eq!(tableau_solve(&m).unwrap().objective, int(2));
    }

    #[test]
    fn added_row_triggers_dual_simplex() {
        let (mut m, x) = model(2);
        m.add_constraint("c", vec![(x[0], int(1)), (x[1], int(1))], Cmp::Ge, int(1))
            .unwrap();
        m.set_objective(vec![(x[0], int(1)), (x[1], int(2))])
            .unwrap();
        let mut lp = Simplex::solve(&m).unwrap();
        assert_eq!(*lp.objective(), int(1));
        let cut = Constraint {
            name: "y".into(),
            terms: vec![(x[1], int(1))],
            cmp: Cmp::Ge,
            rhs: ratio(1, 2),
        };
        assert_eq!(lp.add_row(cut).unwrap(), LpStatus::Optimal);
        assert_eq!(*lp.objective(), ratio(3, 2));
        assert_eq!(lp.values(), vec![ratio(1, 2), ratio(1, 2)]);
        lp.verify().unwrap();
        let cut = Constraint {
            name: "cap".into(),
            terms: vec![(x[0], int(1)), (x[1], int(1))],
            cmp: Cmp::Le,
            rhs: ratio(1, 3),
        };
        assert_eq!(lp.add_row(cut).unwrap(), LpStatus::Infeasible);
    }

    #[test]
    fn axpy_merges_and_cancels() {
        let a = vec![(0, int(1)), (2, int(3))];
        let b = vec![(1, int(1)), (2, int(1))];
        assert_eq!(axpy(&a, &int(3), &b), vec![(0, int(1)), (1, int(-3))]);
    }
}
