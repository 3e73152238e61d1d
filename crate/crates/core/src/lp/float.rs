//! Dense `f64` tableau simplex. It only proposes a basis; every answer is
//! re-derived and certified in exact arithmetic by the caller.

use crate::lp::standard::{ColKind, StandardForm};
use crate::par;
use crate::rational::to_f64;

const EPS: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;

/// Deterministic right-hand-side shift in `[1e-5, 2e-5)` that breaks the
/// primal degeneracy the order and flow LPs are full of. It is removed
/// again before a basis is reported.
fn perturbation(i: usize) -> f64 {
    let h = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40;
    1e-5 * (1.0 + h as f64 / (1u64 << 24) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FloatStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit or numerical breakdown.
    Failed,
}

#[derive(Debug, Clone)]
pub(crate) struct FloatTableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    reduced: Vec<f64>,
    cost: Vec<f64>,
    artificial: Vec<bool>,
    pub basis: Vec<usize>,
    basic: Vec<bool>,
    /// Unperturbed right-hand side and the column that was the identity
    /// column of each row in the starting tableau.
    orig_b: Vec<f64>,
    unit_col: Vec<usize>,
    /// Devex reference weights per column.
    devex: Vec<f64>,
    pub pivots: usize,
    /// Pivot count at which the current call gives up.
    budget: usize,
}

impl FloatTableau {
    pub fn new(sf: &StandardForm) -> FloatTableau {
        let ncols = sf.ncols();
        let rows: Vec<Vec<f64>> = sf
            .rows
            .iter()
            .map(|r| {
                let mut dense = vec![0.0; ncols];
                for (j, a) in r {
                    dense[*j] = to_f64(a);
                }
                dense
            })
            .collect();
        let mut basic = vec![false; ncols];
        for &j in &sf.start {
            basic[j] = true;
        }
        let m = sf.m();
        FloatTableau {
            rows,
            rhs: sf
                .b
                .iter()
                .enumerate()
                .map(|(i, b)| to_f64(b) + perturbation(i))
                .collect(),
            reduced: vec![0.0; ncols],
            cost: sf.c.iter().map(to_f64).collect(),
            artificial: sf.kind.iter().map(|k| *k == ColKind::Artificial).collect(),
            basis: sf.start.clone(),
            basic,
            devex: vec![1.0; ncols],
            orig_b: sf.b.iter().map(to_f64).collect(),
            unit_col: sf.start.clone(),
            pivots: 0,
            budget: 50 * (m + ncols) + 1000,
        }
    }

    /// Two-phase primal simplex from the slack/artificial basis.
    pub fn solve(&mut self) -> FloatStatus {
        if self.artificial.iter().any(|&a| a) {
            let ncols = self.reduced.len();
            self.reduced = vec![0.0; ncols];
            for (i, &b) in self.basis.iter().enumerate() {
                if self.artificial[b] {
                    for j in 0..ncols {
                        self.reduced[j] -= self.rows[i][j];
                    }
                }
            }
            for j in 0..ncols {
                if self.artificial[j] {
                    self.reduced[j] += 1.0;
                }
            }
            match self.primal(true) {
                FloatStatus::Optimal => {}
                _ => return FloatStatus::Failed,
            }
            // Judged on the unperturbed right-hand side: perturbed redundant
            // rows always leave a residue.
            let exact = self.true_rhs();
            let infeasibility: f64 = self
                .basis
                .iter()
                .enumerate()
                .filter(|(_, &b)| self.artificial[b])
                .map(|(i, _)| exact[i].abs())
                .sum();
            if infeasibility > 1e-6 {
                return FloatStatus::Infeasible;
            }
            self.drive_out_artificials();
        }
        self.reset_costs();
        match self.primal(false) {
            FloatStatus::Optimal => self.unperturb(),
            other => other,
        }
    }

    /// Recomputes the basic values for the unperturbed right-hand side and
    /// repairs any small infeasibility with dual simplex steps.
    fn unperturb(&mut self) -> FloatStatus {
        self.rhs = self.true_rhs();
        self.reoptimize()
    }

    /// Restores primal feasibility after the right-hand side changed or rows
    /// were appended. Dual simplex runs on slightly raised costs so that
    /// ratio ties are rare; the true costs are then restored and any
    /// remaining dual infeasibility is removed by primal steps.
    pub fn reoptimize(&mut self) -> FloatStatus {
        self.budget = self.pivots + 5 * (self.rows.len() + self.reduced.len()) + 1000;
        let ncols = self.reduced.len();
        for j in 0..ncols {
            if !self.basic[j] && !self.artificial[j] {
                self.reduced[j] += perturbation(j + 7919);
            }
        }
        match self.dual() {
            FloatStatus::Optimal => {}
            other => return other,
        }
        self.reset_costs();
        self.primal(false)
    }

    fn true_rhs(&self) -> Vec<f64> {
        let b = &self.orig_b;
        let unit = &self.unit_col;
        let mut rhs = vec![0.0; self.rows.len()];
        let work = rhs.len() * unit.len();
        par::for_each_mut_sized(&mut rhs, work, |r, x| {
            let row = &self.rows[r];
            *x = unit.iter().zip(b).map(|(&j, &bi)| row[j] * bi).sum();
        });
        rhs
    }

    fn drive_out_artificials(&mut self) {
        for i in 0..self.basis.len() {
            if !self.artificial[self.basis[i]] {
                continue;
            }
            let col = (0..self.reduced.len())
                .filter(|&j| !self.artificial[j] && !self.basic[j] && self.rows[i][j].abs() > 1e-7)
                .max_by(|&a, &b| self.rows[i][a].abs().total_cmp(&self.rows[i][b].abs()));
            if let Some(j) = col {
                self.pivot(i, j);
            }
        }
    }

    fn reset_costs(&mut self) {
        let ncols = self.reduced.len();
        self.reduced = self.cost.clone();
        self.devex = vec![1.0; ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                for j in 0..ncols {
                    self.reduced[j] -= cb * self.rows[i][j];
                }
            }
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
    }

    fn primal(&mut self, phase_one: bool) -> FloatStatus {
        let mut streak = 0;
        loop {
            if self.pivots > self.budget {
                return FloatStatus::Failed;
            }
            let bland = streak >= DEGENERATE_STREAK;
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..self.reduced.len() {
                if self.basic[j] || (!phase_one && self.artificial[j]) {
                    continue;
                }
                let r = self.reduced[j];
                if r >= -EPS {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                // Devex: largest r²/w, an approximation of steepest edge.
                let score = r * r / self.devex[j];
                if score > best {
                    entering = Some(j);
                    best = score;
                }
            }
            let Some(col) = entering else {
                return FloatStatus::Optimal;
            };
            let Some((row, ratio)) = self.ratio_test(col, phase_one, bland) else {
                return if phase_one {
                    FloatStatus::Failed
                } else {
                    FloatStatus::Unbounded
                };
            };
            streak = if ratio <= EPS { streak + 1 } else { 0 };
            self.update_devex(row, col);
            self.pivot(row, col);
        }
    }

    fn update_devex(&mut self, r: usize, q: usize) {
        let aq = self.rows[r][q];
        let wq = self.devex[q];
        for (j, &a) in self.rows[r].iter().enumerate() {
            if a != 0.0 && j != q && !self.basic[j] {
                let ratio = a / aq;
                let w = ratio * ratio * wq;
                if w > self.devex[j] {
                    self.devex[j] = w;
                }
            }
        }
        let leaving = self.basis[r];
        self.devex[leaving] = (wq / (aq * aq)).max(1.0);
    }

    fn ratio_test(&self, col: usize, phase_one: bool, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows.len() {
            let a = self.rows[i][col];
            // A basic artificial outside phase one sits at its bound 0.
            let ratio = if !phase_one && self.artificial[self.basis[i]] && a.abs() > EPS {
                0.0
            } else if a > EPS {
                self.rhs[i].max(0.0) / a
            } else {
                continue;
            };
            let better = match best {
                None => true,
                Some((bi, br)) if bland => {
                    ratio < br - EPS || (ratio <= br + EPS && self.basis[i] < self.basis[bi])
                }
                Some((bi, br)) => {
                    ratio < br - EPS
                        || (ratio <= br + EPS
                            && self.rows[i][col].abs() > self.rows[bi][col].abs() + EPS)
                        || (ratio <= br + EPS
                            && (self.rows[i][col].abs() - self.rows[bi][col].abs()).abs() <= EPS
                            && self.basis[i] < self.basis[bi])
                }
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best
    }

    /// Dual simplex from a dual feasible tableau.
    fn dual(&mut self) -> FloatStatus {
        loop {
            if self.pivots > self.budget {
                return FloatStatus::Failed;
            }
            let mut leaving = None;
            let mut worst = -EPS;
            for (i, &b) in self.rhs.iter().enumerate() {
                if b < worst {
                    worst = b;
                    leaving = Some(i);
                }
            }
            let Some(row) = leaving else {
                return FloatStatus::Optimal;
            };
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.reduced.len() {
                let a = self.rows[row][j];
                if self.basic[j] || self.artificial[j] || a >= -EPS {
                    continue;
                }
                let ratio = self.reduced[j].max(0.0) / -a;
                if best.is_none_or(|(bj, br)| {
                    ratio < br - EPS || (ratio <= br + EPS && a < self.rows[row][bj])
                }) {
                    best = Some((j, ratio));
                }
            }
            let Some((col, _)) = best else {
                return FloatStatus::Infeasible;
            };
            self.pivot(row, col);
        }
    }

    /// Appends a row given over the standard-form columns, with its new slack
    /// column `slack` already counted in `row`'s length.
    pub fn add_row(&mut self, sparse: &[(usize, f64)], rhs: f64, slack: usize) {
        let ncols = slack + 1;
        for r in &mut self.rows {
            r.resize(ncols, 0.0);
        }
        self.reduced.resize(ncols, 0.0);
        self.cost.resize(ncols, 0.0);
        self.artificial.resize(ncols, false);
        self.basic.resize(ncols, false);
        self.devex.resize(ncols, 1.0);
        let mut row = vec![0.0; ncols];
        for &(j, a) in sparse {
            row[j] = a;
        }
        let mut b = rhs;
        for (i, &bj) in self.basis.iter().enumerate() {
            let f = row[bj];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(&self.rows[i]) {
                    *x -= f * y;
                }
                b -= f * self.rhs[i];
                row[bj] = 0.0;
            }
        }
        self.rows.push(row);
        self.rhs.push(b);
        self.orig_b.push(rhs);
        self.unit_col.push(slack);
        self.basis.push(slack);
        self.basic[slack] = true;
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let inv = 1.0 / self.rows[r][col];
        let mut prow = std::mem::take(&mut self.rows[r]);
        for x in prow.iter_mut() {
            *x *= inv;
        }
        prow[col] = 1.0;
        self.rhs[r] *= inv;
        let prhs = self.rhs[r];
        {
            let prow = &prow;
            let size = self.rows.len() * prow.len();
            let mut work: Vec<(&mut Vec<f64>, &mut f64)> =
                self.rows.iter_mut().zip(self.rhs.iter_mut()).collect();
            par::for_each_mut_sized(&mut work, size, |i, (row, b)| {
                if i == r {
                    return;
                }
                let f = row[col];
                if f == 0.0 {
                    return;
                }
                for (x, y) in row.iter_mut().zip(prow) {
                    *x -= f * y;
                }
                row[col] = 0.0;
                **b -= f * prhs;
            });
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for (x, y) in self.reduced.iter_mut().zip(&prow) {
                *x -= f * y;
            }
            self.reduced[col] = 0.0;
        }
        self.rows[r] = prow;
        self.basic[self.basis[r]] = false;
        self.basis[r] = col;
        self.basic[col] = true;
        self.pivots += 1;
    }
}
