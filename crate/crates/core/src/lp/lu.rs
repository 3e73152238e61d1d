//! Sparse exact LU factorization of a square basis matrix.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::rational::Rational;

/// Pivot `(row, column, pivot value, other U entries)`.
type Step = (usize, usize, Rational, Vec<(usize, Rational)>);

#[derive(Debug, Clone)]
pub(crate) struct SparseLu {
    m: usize,
    /// Row operations `row[i] -= l * row[r]`, in application order.
    ops: Vec<(usize, usize, Rational)>,
    steps: Vec<Step>,
}

impl SparseLu {
    /// Factors the matrix whose `k`-th column is `cols[k]` (entries
    /// `(row, value)`). `None` if the matrix is singular.
    pub fn factor(m: usize, cols: &[&[(usize, Rational)]]) -> Option<SparseLu> {
        assert_eq!(cols.len(), m);
        let mut rows: Vec<BTreeMap<usize, Rational>> = vec![BTreeMap::new(); m];
        let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
        for (k, col) in cols.iter().enumerate() {
            for (i, a) in col.iter() {
                if !a.is_zero() {
                    rows[*i].insert(k, a.clone());
                    col_rows[k].insert(*i);
                }
            }
        }
        let mut row_done = vec![false; m];
        let mut col_done = vec![false; m];
        let mut ops = Vec::new();
        let mut steps = Vec::with_capacity(m);
        for _ in 0..m {
            // Markowitz: sparsest column, then sparsest row within it.
            let c = (0..m)
                .filter(|&k| !col_done[k])
                .min_by_key(|&k| (col_rows[k].len(), k))?;
            let r = *col_rows[c].iter().min_by_key(|&&i| (rows[i].len(), i))?;
            let pivot_row = std::mem::take(&mut rows[r]);
            let pv = pivot_row[&c].clone();
            for &k in pivot_row.keys() {
                col_rows[k].remove(&r);
            }
            let others: Vec<usize> = col_rows[c].iter().copied().collect();
            for i in others {
                let l = &rows[i][&c] / &pv;
                for (&k, a) in &pivot_row {
                    let entry = rows[i].entry(k).or_insert_with(Rational::zero);
                    *entry -= &l * a;
                    if entry.is_zero() {
                        rows[i].remove(&k);
                        col_rows[k].remove(&i);
                    } else {
                        col_rows[k].insert(i);
                    }
                }
                ops.push((i, r, l));
            }
            row_done[r] = true;
            col_done[c] = true;
            let u: Vec<(usize, Rational)> =
                pivot_row.into_iter().filter(|(k, _)| *k != c).collect();
            steps.push((r, c, pv, u));
        }
        debug_assert!(row_done.iter().all(|&d| d));
        Some(SparseLu { m, ops, steps })
    }

    /// Solves `B z = b`; `b` is indexed by rows, `z` by columns.
    pub fn solve(&self, b: &[Rational]) -> Vec<Rational> {
        let mut v = b.to_vec();
        for (i, r, l) in &self.ops {
            if !v[*r].is_zero() {
                let d = l * &v[*r];
                v[*i] -= d;
            }
        }
        let mut z = vec![Rational::zero(); self.m];
        for (r, c, pv, u) in self.steps.iter().rev() {
            let mut acc = v[*r].clone();
            for (k, a) in u {
                if !z[*k].is_zero() {
                    acc -= a * &z[*k];
                }
            }
            z[*c] = acc / pv;
        }
        z
    }

    /// Solves `Bᵀ y = c`; `c` is indexed by columns, `y` by rows.
    pub fn solve_transpose(&self, c: &[Rational]) -> Vec<Rational> {
        let mut acc = c.to_vec();
        let mut w = vec![Rational::zero(); self.m];
        for (r, col, pv, u) in &self.steps {
            let wr = &acc[*col] / pv;
            if !wr.is_zero() {
                for (k, a) in u {
                    acc[*k] -= a * &wr;
                }
            }
            w[*r] = wr;
        }
        for (i, r, l) in self.ops.iter().rev() {
            if !w[*i].is_zero() {
                let d = l * &w[*i];
                w[*r] -= d;
            }
        }
        w
    }
}
