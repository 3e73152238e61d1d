//! Equality standard form `A x = b, x >= 0` shared by the float and exact
//! engines.

use num_traits::{One, Signed, Zero};

use crate::lp::model::{Cmp, Constraint, LpModel};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ColKind {
    Structural,
    Slack,
    Artificial,
}

#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub n_struct: usize,
    /// Sparse columns, `(row, coefficient)` sorted by row.
    pub cols: Vec<Vec<(usize, Rational)>>,
    pub kind: Vec<ColKind>,
    /// Sparse rows, `(column, coefficient)` sorted by column.
    pub rows: Vec<Vec<(usize, Rational)>>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
    /// Starting basis: a slack or artificial column per row.
    pub start: Vec<usize>,
}

impl StandardForm {
    pub fn from_model(model: &LpModel) -> StandardForm {
        let n_struct = model.num_vars();
        let mut sf = StandardForm {
            n_struct,
            cols: vec![Vec::new(); n_struct],
            kind: vec![ColKind::Structural; n_struct],
            rows: Vec::new(),
            b: Vec::new(),
            c: vec![Rational::zero(); n_struct],
            start: Vec::new(),
        };
        for (j, c) in model.objective() {
            sf.c[*j] = c.clone();
        }
        let mut needs_artificial = Vec::new();
        for con in model.constraints() {
            let mut terms = con.terms.clone();
            let mut rhs = con.rhs.clone();
            let slack = match con.cmp {
                Cmp::Le => Some(Rational::one()),
                Cmp::Ge => Some(-Rational::one()),
                Cmp::Eq => None,
            };
            let flip = rhs.is_negative() || (rhs.is_zero() && con.cmp == Cmp::Ge);
            let mut slack = slack;
            if flip {
                for (_, a) in terms.iter_mut() {
                    *a = -a.clone();
                }
                rhs = -rhs;
                slack = slack.map(|s| -s);
            }
            let i = sf.rows.len();
            sf.rows.push(Vec::new());
            sf.b.push(rhs);
            for (j, a) in terms {
                sf.push_entry(i, j, a);
            }
            match slack {
                Some(coef) => {
                    let basic = coef.is_one();
                    let j = sf.new_col(ColKind::Slack);
                    sf.push_entry(i, j, coef);
                    if basic {
                        sf.start.push(j);
                    } else {
                        sf.start.push(usize::MAX);
                        needs_artificial.push(i);
                    }
                }
                None => {
                    sf.start.push(usize::MAX);
                    needs_artificial.push(i);
                }
            }
        }
        for i in needs_artificial {
            let j = sf.new_col(ColKind::Artificial);
            sf.push_entry(i, j, Rational::one());
            sf.start[i] = j;
        }
        for row in &mut sf.rows {
            row.sort_by_key(|e| e.0);
        }
        sf
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    fn new_col(&mut self, kind: ColKind) -> usize {
        self.cols.push(Vec::new());
        self.kind.push(kind);
        self.c.push(Rational::zero());
        self.cols.len() - 1
    }

    fn push_entry(&mut self, i: usize, j: usize, a: Rational) {
        self.cols[j].push((i, a.clone()));
        self.rows[i].push((j, a));
    }

    /// Appends an inequality as `±(a·x) + s = ±rhs` with the slack `s`
    /// entering the basis at the given sign; returns the slack column.
    pub fn add_cut(&mut self, con: &Constraint) -> usize {
        let sign = match con.cmp {
            Cmp::Le => Rational::one(),
            Cmp::Ge | Cmp::Eq => -Rational::one(),
        };
        let i = self.rows.len();
        self.rows.push(Vec::new());
        self.b.push(&con.rhs * &sign);
        for (j, a) in &con.terms {
            self.push_entry(i, *j, a * &sign);
        }
        let s = self.new_col(ColKind::Slack);
        self.push_entry(i, s, Rational::one());
        self.rows[i].sort_by_key(|e| e.0);
        s
    }
}
