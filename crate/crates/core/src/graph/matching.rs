use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `assignment[row]` is the column matched to `row`.
    pub assignment: Vec<usize>,
    pub cost: Rational,
}

/// Minimum-cost perfect matching on a square cost matrix.
///
/// `None` cells are forbidden. Shortest augmenting paths with vertex
/// potentials, `O(m³)` exact rational operations. Among equal-cost optima
/// the search prefers lower column indices, so results are deterministic.
pub fn min_cost_perfect_matching(cost: &[Vec<Option<Rational>>]) -> Result<Matching> {
    let m = cost.len();
    if let Some(row) = cost.iter().find(|row| row.len() != m) {
        return Err(Error::Structural(format!(
            "cost matrix row of length {} in {m}x{m} matrix",
            row.len()
        )));
    }
    if m == 0 {
        return Ok(Matching {
            assignment: Vec::new(),
            cost: Rational::zero(),
        });
    }
    // One-based indexing with a virtual column 0, as in the classic
    // formulation of the algorithm.
    let mut u = vec![Rational::zero(); m + 1];
    let mut v = vec![Rational::zero(); m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<Rational>> = vec![None; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta: Option<Rational> = None;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                if let Some(c) = &cost[i0 - 1][j - 1] {
                    let reduced = c - &u[i0] - &v[j];
                    if minv[j].as_ref().is_none_or(|cur| reduced < *cur) {
                        minv[j] = Some(reduced);
                        way[j] = j0;
                    }
                }
                if let Some(mj) = &minv[j] {
                    if delta.as_ref().is_none_or(|d| mj < d) {
                        delta = Some(mj.clone());
                        j1 = j;
                    }
                }
            }
            let Some(delta) = delta else {
                return Err(Error::Infeasible(format!(
                    "no perfect matching avoids the forbidden cells (row {i0})"
                )));
            };
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += &delta;
                    v[j] -= &delta;
                } else if let Some(mj) = &mut minv[j] {
                    *mj -= &delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; m];
    for j in 1..=m {
        assignment[owner[j] - 1] = j - 1;
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(r, &c)| cost[r][c].clone().expect("matched cell is allowed"))
        .sum();
    Ok(Matching {
        assignment,
        cost: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn full(rows: &[&[i64]]) -> Vec<Vec<Option<Rational>>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| Some(int(x))).collect())
            .collect()
    }

    #[test]
    fn diagonal_optimum() {
        let m = min_cost_perfect_matching(&full(&[&[1, 2], &[2, 1]])).unwrap();
        assert_eq!(m.cost, int(2));
        assert_eq!(m.assignment, vec![0, 1]);
    }

    #[test]
    fn single_cell() {
        let m = min_cost_perfect_matching(&full(&[&[0]])).unwrap();
        assert_eq!(m.cost, int(0));
    }

    #[test]
    fn forbidden_cells_respected() {
        let mut c = full(&[&[0, 5], &[5, 0]]);
        c[0][0] = None;
        let m = min_cost_perfect_matching(&c).unwrap();
        assert_eq!(m.assignment, vec![1, 0]);
        assert_eq!(m.cost, int(10));
    }

    #[test]
    fn infeasible_when_a_row_is_blocked() {
        let mut c = full(&[&[1, 1], &[1, 1]]);
        c[1][0] = None;
        c[1][1] = None;
        assert!(matches!(
            min_cost_perfect_matching(&c),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn hall_violation_detected() {
        // Rows 0 and 1 both only allow column 0.
        let c = vec![
            vec![Some(int(1)), None, None],
            vec![Some(int(1)), None, None],
            vec![Some(int(1)), Some(int(1)), Some(int(1))],
        ];
        assert!(min_cost_perfect_matching(&c).is_err());
    }
}
