//! Rectangular maximum-weight assignment.
//!
//! The solver is the shortest-augmenting-path form of the Hungarian method
//! with row/column potentials, run on negated weights. Matrices with more rows
//! than columns are solved transposed, so every call matches
//! `min(rows, cols)` pairs.

use crate::scalar::Scalar;

/// Optimal assignment: `row_to_col[r]` is the column taken by row `r`, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedAssignment<F> {
    pub total: F,
    pub row_to_col: Vec<Option<usize>>,
}

/// Maximum total weight over matchings of size `min(rows, cols)`.
///
/// `weights` must be rectangular. Among optimal assignments the one returned
/// is whatever the augmenting order produces; see
/// [`lexicographic_max_weight_assignment`] for a canonical choice.
pub fn max_weight_assignment<F: Scalar>(weights: &[Vec<F>]) -> WeightedAssignment<F> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    debug_assert!(weights.iter().all(|r| r.len() == cols));
    if rows == 0 || cols == 0 {
        return WeightedAssignment {
            total: F::zero(),
            row_to_col: vec![None; rows],
        };
    }

    let row_to_col = if rows <= cols {
        hungarian_min(rows, cols, |r, c| -weights[r][c])
    } else {
        let col_to_row = hungarian_min(cols, rows, |c, r| -weights[r][c]);
        let mut out = vec![None; rows];
        for (c, r) in col_to_row.into_iter().enumerate() {
            if let Some(r) = r {
                out[r] = Some(c);
            }
        }
        out
    };
    let total = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| weights[r][c]))
        .sum();
    WeightedAssignment { total, row_to_col }
}

/// Optimal assignment with ties broken lexicographically: row 0 takes the
/// lowest column compatible with some optimum, then row 1, and so on; a row
/// is left out only when no column is compatible.
pub fn lexicographic_max_weight_assignment<F: Scalar>(weights: &[Vec<F>]) -> WeightedAssignment<F> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    let best = max_weight_assignment(weights);
    let tol = F::epsilon() * F::lit(64.0) * (F::one() + best.total.abs());

    let mut free_rows: Vec<usize> = (0..rows).collect();
    let mut free_cols: Vec<usize> = (0..cols).collect();
    let mut row_to_col = vec![None; rows];
    let mut target = best.total;

    for r in 0..rows {
        free_rows.retain(|&x| x != r);
        if free_cols.is_empty() {
            break;
        }
        let mut chosen = None;
        for (idx, &c) in free_cols.iter().enumerate() {
            let rest_cols: Vec<usize> = free_cols
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != idx)
                .map(|(_, &x)| x)
                .collect();
            let rest = sub_optimum(weights, &free_rows, &rest_cols);
            if weights[r][c] + rest >= target - tol {
                chosen = Some((idx, c));
                break;
            }
        }
        if let Some((idx, c)) = chosen {
            row_to_col[r] = Some(c);
            target = target - weights[r][c];
            free_cols.remove(idx);
        }
    }

    let total = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| weights[r][c]))
        .sum();
    WeightedAssignment { total, row_to_col }
}

fn sub_optimum<F: Scalar>(weights: &[Vec<F>], rows: &[usize], cols: &[usize]) -> F {
    if rows.is_empty() || cols.is_empty() {
        return F::zero();
    }
    let sub: Vec<Vec<F>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| weights[r][c]).collect())
        .collect();
    max_weight_assignment(&sub).total
}

/// Minimum-cost assignment of every row (`n <= m`) to a distinct column.
fn hungarian_min<F: Scalar>(n: usize, m: usize, cost: impl Fn(usize, usize) -> F) -> Vec<Option<usize>> {
    debug_assert!(n <= m);
    let inf = F::infinity();
    // 1-based with a sentinel column 0, as in the classic formulation.
    let mut u = vec![F::zero(); n + 1];
    let mut v = vec![F::zero(); m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] = u[owner[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
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

    let mut row_to_col = vec![None; n];
    for j in 1..=m {
        if owner[j] != 0 {
            row_to_col[owner[j] - 1] = Some(j - 1);
        }
    }
    row_to_col
}
