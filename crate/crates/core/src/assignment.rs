//! Exact linear assignment (Hungarian method with row/column potentials,
//! O(rows² · cols)).

use nalgebra::DMatrix;

/// Minimum-cost assignment of every row to a distinct column. Requires
/// `rows <= cols`; returns the column chosen for each row.
fn min_cost_rows(cost: &DMatrix<f64>) -> Vec<usize> {
    let n = cost.nrows();
    let m = cost.ncols();
    debug_assert!(n <= m);
    // 1-based arrays; index 0 is the virtual source column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut owner = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
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
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
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
    let mut row_to_col = vec![0; n];
    for j in 1..=m {
        if owner[j] != 0 {
            row_to_col[owner[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Maximum-weight matching between rows and columns of a rectangular score
/// matrix. Unmatched rows (when `rows > cols`) get `None`; since scores are
/// nonnegative this is the same as padding with zero-score dummies.
pub fn max_weight_assignment(scores: &DMatrix<f64>) -> (Vec<Option<usize>>, f64) {
    let (r, c) = scores.shape();
    if r == 0 || c == 0 {
        return (vec![None; r], 0.0);
    }
    let mut assignment = vec![None; r];
    if r <= c {
        let cols = min_cost_rows(&scores.map(|s| -s));
        for (i, j) in cols.into_iter().enumerate() {
            assignment[i] = Some(j);
        }
    } else {
        let rows = min_cost_rows(&scores.transpose().map(|s| -s));
        for (j, i) in rows.into_iter().enumerate() {
            assignment[i] = Some(j);
        }
    }
    let total = assignment
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| scores[(i, j)]))
        .sum();
    (assignment, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(scores: &DMatrix<f64>) -> f64 {
        fn go(s: &DMatrix<f64>, row: usize, used: &mut Vec<bool>) -> f64 {
            if row == s.nrows() {
                return 0.0;
            }
            // leaving a row unmatched is always allowed
            let mut best = go(s, row + 1, used);
            for j in 0..s.ncols() {
                if !used[j] {
                    used[j] = true;
                    best = best.max(s[(row, j)] + go(s, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        go(scores, 0, &mut vec![false; scores.ncols()])
    }

    #[test]
    fn square_example() {
        let s = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0]);
        let (a, total) = max_weight_assignment(&s);
        assert_eq!(total, brute(&s));
        let mut cols: Vec<usize> = a.iter().map(|c| c.unwrap()).collect();
        cols.sort();
        assert_eq!(cols, vec![0, 1, 2]);
    }

    #[test]
    fn rectangular_both_ways() {
        let s = DMatrix::from_row_slice(2, 4, &[1.0, 9.0, 2.0, 0.5, 8.0, 7.0, 0.0, 3.0]);
        assert_eq!(max_weight_assignment(&s).1, brute(&s));
        let t = s.transpose();
        let (a, total) = max_weight_assignment(&t);
        assert_eq!(total, brute(&t));
        assert_eq!(a.iter().filter(|x| x.is_some()).count(), 2);
    }

    #[test]
    fn empty() {
        let s = DMatrix::<f64>::zeros(0, 3);
        assert_eq!(max_weight_assignment(&s).1, 0.0);
    }
}
