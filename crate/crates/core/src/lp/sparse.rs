//! Square sparse linear systems, solved by Gaussian elimination with a
//! Markowitz-style pivot order. Exact for rationals.

use std::collections::{BTreeMap, BTreeSet};

use crate::scalar::Scalar;

pub(crate) fn negligible<T: Scalar>(x: &T) -> bool {
    if T::EXACT {
        x.is_zero()
    } else {
        x.to_f64().abs() < 1e-13
    }
}

/// Solve `M x = rhs` for square `M` given as sparse rows over `n` columns.
/// Returns `None` when `M` is singular.
pub(crate) fn solve_square<T: Scalar>(
    rows: Vec<Vec<(usize, T)>>,
    mut rhs: Vec<T>,
    n: usize,
) -> Option<Vec<T>> {
    if rows.len() != n || rhs.len() != n {
        return None;
    }
    let mut mat: Vec<BTreeMap<usize, T>> = rows
        .into_iter()
        .map(|r| {
            let mut m = BTreeMap::new();
            for (c, v) in r {
                if !negligible(&v) {
                    let e = m.entry(c).or_insert_with(T::zero);
                    *e = e.clone() + v;
                }
            }
            m.retain(|_, v| !negligible(v));
            m
        })
        .collect();
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (r, row) in mat.iter().enumerate() {
        for &c in row.keys() {
            col_rows[c].insert(r);
        }
    }
    let mut active: BTreeSet<usize> = (0..n).collect();
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(n);

    while let Some(&r) = active.iter().min_by_key(|&&r| (mat[r].len(), r)) {
        if mat[r].is_empty() {
            return None;
        }
        let biggest = mat[r]
            .values()
            .map(|v| v.to_f64().abs())
            .fold(0.0f64, f64::max);
        let c = *mat[r]
            .iter()
            .filter(|(_, v)| T::EXACT || v.to_f64().abs() >= 0.01 * biggest)
            .min_by_key(|(c, _)| (col_rows[**c].len(), **c))?
            .0;
        active.remove(&r);
        order.push((r, c));
        let pivot_row: Vec<(usize, T)> = mat[r].iter().map(|(k, v)| (*k, v.clone())).collect();
        let pivot = mat[r][&c].clone();
        let targets: Vec<usize> = col_rows[c]
            .iter()
            .copied()
            .filter(|&k| active.contains(&k))
            .collect();
        for k in targets {
            let factor = mat[k][&c].clone() / pivot.clone();
            for (col, v) in &pivot_row {
                let entry = mat[k].entry(*col).or_insert_with(T::zero);
                *entry = entry.clone() - factor.clone() * v.clone();
                if *col == c || negligible(entry) {
                    mat[k].remove(col);
                    col_rows[*col].remove(&k);
                } else {
                    col_rows[*col].insert(k);
                }
            }
            rhs[k] = rhs[k].clone() - factor * rhs[r].clone();
        }
    }

    let mut x = vec![T::zero(); n];
    for &(r, c) in order.iter().rev() {
        let mut acc = rhs[r].clone();
        for (col, v) in &mat[r] {
            if *col != c {
                acc = acc - v.clone() * x[*col].clone();
            }
        }
        x[c] = acc / mat[r][&c].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn solves_small_system_exactly() {
        // 2x + y = 3, x + 3y = 5  ->  x = 4/5, y = 7/5
        let rows = vec![vec![(0, r(2)), (1, r(1))], vec![(0, r(1)), (1, r(3))]];
        let x = solve_square(rows, vec![r(3), r(5)], 2).unwrap();
        assert_eq!(
            x,
            vec![Rational::from_ratio(4, 5), Rational::from_ratio(7, 5)]
        );
    }

    #[test]
    fn detects_singular() {
        let rows = vec![vec![(0, r(1)), (1, r(1))], vec![(0, r(2)), (1, r(2))]];
        assert!(solve_square(rows, vec![r(1), r(2)], 2).is_none());
    }

    #[test]
    fn float_needs_row_pivoting() {
        let rows = vec![vec![(0, 1e-20), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]];
        let x = solve_square(rows, vec![1.0, 2.0], 2).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}
