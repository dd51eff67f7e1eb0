//! Dense tableau simplex starting from the all-slack basis.

use super::sparse::negligible;
use super::LinearProgram;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Consecutive degenerate pivots after which Bland's rule takes over.
const DEGENERATE_LIMIT: usize = 50;

pub(super) struct Run {
    pub basis: Vec<usize>,
    pub pivots: usize,
}

/// `eps` is the threshold below which reduced costs and pivot entries count
/// as zero (0 for exact arithmetic).
pub(super) fn run<T: Scalar>(lp: &LinearProgram<T>, eps: T) -> Result<Run> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let width = n + m;
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut rhs: Vec<T> = Vec::with_capacity(m);
    for (i, r) in lp.rows().iter().enumerate() {
        let mut row = vec![T::zero(); width];
        for (v, a) in &r.coeffs {
            row[*v] = a.clone();
        }
        row[n + i] = T::one();
        rows.push(row);
        rhs.push(r.rhs.clone());
    }
    let mut reduced: Vec<T> = lp.objective().to_vec();
    reduced.resize(width, T::zero());
    let mut basis: Vec<usize> = (n..width).collect();

    let max_pivots = 100 * (width + 10);
    let mut pivots = 0;
    let mut degenerate_run = 0;
    let mut bland = false;
    loop {
        let entering = if bland {
            (0..width).find(|&j| reduced[j] > eps)
        } else {
            (0..width)
                .filter(|&j| reduced[j] > eps)
                .max_by(|&a, &b| reduced[a].total_cmp(&reduced[b]).then(b.cmp(&a)))
        };
        let Some(col) = entering else {
            return Ok(Run { basis, pivots });
        };

        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if rows[i][col] <= eps {
                continue;
            }
            let ratio = rhs[i].clone() / rows[i][col].clone();
            let replace = match &leave {
                None => true,
                Some((l, best)) => ratio < *best || (ratio.near(best) && basis[i] < basis[*l]),
            };
            if replace {
                leave = Some((i, ratio));
            }
        }
        let Some((row, ratio)) = leave else {
            return Err(Error::Lp(format!("objective unbounded along column {col}")));
        };

        if negligible(&ratio) {
            degenerate_run += 1;
            if degenerate_run > DEGENERATE_LIMIT {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }

        pivot(&mut rows, &mut rhs, &mut reduced, row, col);
        basis[row] = col;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Lp(format!("no convergence after {pivots} pivots")));
        }
    }
}

fn pivot<T: Scalar>(rows: &mut [Vec<T>], rhs: &mut [T], reduced: &mut [T], row: usize, col: usize) {
    let p = rows[row][col].clone();
    let support: Vec<usize> = (0..rows[row].len())
        .filter(|&j| !rows[row][j].is_zero())
        .collect();
    for &j in &support {
        rows[row][j] = rows[row][j].clone() / p.clone();
    }
    rhs[row] = rhs[row].clone() / p;
    rows[row][col] = T::one();

    let pivot_row: Vec<(usize, T)> = support.iter().map(|&j| (j, rows[row][j].clone())).collect();
    let pivot_rhs = rhs[row].clone();
    for i in 0..rows.len() {
        if i == row || rows[i][col].is_zero() {
            continue;
        }
        let factor = rows[i][col].clone();
        for (j, a) in &pivot_row {
            let v = rows[i][*j].clone() - factor.clone() * a.clone();
            rows[i][*j] = if negligible(&v) { T::zero() } else { v };
        }
        rows[i][col] = T::zero();
        let r = rhs[i].clone() - factor * pivot_rhs.clone();
        rhs[i] = if negligible(&r) || (!T::EXACT && r < T::zero()) {
            T::zero()
        } else {
            r
        };
    }
    if !reduced[col].is_zero() {
        let factor = reduced[col].clone();
        for (j, a) in &pivot_row {
            let v = reduced[*j].clone() - factor.clone() * a.clone();
            reduced[*j] = if negligible(&v) { T::zero() } else { v };
        }
        reduced[col] = T::zero();
    }
}
