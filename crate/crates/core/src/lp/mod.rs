//! Linear programs `max c.x  s.t.  A x <= b, x >= 0` with `b >= 0`, so the
//! origin is always feasible.
//!
//! A floating-point simplex finds a candidate optimal basis. The basis is then
//! re-solved in the requested arithmetic and its primal and dual feasibility
//! are checked; for rationals this makes the optimum exact. If the check fails
//! the problem is solved again by an exact rational simplex.

mod simplex;
mod sparse;

use std::fmt::Write as _;

use log::debug;

use crate::error::{Error, Result};
use crate::scalar::{convert, Rational, Scalar};

pub(crate) use sparse::solve_square;

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub coeffs: Vec<(usize, T)>,
    pub rhs: T,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    names: Vec<String>,
    objective: Vec<T>,
    rows: Vec<Constraint<T>>,
}

impl<T: Scalar> Default for LinearProgram<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new() -> Self {
        LinearProgram {
            names: Vec::new(),
            objective: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Add a nonnegative variable with the given objective coefficient.
    pub fn add_var(&mut self, name: impl Into<String>, objective: T) -> usize {
        self.names.push(name.into());
        self.objective.push(objective);
        self.names.len() - 1
    }

    /// Add `sum coeffs <= rhs`. Repeated variables are summed.
    pub fn add_le(
        &mut self,
        label: impl Into<String>,
        coeffs: Vec<(usize, T)>,
        rhs: T,
    ) -> Result<()> {
        if rhs < T::zero() {
            return Err(Error::Lp(format!("right-hand side {rhs} is negative")));
        }
        if let Some((v, _)) = coeffs.iter().find(|(v, _)| *v >= self.names.len()) {
            return Err(Error::Lp(format!("unknown variable {v}")));
        }
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(coeffs.len());
        let mut sorted = coeffs;
        sorted.sort_by_key(|(v, _)| *v);
        for (v, a) in sorted {
            match merged.last_mut() {
                Some((last, acc)) if *last == v => *acc = acc.clone() + a,
                _ => merged.push((v, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        self.rows.push(Constraint {
            coeffs: merged,
            rhs,
            label: label.into(),
        });
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Constraint<T>] {
        &self.rows
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LinearProgram<U> {
        LinearProgram {
            names: self.names.clone(),
            objective: self.objective.iter().map(&f).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| Constraint {
                    coeffs: r.coeffs.iter().map(|(v, a)| (*v, f(a))).collect(),
                    rhs: f(&r.rhs),
                    label: r.label.clone(),
                })
                .collect(),
        }
    }

    /// Largest violation of any constraint or sign bound by `x`.
    pub fn max_violation(&self, x: &[T]) -> f64 {
        let mut worst = 0.0f64;
        for v in x {
            worst = worst.max(-v.to_f64());
        }
        for r in &self.rows {
            let lhs = r
                .coeffs
                .iter()
                .fold(T::zero(), |acc, (v, a)| acc + a.clone() * x[*v].clone());
            worst = worst.max((lhs - r.rhs.clone()).to_f64());
        }
        worst
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        self.objective
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    }

    /// CPLEX LP-format text.
    pub fn to_lp_format(&self) -> String {
        let term = |a: &T, name: &str| {
            let v = a.to_f64();
            if v < 0.0 {
                format!(" - {} {name}", -v)
            } else {
                format!(" + {v} {name}")
            }
        };
        let mut out = String::from("Maximize\n obj:");
        for (c, name) in self.objective.iter().zip(&self.names) {
            if !c.is_zero() {
                out.push_str(&term(c, name));
            }
        }
        out.push_str("\nSubject To\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            if r.coeffs.is_empty() {
                let _ = write!(out, " 0 {}", self.names.first().map_or("x", |s| s.as_str()));
            }
            for (v, a) in &r.coeffs {
                out.push_str(&term(a, &self.names[*v]));
            }
            let _ = writeln!(out, " <= {}", r.rhs.to_f64());
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// The floating-point basis passed the optimality check.
    CertifiedBasis,
    /// The basis check failed and an exact simplex was run instead.
    ExactSimplex,
}

#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub objective: T,
    pub x: Vec<T>,
    /// One multiplier per constraint row.
    pub duals: Vec<T>,
    pub method: SolveMethod,
    pub pivots: usize,
    /// Largest primal constraint violation of `x` (0 for exact solutions).
    pub max_violation: f64,
}

pub fn solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    let float_lp = lp.map(|v| v.to_f64());
    // Degenerate programs can stall the float simplex; a tiny right-hand
    // side shift breaks the ties and the basis is then checked on the
    // unshifted program.
    let mut attempts: Vec<LinearProgram<f64>> = [1e-11, 1e-9, 1e-7]
        .iter()
        .map(|&s| perturbed(&float_lp, s))
        .collect();
    attempts.push(float_lp);
    let certified = attempts.iter().find_map(|f| {
        let run = simplex::run(f, 1e-10).ok()?;
        certify(lp, &run.basis).map(|c| (c, run.pivots))
    });
    if let Some(((x, duals), pivots)) = certified {
        let objective = lp.evaluate(&x);
        let max_violation = lp.max_violation(&x);
        return Ok(LpSolution {
            objective,
            x,
            duals,
            method: SolveMethod::CertifiedBasis,
            pivots,
            max_violation,
        });
    }
    debug!(
        "basis check failed for a {}x{} program; running exact simplex",
        lp.num_rows(),
        lp.num_vars()
    );
    let exact_lp: LinearProgram<Rational> = lp.map(convert::<T, Rational>);
    let run = simplex::run(&exact_lp, Rational::from_i64(0))?;
    let (x, duals) = certify(&exact_lp, &run.basis).ok_or_else(|| {
        Error::Lp("exact simplex returned a basis that fails its own check".into())
    })?;
    let x: Vec<T> = x.iter().map(convert::<Rational, T>).collect();
    let duals = duals.iter().map(convert::<Rational, T>).collect();
    Ok(LpSolution {
        objective: lp.evaluate(&x),
        max_violation: lp.max_violation(&x),
        x,
        duals,
        method: SolveMethod::ExactSimplex,
        pivots: run.pivots,
    })
}

fn perturbed(lp: &LinearProgram<f64>, scale: f64) -> LinearProgram<f64> {
    let mut out = lp.clone();
    for (i, r) in out.rows.iter_mut().enumerate() {
        // deterministic pseudo-random weights in (0, 1]
        let u = ((i as u64).wrapping_mul(2_654_435_761) % 1000 + 1) as f64 / 1000.0;
        r.rhs += scale * (1.0 + r.rhs.abs()) * u;
    }
    out
}

/// Recompute the primal and dual solutions of `basis` in `T` and check
/// optimality. `basis[i]` is the basic column of row `i`; columns at or above
/// `num_vars` are slacks.
fn certify<T: Scalar>(lp: &LinearProgram<T>, basis: &[usize]) -> Option<(Vec<T>, Vec<T>)> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let structural: Vec<usize> = {
        let mut p: Vec<usize> = basis.iter().copied().filter(|&j| j < n).collect();
        p.sort_unstable();
        p
    };
    let basic_slack: Vec<bool> = {
        let mut b = vec![false; m];
        for &j in basis {
            if j >= n {
                b[j - n] = true;
            }
        }
        b
    };
    let tight: Vec<usize> = (0..m).filter(|&i| !basic_slack[i]).collect();
    if tight.len() != structural.len() {
        return None;
    }
    let k = structural.len();
    let pos: std::collections::HashMap<usize, usize> = structural
        .iter()
        .enumerate()
        .map(|(a, &j)| (j, a))
        .collect();

    let x = if k == 0 {
        vec![T::zero(); n]
    } else {
        let rows: Vec<Vec<(usize, T)>> = tight
            .iter()
            .map(|&i| {
                lp.rows[i]
                    .coeffs
                    .iter()
                    .filter_map(|(v, a)| pos.get(v).map(|&c| (c, a.clone())))
                    .collect()
            })
            .collect();
        let rhs = tight.iter().map(|&i| lp.rows[i].rhs.clone()).collect();
        let xp = solve_square(rows, rhs, k)?;
        let mut x = vec![T::zero(); n];
        for (a, &j) in structural.iter().enumerate() {
            x[j] = xp[a].clone();
        }
        x
    };
    let primal_ok = x.iter().all(|v| T::zero().le_tol(v))
        && lp.rows.iter().all(|r| {
            let lhs = r
                .coeffs
                .iter()
                .fold(T::zero(), |acc, (v, a)| acc + a.clone() * x[*v].clone());
            lhs.le_tol(&r.rhs)
        });
    if !primal_ok {
        return None;
    }

    // Dual: y over tight rows with y^T A[tight, structural] = c[structural].
    let mut y = vec![T::zero(); m];
    if k > 0 {
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); k];
        for (t, &i) in tight.iter().enumerate() {
            for (v, a) in &lp.rows[i].coeffs {
                if let Some(&c) = pos.get(v) {
                    cols[c].push((t, a.clone()));
                }
            }
        }
        let rhs = structural
            .iter()
            .map(|&j| lp.objective[j].clone())
            .collect();
        let yt = solve_square(cols, rhs, k)?;
        for (t, &i) in tight.iter().enumerate() {
            y[i] = yt[t].clone();
        }
    }
    if !y.iter().all(|v| T::zero().le_tol(v)) {
        return None;
    }
    let mut reduced = lp.objective.clone();
    for (i, r) in lp.rows.iter().enumerate() {
        if y[i].is_zero() {
            continue;
        }
        for (v, a) in &r.coeffs {
            reduced[*v] = reduced[*v].clone() - y[i].clone() * a.clone();
        }
    }
    if !reduced.iter().all(|d| d.le_tol(&T::zero())) {
        return None;
    }
    Some((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn textbook_program() {
        // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
        let mut lp = LinearProgram::<Rational>::new();
        let x = lp.add_var("x", q(3, 1));
        let y = lp.add_var("y", q(5, 1));
        lp.add_le("a", vec![(x, q(1, 1))], q(4, 1)).unwrap();
        lp.add_le("b", vec![(y, q(2, 1))], q(12, 1)).unwrap();
        lp.add_le("c", vec![(x, q(3, 1)), (y, q(2, 1))], q(18, 1))
            .unwrap();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.objective, q(36, 1));
        assert_eq!(sol.x, vec![q(2, 1), q(6, 1)]);
        assert_eq!(sol.duals, vec![q(0, 1), q(3, 2), q(1, 1)]);
        assert_eq!(sol.max_violation, 0.0);
    }

    #[test]
    fn thirds_are_exact() {
        // max x + y s.t. 3x + y <= 1, x + 3y <= 1 -> x = y = 1/4
        let mut lp = LinearProgram::<Rational>::new();
        let x = lp.add_var("x", q(1, 1));
        let y = lp.add_var("y", q(1, 1));
        lp.add_le("a", vec![(x, q(3, 1)), (y, q(1, 1))], q(1, 1))
            .unwrap();
        lp.add_le("b", vec![(x, q(1, 1)), (y, q(3, 1))], q(1, 1))
            .unwrap();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.objective, q(1, 2));
    }

    #[test]
    fn unbounded_is_reported() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var("x", 1.0);
        let y = lp.add_var("y", 0.0);
        lp.add_le("a", vec![(x, 1.0), (y, -1.0)], 1.0).unwrap();
        assert!(matches!(solve(&lp), Err(Error::Lp(_))));
    }

    #[test]
    fn degenerate_program_terminates() {
        // classic cycling example under the largest-coefficient rule
        let mut lp = LinearProgram::<Rational>::new();
        let c = [q(3, 4), q(-150, 1), q(1, 50), q(-6, 1)];
        let v: Vec<usize> = c
            .iter()
            .enumerate()
            .map(|(i, c)| lp.add_var(format!("x{i}"), c.clone()))
            .collect();
        lp.add_le(
            "a",
            vec![
                (v[0], q(1, 4)),
                (v[1], q(-60, 1)),
                (v[2], q(-1, 25)),
                (v[3], q(9, 1)),
            ],
            q(0, 1),
        )
        .unwrap();
        lp.add_le(
            "b",
            vec![
                (v[0], q(1, 2)),
                (v[1], q(-90, 1)),
                (v[2], q(-1, 50)),
                (v[3], q(3, 1)),
            ],
            q(0, 1),
        )
        .unwrap();
        lp.add_le("c", vec![(v[2], q(1, 1))], q(1, 1)).unwrap();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.objective, q(1, 20));
    }

    #[test]
    fn lp_format_dump() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var("x", 2.0);
        lp.add_le("a", vec![(x, -1.0)], 0.0).unwrap();
        let text = lp.to_lp_format();
        assert!(text.starts_with("Maximize\n obj: + 2 x\nSubject To\n c0: - 1 x <= 0\n"));
    }
}
