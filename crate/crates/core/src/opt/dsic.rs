use crate::dist::TypeSpace;
use crate::error::{Error, Result};
use crate::feas::{ElementSet, FeasibilitySystem};
use crate::lp::{self, LinearProgram, LpSolution};
use crate::mech::MechanismTable;
use crate::scalar::Scalar;

/// Largest `profiles x agents x items` the DSIC program accepts.
pub const DSIC_LP_CAP: usize = 4_000;

#[derive(Clone, Debug)]
pub struct DsicOptimum<T> {
    pub table: MechanismTable<T>,
    pub revenue: T,
    pub solution: LpSolution<T>,
}

struct Layout {
    agents: usize,
    items: usize,
    profiles: usize,
}

impl Layout {
    fn q(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.agents + i) * self.items + j
    }

    fn pay_plus(&self, k: usize, i: usize) -> usize {
        self.profiles * self.agents * self.items + 2 * (k * self.agents + i)
    }

    fn pay_minus(&self, k: usize, i: usize) -> usize {
        self.pay_plus(k, i) + 1
    }
}

/// The program over allocations `q_ij(v)` and payments `pi_i(v)`: ex-post IC
/// for every agent and pair of reports, IR, and the rank inequalities of both
/// matroids at every profile. Maximizes expected payments.
pub fn dsic_lp<T: Scalar>(ts: &TypeSpace<T>, fs: &FeasibilitySystem) -> Result<LinearProgram<T>> {
    let (n, m, count) = (ts.n_agents(), ts.n_items(), ts.profile_count());
    if fs.agents() != n || fs.items() != m {
        return Err(Error::Validation(format!(
            "feasibility system is {} x {} but the type space is {n} x {m}",
            fs.agents(),
            fs.items()
        )));
    }
    let size = count * n * m;
    if size > DSIC_LP_CAP {
        return Err(Error::Capacity {
            what: "DSIC program allocation variables",
            count: size as u128,
            cap: DSIC_LP_CAP as u128,
        });
    }
    let at = Layout {
        agents: n,
        items: m,
        profiles: count,
    };
    let mut prog = LinearProgram::new();
    for k in 0..count {
        for i in 0..n {
            for j in 0..m {
                prog.add_var(format!("q_{k}_{i}_{j}"), T::zero());
            }
        }
    }
    for p in ts.profiles() {
        for i in 0..n {
            prog.add_var(format!("pp_{}_{i}", p.index), p.prob.clone());
            prog.add_var(format!("pm_{}_{i}", p.index), T::zero() - p.prob.clone());
        }
    }

    let utility = |k: usize, i: usize, v: &[T], sign: T| -> Vec<(usize, T)> {
        let mut row: Vec<(usize, T)> = (0..m)
            .map(|j| (at.q(k, i, j), sign.clone() * v[j].clone()))
            .collect();
        row.push((at.pay_plus(k, i), T::zero() - sign.clone()));
        row.push((at.pay_minus(k, i), sign));
        row
    };
    let one = T::one();
    let minus = T::zero() - T::one();
    for p in ts.profiles() {
        for i in 0..n {
            let v = ts.values(&p, i);
            for s in 0..ts.agent(i).len() {
                if s == p.types[i] {
                    continue;
                }
                let dev = ts.with_agent_type(p.index, i, s);
                let mut row = utility(dev, i, v, one.clone());
                row.extend(utility(p.index, i, v, minus.clone()));
                prog.add_le(format!("ic_{}_{i}_{s}", p.index), row, T::zero())?;
            }
            prog.add_le(
                format!("ir_{}_{i}", p.index),
                utility(p.index, i, v, minus.clone()),
                T::zero(),
            )?;
        }
    }

    let mut rows = fs.polytope_rows();
    for e in 0..fs.ground_size() {
        if !rows.iter().any(|(s, r)| *r <= 1 && s.contains(e)) {
            rows.push((ElementSet::singleton(e), 1));
        }
    }
    for k in 0..count {
        for (r, (set, rank)) in rows.iter().enumerate() {
            let coeffs = set
                .iter()
                .map(|e| (at.q(k, e / m, e % m), T::one()))
                .collect();
            prog.add_le(format!("rank_{k}_{r}"), coeffs, T::from_i64(*rank as i64))?;
        }
    }
    Ok(prog)
}

/// Revenue-optimal ex-post IC mechanism over the discrete profile space.
pub fn optimal_dsic_lp<T: Scalar>(
    ts: &TypeSpace<T>,
    fs: &FeasibilitySystem,
) -> Result<DsicOptimum<T>> {
    let prog = dsic_lp(ts, fs)?;
    let solution = lp::solve(&prog)?;
    let (n, m, count) = (ts.n_agents(), ts.n_items(), ts.profile_count());
    let at = Layout {
        agents: n,
        items: m,
        profiles: count,
    };
    let x = &solution.x;
    let table = MechanismTable::from_fn(ts, |k| {
        let alloc = (0..n)
            .map(|i| (0..m).map(|j| unit(x[at.q(k, i, j)].clone())).collect())
            .collect();
        let pay = (0..n)
            .map(|i| x[at.pay_plus(k, i)].clone() - x[at.pay_minus(k, i)].clone())
            .collect();
        (alloc, pay)
    })?;
    Ok(DsicOptimum {
        revenue: table.revenue(ts),
        table,
        solution,
    })
}

fn unit<T: Scalar>(x: T) -> T {
    if T::EXACT {
        x
    } else {
        x.max_of(T::zero()).min_of(T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;
    use crate::mech::{check_ic, check_ir, LotteryCap};
    use crate::opt::{myerson, optimal_menu_lp};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn two_point() -> DiscreteDist<Rational> {
        DiscreteDist::new(vec![q(1, 1), q(2, 1)], vec![q(1, 2); 2]).unwrap()
    }

    #[test]
    fn two_bidders_match_myerson() {
        let ts = TypeSpace::product(vec![vec![two_point()], vec![two_point()]]).unwrap();
        let fs = FeasibilitySystem::matching(2, vec![1]).unwrap();
        let opt = optimal_dsic_lp(&ts, &fs).unwrap();
        assert_eq!(opt.revenue, q(3, 2));
        assert_eq!(opt.revenue, myerson(&ts, &fs).unwrap().threshold_revenue);
        assert!(check_ic(&opt.table, &ts).passed());
        assert!(check_ir(&opt.table, &ts).passed());
        assert!(opt.table.feasibility(&ts, &fs).unwrap().passed());
    }

    #[test]
    fn single_agent_matches_menu_program() {
        let ts = TypeSpace::product(vec![vec![two_point(), two_point()]]).unwrap();
        let fs = FeasibilitySystem::single_agent(2).unwrap();
        let dsic = optimal_dsic_lp(&ts, &fs).unwrap().revenue;
        let menu = optimal_menu_lp(&ts, LotteryCap::Simplex).unwrap().revenue;
        assert_eq!(dsic, menu);
    }

    #[test]
    fn rejects_mismatched_system() {
        let ts = TypeSpace::product(vec![vec![two_point()]]).unwrap();
        let fs = FeasibilitySystem::matching(2, vec![1]).unwrap();
        assert!(matches!(dsic_lp(&ts, &fs), Err(Error::Validation(_))));
    }
}
