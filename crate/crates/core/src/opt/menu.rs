use crate::dist::TypeSpace;
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpSolution};
use crate::mech::{Lottery, LotteryCap, LotteryMenu};
use crate::scalar::Scalar;

/// Largest number of buyer types the menu program accepts.
pub const MENU_LP_TYPE_CAP: usize = 2_000;

#[derive(Clone, Debug)]
pub struct MenuOptimum<T> {
    pub menu: LotteryMenu<T>,
    /// The lottery assigned to each type by the program.
    pub assigned: Vec<Lottery<T>>,
    pub revenue: T,
    pub solution: LpSolution<T>,
}

/// Variable layout of the menu program: per type `t`, `m` probabilities
/// followed by the positive and negative parts of the price.
struct Layout {
    items: usize,
}

impl Layout {
    fn q(&self, t: usize, j: usize) -> usize {
        t * (self.items + 2) + j
    }

    fn p_plus(&self, t: usize) -> usize {
        t * (self.items + 2) + self.items
    }

    fn p_minus(&self, t: usize) -> usize {
        t * (self.items + 2) + self.items + 1
    }
}

/// The revenue-maximizing menu program for a single buyer: one lottery per
/// type, with IC between every ordered pair of types, IR, and the cap.
pub fn menu_lp<T: Scalar>(ts: &TypeSpace<T>, cap: LotteryCap) -> Result<LinearProgram<T>> {
    if ts.n_agents() != 1 {
        return Err(Error::Validation(format!(
            "menu program needs a single buyer, got {} agents",
            ts.n_agents()
        )));
    }
    let types = &ts.agent(0).types;
    if types.len() > MENU_LP_TYPE_CAP {
        return Err(Error::Capacity {
            what: "menu program types",
            count: types.len() as u128,
            cap: MENU_LP_TYPE_CAP as u128,
        });
    }
    let m = ts.n_items();
    let at = Layout { items: m };
    let mut prog = LinearProgram::new();
    for (t, ty) in types.iter().enumerate() {
        for j in 0..m {
            prog.add_var(format!("q_{t}_{j}"), T::zero());
        }
        prog.add_var(format!("pp_{t}"), ty.prob.clone());
        prog.add_var(format!("pm_{t}"), T::zero() - ty.prob.clone());
    }

    // utility of type t buying s's lottery, minus its own: <= 0
    for (t, ty) in types.iter().enumerate() {
        let v = &ty.values;
        for s in 0..types.len() {
            if s == t {
                continue;
            }
            let mut row = Vec::with_capacity(2 * m + 4);
            for j in 0..m {
                row.push((at.q(s, j), v[j].clone()));
                row.push((at.q(t, j), T::zero() - v[j].clone()));
            }
            row.push((at.p_plus(s), T::from_i64(-1)));
            row.push((at.p_minus(s), T::one()));
            row.push((at.p_plus(t), T::one()));
            row.push((at.p_minus(t), T::from_i64(-1)));
            prog.add_le(format!("ic_{t}_{s}"), row, T::zero())?;
        }
        let mut ir: Vec<(usize, T)> = (0..m)
            .map(|j| (at.q(t, j), T::zero() - v[j].clone()))
            .collect();
        ir.push((at.p_plus(t), T::one()));
        ir.push((at.p_minus(t), T::from_i64(-1)));
        prog.add_le(format!("ir_{t}"), ir, T::zero())?;

        match cap {
            LotteryCap::Simplex => {
                prog.add_le(
                    format!("cap_{t}"),
                    (0..m).map(|j| (at.q(t, j), T::one())).collect(),
                    T::one(),
                )?;
            }
            LotteryCap::Lifted => {
                prog.add_le(format!("cap0_{t}"), vec![(at.q(t, 0), T::one())], T::one())?;
                if m > 1 {
                    prog.add_le(
                        format!("cap_{t}"),
                        (1..m).map(|j| (at.q(t, j), T::one())).collect(),
                        T::one(),
                    )?;
                }
            }
        }
    }
    Ok(prog)
}

/// Solve the menu program and return the distinct lotteries it assigns, plus
/// the null lottery, as a menu. Buyers break ties toward higher prices, so the
/// menu earns exactly the program's optimum.
pub fn optimal_menu_lp<T: Scalar>(ts: &TypeSpace<T>, cap: LotteryCap) -> Result<MenuOptimum<T>> {
    let prog = menu_lp(ts, cap)?;
    let solution = lp::solve(&prog)?;
    let m = ts.n_items();
    let at = Layout { items: m };
    let types = &ts.agent(0).types;
    let assigned: Vec<Lottery<T>> = (0..types.len())
        .map(|t| {
            let q = (0..m)
                .map(|j| clamp_unit(solution.x[at.q(t, j)].clone()))
                .collect();
            let p = solution.x[at.p_plus(t)].clone() - solution.x[at.p_minus(t)].clone();
            Lottery::new(q, p)
        })
        .collect();
    let mut distinct: Vec<Lottery<T>> = Vec::new();
    for l in &assigned {
        if !distinct.iter().any(|d| d.near(l)) {
            distinct.push(l.clone());
        }
    }
    let menu = LotteryMenu::new(m, distinct, cap)?;
    let revenue = menu.revenue(ts)?;
    if !revenue.near(&solution.objective) {
        return Err(Error::Invariant(format!(
            "menu earns {revenue} but the program optimum is {}",
            solution.objective
        )));
    }
    Ok(MenuOptimum {
        menu,
        assigned,
        revenue,
        solution,
    })
}

fn clamp_unit<T: Scalar>(x: T) -> T {
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
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn two_point() -> DiscreteDist<Rational> {
        DiscreteDist::new(vec![q(1, 1), q(2, 1)], vec![q(1, 2); 2]).unwrap()
    }

    #[test]
    fn point_mass_extracts_full_surplus() {
        let ts = TypeSpace::single_agent_explicit(vec![(vec![q(5, 1), q(3, 1)], q(1, 1))]).unwrap();
        let opt = optimal_menu_lp(&ts, LotteryCap::Simplex).unwrap();
        assert_eq!(opt.revenue, q(5, 1));
        assert_eq!(
            opt.assigned[0],
            Lottery::new(vec![q(1, 1), q(0, 1)], q(5, 1))
        );
    }

    #[test]
    fn single_item_matches_monopoly() {
        let ts = TypeSpace::product(vec![vec![two_point()]]).unwrap();
        let opt = optimal_menu_lp(&ts, LotteryCap::Simplex).unwrap();
        assert_eq!(opt.revenue, q(1, 1));
    }

    #[test]
    fn float_mode_agrees() {
        let ts = TypeSpace::product(vec![vec![two_point(), two_point()]]).unwrap();
        let exact = optimal_menu_lp(&ts, LotteryCap::Simplex).unwrap().revenue;
        let tf: TypeSpace<f64> = TypeSpace::product(vec![vec![
            DiscreteDist::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap(),
            DiscreteDist::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap(),
        ]])
        .unwrap();
        let float = optimal_menu_lp(&tf, LotteryCap::Simplex).unwrap().revenue;
        assert!((exact.to_f64() - float).abs() < 1e-9);
    }

    #[test]
    fn lifted_cap_allows_base_and_item() {
        // Types value (base, item) = (1, 1): the lifted cap sells both.
        let ts = TypeSpace::single_agent_explicit(vec![(vec![q(1, 1), q(1, 1)], q(1, 1))]).unwrap();
        let lifted = optimal_menu_lp(&ts, LotteryCap::Lifted).unwrap();
        let simplex = optimal_menu_lp(&ts, LotteryCap::Simplex).unwrap();
        assert_eq!(lifted.revenue, q(2, 1));
        assert_eq!(simplex.revenue, q(1, 1));
    }
}
