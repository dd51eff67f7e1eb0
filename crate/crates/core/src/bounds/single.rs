//! Single-buyer checks: independent item values, and additive values
//! `v_j = t_0 + t_j` through the lifted instance over `t_0..t_m`.

use crate::dist::{Structure, TypeSpace};
use crate::error::{Error, Result};
use crate::feas::{ElementSet, FeasibilitySystem};
use crate::mech::{check_ic, Lottery, LotteryCap, LotteryMechanism, LotteryMenu};
use crate::opt::{
    expected_vickrey, monopoly_price, myerson, optimal_dsic_lp, optimal_menu_lp,
    optimal_pricing_exact, vickrey,
};
use crate::scalar::{sum, Scalar};

use super::copies::{best_item_per_agent, build_a_l, build_copies, check_copies_bound};
use super::report::{GapCheck, GapReport, Pointwise};

fn two<T: Scalar>() -> T {
    T::from_i64(2)
}

fn times<T: Scalar>(k: i64, x: &T) -> T {
    T::from_i64(k) * x.clone()
}

/// Index of the largest value, lowest index on ties.
fn argmax<T: Scalar>(v: &[T]) -> usize {
    (0..v.len()).fold(0, |b, j| if v[j] > v[b] { j } else { b })
}

/// Optimal menu against optimal pricing for one buyer with independent item
/// values, through `A^L`, Vickrey and Myerson's mechanism on the copies.
pub fn check_setting1<T: Scalar>(ts: &TypeSpace<T>, instance_id: &str) -> Result<GapReport<T>> {
    if ts.n_agents() != 1 {
        return Err(Error::Validation("this check needs a single buyer".into()));
    }
    let m = ts.n_items();
    let fs = FeasibilitySystem::single_agent(m)?;
    let opt = optimal_menu_lp(ts, LotteryCap::Simplex)?;
    let lm = LotteryMechanism::single(opt.menu.clone());
    let al = build_a_l(&lm, ts)?;
    let copies = build_copies(ts, &fs)?;
    let mye = myerson(&copies.ts, &copies.fs)?;
    let dsic_copies = optimal_dsic_lp(&copies.ts, &copies.fs)?;
    let pricing = optimal_pricing_exact(ts)?;
    let vick = expected_vickrey(ts);
    let a_rev = al.revenue(ts);
    let rev = opt.revenue.clone();
    let mye_rev = mye.threshold_revenue.clone();

    let mut report = GapReport::new(instance_id);
    let (strong, weak) = check_copies_bound(&lm, &al, ts, |k| best_item_per_agent(ts, k))?;
    report.push(strong);
    report.push(weak);
    let mut pw = Pointwise::le("lottery-le-al-plus-vickrey-pointwise");
    for p in ts.profiles() {
        let v = ts.values(&p, 0);
        let paid = lm.outcome(ts, p.index, 0).p.clone();
        pw.observe(&p.types, paid, al.revenue_at(p.index) + vickrey(v));
    }
    report.push(pw.finish());

    let al_table = al.table(&copies.ts)?;
    let ic = check_ic(&al_table, &copies.ts);
    report.push(GapCheck::eq(
        "al-truthful-on-copies",
        T::from_i64(ic.violations.len() as i64),
        T::zero(),
    ));
    report.push(GapCheck::le(
        "lottery-le-al-plus-vickrey",
        rev.clone(),
        a_rev.clone() + vick.clone(),
    ));
    report.push(GapCheck::le(
        "al-le-myerson-copies",
        a_rev.clone(),
        mye_rev.clone(),
    ));
    report.push(GapCheck::le(
        "vickrey-le-myerson-copies",
        vick.clone(),
        mye_rev.clone(),
    ));
    report.push(GapCheck::le(
        "lottery-le-2x-myerson-copies",
        rev.clone(),
        times(2, &mye_rev),
    ));
    report.push(GapCheck::le(
        "myerson-copies-le-2x-pricing",
        mye_rev.clone(),
        times(2, &pricing.revenue),
    ));
    report.push(GapCheck::le(
        "lottery-le-4x-pricing",
        rev.clone(),
        times(4, &pricing.revenue),
    ));
    report.push(GapCheck::le(
        "pricing-le-lottery",
        pricing.revenue.clone(),
        rev.clone(),
    ));
    report.push(GapCheck::eq(
        "myerson-virtual-surplus-equals-threshold",
        mye.virtual_surplus.clone(),
        mye.threshold_revenue.clone(),
    ));
    report.push(GapCheck::eq(
        "myerson-copies-equals-dsic-lp",
        mye_rev.clone(),
        dsic_copies.revenue,
    ));

    report.value("lottery-revenue", rev);
    report.value("al-revenue", a_rev);
    report.value("vickrey-revenue", vick);
    report.value("myerson-copies", mye_rev);
    report.value("pricing-revenue", pricing.revenue);
    report.value("menu-size", T::from_i64(opt.menu.len() as i64));
    Ok(report)
}

/// The lifted menu over `t_0..t_m`: each lottery `(q_1..q_m, p)` becomes
/// `(sum_j q_j, q_1..q_m, p)` with the same preference order, and the lifted
/// type space treats the components as independent item values.
pub fn additive_lift<T: Scalar>(
    menu: &LotteryMenu<T>,
    ts: &TypeSpace<T>,
) -> Result<(LotteryMenu<T>, TypeSpace<T>)> {
    let components = match (ts.n_agents(), &ts.agent(0).structure) {
        (1, Structure::Additive(c)) => c.clone(),
        _ => {
            return Err(Error::Validation(
                "the lift needs a single additive buyer".into(),
            ))
        }
    };
    let lifted: Vec<Lottery<T>> = menu
        .lotteries()
        .iter()
        .map(|l| {
            let mut q = vec![sum(l.q.iter().cloned())];
            q.extend(l.q.iter().cloned());
            Lottery::new(q, l.p.clone())
        })
        .collect();
    if let Some(l) = lifted.iter().find(|l| !LotteryCap::Lifted.admits(&l.q)) {
        return Err(Error::Validation(format!(
            "lifted lottery {:?} exceeds the lifted cap",
            l.q
        )));
    }
    let menu2 = LotteryMenu::with_order(menu.items() + 1, lifted, menu.order().to_vec())?;
    Ok((menu2, TypeSpace::product(vec![components])?))
}

/// Optimal menu against optimal pricing for one additive buyer.
pub fn check_setting2<T: Scalar>(ts: &TypeSpace<T>, instance_id: &str) -> Result<GapReport<T>> {
    let opt = optimal_menu_lp(ts, LotteryCap::Simplex)?;
    let (menu2, ts2) = additive_lift(&opt.menu, ts)?;
    let Structure::Additive(components) = &ts.agent(0).structure else {
        unreachable!("checked by the lift")
    };
    let m = ts.n_items();
    let rev = opt.revenue.clone();
    let mut report = GapReport::new(instance_id);

    let mut utilities = Pointwise::eq("lift-utility-identity-pointwise");
    for (t, ty) in ts.agent(0).types.iter().enumerate() {
        let base = ty
            .base
            .as_ref()
            .expect("additive types keep their components");
        for (l, l2) in opt.menu.lotteries().iter().zip(menu2.lotteries()) {
            utilities.observe(&[t], l.utility(&ty.values), l2.utility(base));
        }
    }
    report.push(utilities.finish());
    let rev2 = menu2.revenue(&ts2)?;
    report.push(GapCheck::eq("lift-revenue-identity", rev.clone(), rev2));

    let lm2 = LotteryMechanism::single(menu2);
    let al = build_a_l(&lm2, &ts2)?;
    let zero_only = ElementSet::singleton(0);
    let rest = ElementSet::full(m + 1).without(0);

    let rev_0 = monopoly_price(&components[0]).1;
    let rest_ts = TypeSpace::product(components[1..].iter().map(|c| vec![c.clone()]).collect())?;
    let rest_fs = FeasibilitySystem::matching(m, vec![1])?;
    let mye_rest = myerson(&rest_ts, &rest_fs)?;
    let rev_rest = mye_rest.threshold_revenue.clone();
    let opt_lifted = rev_0.clone() + rev_rest.clone();

    let mut factor9 = Pointwise::le("additive-lottery-le-al-plus-2x-vickrey-pointwise");
    let mut base_max = Pointwise::le("additive-base-max-case-pointwise");
    let mut item_max = Pointwise::le("additive-item-max-case-pointwise");
    let mut combined = Pointwise::le("additive-split-bound-pointwise");
    let (mut v_all, mut v_0, mut v_rest) = (T::zero(), T::zero(), T::zero());
    for p in ts2.profiles() {
        let t = ts2.values(&p, 0);
        let paid = lm2.outcome(&ts2, p.index, 0).p.clone();
        let second = vickrey(t);
        let winner = argmax(t);
        let (vk_0, vk_rest) = if winner == 0 {
            (second.clone(), T::zero())
        } else {
            (T::zero(), second.clone())
        };
        let a_all = al.revenue_at(p.index);
        let a_0 = al.revenue_from(p.index, zero_only);
        let a_rest = al.revenue_from(p.index, rest);
        factor9.observe(&p.types, paid.clone(), a_all + times(2, &second));
        let a_win = al.revenue_from(p.index, ElementSet::singleton(winner));
        if winner == 0 {
            base_max.observe(&p.types, paid.clone(), a_win + vk_0.clone());
        } else {
            item_max.observe(&p.types, paid.clone(), a_win + times(2, &vk_rest));
        }
        combined.observe(
            &p.types,
            paid,
            a_0 + vk_0.clone() + a_rest + times(2, &vk_rest),
        );
        v_all = v_all + p.prob.clone() * second;
        v_0 = v_0 + p.prob.clone() * vk_0;
        v_rest = v_rest + p.prob.clone() * vk_rest;
    }
    report.push(factor9.finish());
    report.push(base_max.finish());
    report.push(item_max.finish());
    report.push(combined.finish());

    let a_all = al.revenue(&ts2);
    let a_0 = al.revenue_of(&ts2, zero_only);
    let a_rest = al.revenue_of(&ts2, rest);
    report.push(GapCheck::le(
        "additive-al-le-opt-lifted",
        a_all.clone(),
        opt_lifted.clone(),
    ));
    report.push(GapCheck::le(
        "additive-vickrey-le-opt-lifted",
        v_all.clone(),
        opt_lifted.clone(),
    ));
    report.push(GapCheck::le(
        "additive-lottery-le-3x-opt-lifted",
        rev.clone(),
        times(3, &opt_lifted),
    ));
    report.push(GapCheck::le(
        "additive-al-base-le-rev-base",
        a_0,
        rev_0.clone(),
    ));
    report.push(GapCheck::le(
        "additive-vickrey-base-le-rev-base",
        v_0,
        rev_0.clone(),
    ));
    report.push(GapCheck::le(
        "additive-al-items-le-rev-items",
        a_rest,
        rev_rest.clone(),
    ));
    report.push(GapCheck::le(
        "additive-vickrey-items-le-rev-items",
        v_rest,
        rev_rest.clone(),
    ));
    report.push(GapCheck::le(
        "additive-lottery-le-2x-rev-base-plus-3x-rev-items",
        rev.clone(),
        times(2, &rev_0) + times(3, &rev_rest),
    ));

    let pricing = optimal_pricing_exact(ts)?;
    report.push(GapCheck::le(
        "additive-rev-base-le-pricing",
        rev_0.clone(),
        pricing.revenue.clone(),
    ));
    report.push(GapCheck::le(
        "additive-rev-items-le-2x-pricing",
        rev_rest.clone(),
        two::<T>() * pricing.revenue.clone(),
    ));
    report.push(GapCheck::le(
        "additive-lottery-le-8x-pricing",
        rev.clone(),
        times(8, &pricing.revenue),
    ));
    report.push(GapCheck::le(
        "pricing-le-lottery",
        pricing.revenue.clone(),
        rev.clone(),
    ));

    report.value("lottery-revenue", rev);
    report.value("rev-base", rev_0);
    report.value("rev-items", rev_rest);
    report.value("al-revenue", a_all);
    report.value("vickrey-revenue", v_all);
    report.value("pricing-revenue", pricing.revenue);
    Ok(report)
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
    fn setting1_two_iid_items() {
        let ts = TypeSpace::product(vec![vec![two_point(), two_point()]]).unwrap();
        let r = check_setting1(&ts, "iid").unwrap();
        let failures: Vec<_> = r.failures().map(|c| c.id.clone()).collect();
        assert!(failures.is_empty(), "{failures:?}");
    }

    #[test]
    fn setting1_point_mass_ratios_are_one() {
        let c = DiscreteDist::point_mass(q(3, 1)).unwrap();
        let ts = TypeSpace::product(vec![vec![c.clone(), c]]).unwrap();
        let r = check_setting1(&ts, "pm").unwrap();
        assert!(r.passed());
        assert_eq!(r.get_value("lottery-revenue"), Some(&q(3, 1)));
        assert_eq!(r.get_value("pricing-revenue"), Some(&q(3, 1)));
        assert_eq!(r.get_value("myerson-copies"), Some(&q(3, 1)));
    }

    #[test]
    fn lift_of_null_menu_is_null() {
        let ts = TypeSpace::additive(vec![two_point(), two_point()]).unwrap();
        let menu = LotteryMenu::new(1, vec![], LotteryCap::Simplex).unwrap();
        let (lifted, ts2) = additive_lift(&menu, &ts).unwrap();
        assert_eq!(lifted.len(), 1);
        assert!(lifted.lotteries()[0].is_null());
        assert_eq!(ts2.n_items(), 2);
    }

    #[test]
    fn lift_of_sure_item() {
        let ts = TypeSpace::additive(vec![two_point(), two_point(), two_point()]).unwrap();
        let menu = LotteryMenu::new(
            2,
            vec![Lottery::new(vec![q(1, 1), q(0, 1)], q(2, 1))],
            LotteryCap::Simplex,
        )
        .unwrap();
        let (lifted, _) = additive_lift(&menu, &ts).unwrap();
        assert_eq!(lifted.lotteries()[1].q, vec![q(1, 1), q(1, 1), q(0, 1)]);
    }

    #[test]
    fn setting2_iid_components() {
        let ts = TypeSpace::additive(vec![two_point(), two_point(), two_point()]).unwrap();
        let r = check_setting2(&ts, "add").unwrap();
        let failures: Vec<_> = r.failures().map(|c| c.id.clone()).collect();
        assert!(failures.is_empty(), "{failures:?}");
    }

    #[test]
    fn setting2_rejects_product_types() {
        let ts = TypeSpace::product(vec![vec![two_point()]]).unwrap();
        assert!(check_setting2(&ts, "x").is_err());
    }
}
