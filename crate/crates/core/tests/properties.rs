use proptest::prelude::*;

use randgap::bounds::{
    build_a_l, build_copies, monotonicity_violations, split_sets, threshold_outcome,
};
use randgap::feas::{
    partial_exchange_maps, verify_partial_exchange, ElementSet, FeasibilitySystem,
};
use randgap::harness::{check_instance, generate_instance, ExperimentConfig, Instance, Setting};
use randgap::mech::mechanism_to_lottery;
use randgap::opt::optimal_dsic_lp;
use randgap::{Rational, Scalar};

fn instance(setting: Setting, seed: u64, index: usize, n: usize, m: usize) -> Instance<Rational> {
    let cfg = ExperimentConfig {
        seed,
        setting,
        n,
        m,
        support: 2,
        count: index + 1,
        ..Default::default()
    };
    generate_instance(&cfg, index).unwrap()
}

fn multi_setting() -> impl Strategy<Value = Setting> {
    prop_oneof![Just(Setting::Matching), Just(Setting::Matroid)]
}

fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn single_buyer_inequalities_hold(seed in 0u64..1_000_000, m in 1usize..=2, additive in any::<bool>()) {
        let setting = if additive { Setting::Additive } else { Setting::Independent };
        let inst = instance(setting, seed, 0, 1, m);
        let report = check_instance(&inst).unwrap();
        let failed: Vec<_> = report.failures().map(|c| c.id.clone()).collect();
        prop_assert!(failed.is_empty(), "{}: {:?}", inst.id, failed);
    }

    #[test]
    fn multi_agent_inequalities_hold(seed in 0u64..1_000_000, setting in multi_setting()) {
        let inst = instance(setting, seed, 0, 2, 2);
        let report = check_instance(&inst).unwrap();
        let failed: Vec<_> = report.failures().map(|c| c.id.clone()).collect();
        prop_assert!(failed.is_empty(), "{}: {:?}", inst.id, failed);
    }

    #[test]
    fn pseudo_agent_prices_follow_parent(seed in 0u64..1_000_000, setting in multi_setting()) {
        let inst = instance(setting, seed, 0, 2, 2);
        let fs = inst.fs.as_ref().unwrap();
        let dsic = optimal_dsic_lp(&inst.ts, fs).unwrap();
        let lm = mechanism_to_lottery(&dsic.table, &inst.ts).unwrap();
        let al = build_a_l(&lm, &inst.ts).unwrap();
        let m = inst.ts.n_items();
        for p in inst.ts.profiles() {
            for i in 0..inst.ts.n_agents() {
                let parent = lm.outcome(&inst.ts, p.index, i);
                let v = inst.ts.values(&p, i);
                for j in 0..m {
                    let e = al.entry(p.index, i * m + j);
                    let others = (0..m)
                        .filter(|&k| k != j)
                        .fold(q(0), |acc, k| acc + parent.q[k].clone() * v[k].clone());
                    prop_assert!(e.payment >= q(0));
                    prop_assert!(e.delta >= q(0));
                    prop_assert_eq!(&e.q, &parent.q[j]);
                    prop_assert_eq!(e.payment.clone(), parent.p.clone() - others + e.delta.clone());
                }
            }
        }
    }

    #[test]
    fn feasible_sets_are_downward_closed(seed in 0u64..1_000_000, setting in multi_setting(), n in 1usize..=2, m in 1usize..=3) {
        let inst = instance(setting, seed, 0, n, m);
        let fs = inst.fs.as_ref().unwrap();
        let full = ElementSet::full(fs.ground_size());
        for s in full.subsets().filter(|s| fs.is_feasible(*s)) {
            for e in s.iter() {
                prop_assert!(fs.is_feasible(s.without(e)), "{s:?} minus {e}");
            }
        }
    }

    #[test]
    fn threshold_mechanisms_are_monotone(seed in 0u64..1_000_000, setting in multi_setting()) {
        let inst = instance(setting, seed, 0, 2, 2);
        let copies = build_copies(&inst.ts, inst.fs.as_ref().unwrap()).unwrap();
        prop_assert_eq!(monotonicity_violations(&copies.ts, &copies.fs).unwrap(), [0, 0]);
    }

    #[test]
    fn second_best_set_is_covered(
        seed in 0u64..1_000_000,
        setting in multi_setting(),
        weights in proptest::collection::vec(0i64..=10, 6),
    ) {
        let inst = instance(setting, seed, 0, 2, 3);
        let fs: &FeasibilitySystem = inst.fs.as_ref().unwrap();
        let v: Vec<Rational> = weights.into_iter().map(q).collect();
        let s = split_sets(fs, &v).unwrap();
        prop_assert!(fs.is_feasible(s.a1) && fs.is_feasible(s.a2));
        prop_assert!(s.a1.intersection(s.a2).is_empty());
        for e in s.a2.iter() {
            prop_assert!(s.g1.image(e).is_some() || s.g2.image(e).is_some(), "{e} unmapped");
        }
        for (g, j) in [(&s.g1, fs.j1()), (&s.g2, fs.j2())] {
            prop_assert!(verify_partial_exchange(j, s.a1, s.a2, g).is_ok());
            prop_assert_eq!(g, &partial_exchange_maps(j, s.a1, s.a2).unwrap());
        }
        // v(a2) <= 2 (M2 + M3) and both threshold outcomes are feasible
        let half = Rational::from_ratio(1, 2);
        let mut doubled = q(0);
        for g in [&s.g1, &s.g2] {
            let served = threshold_outcome(s.a1, g, &v);
            let set = served.iter().fold(ElementSet::EMPTY, |acc, (e, _)| acc.with(*e));
            prop_assert!(fs.is_feasible(set));
            for (e, price) in &served {
                prop_assert!(*price <= v[*e]);
                prop_assert!(g.preimage(*e).map_or(*price == q(0), |f| *price == half.clone() * v[f].clone()));
                doubled = doubled + q(2) * price.clone();
            }
        }
        let a2_value = s.a2.iter().fold(q(0), |acc, e| acc + v[e].clone());
        prop_assert!(a2_value <= doubled);
    }
}
