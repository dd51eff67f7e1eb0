use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::{default_order, Lottery, LotteryMenu};
use crate::dist::TypeSpace;
use crate::error::{Error, Result};
use crate::feas::{ElementSet, FeasibilitySystem, GroundElement};
use crate::json::{wrap, Num};
use crate::scalar::{sum, Scalar};

/// Largest ground set on which rank constraints are checked over every subset.
pub const EXHAUSTIVE_RANK_GROUND: usize = 12;

/// Allocation probabilities `q[profile][agent][item]` and payments
/// `pay[profile][agent]` for every profile of a type space.
#[derive(Clone, Debug, PartialEq)]
pub struct MechanismTable<T> {
    agents: usize,
    items: usize,
    alloc: Vec<Vec<Vec<T>>>,
    pay: Vec<Vec<T>>,
}

impl<T: Scalar> MechanismTable<T> {
    pub fn new(ts: &TypeSpace<T>, alloc: Vec<Vec<Vec<T>>>, pay: Vec<Vec<T>>) -> Result<Self> {
        let (n, m) = (ts.n_agents(), ts.n_items());
        let shape_ok = alloc.len() == ts.profile_count()
            && pay.len() == ts.profile_count()
            && alloc
                .iter()
                .all(|a| a.len() == n && a.iter().all(|q| q.len() == m))
            && pay.iter().all(|p| p.len() == n);
        if !shape_ok {
            return Err(Error::Validation(format!(
                "table shape does not match {} profiles x {n} agents x {m} items",
                ts.profile_count()
            )));
        }
        if alloc
            .iter()
            .flatten()
            .flatten()
            .any(|q| !T::zero().le_tol(q) || !q.le_tol(&T::one()))
        {
            return Err(Error::Validation(
                "allocation probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(MechanismTable {
            agents: n,
            items: m,
            alloc,
            pay,
        })
    }

    /// Build from a rule giving `(allocation matrix, payments)` per profile index.
    pub fn from_fn(
        ts: &TypeSpace<T>,
        rule: impl Fn(usize) -> (Vec<Vec<T>>, Vec<T>),
    ) -> Result<Self> {
        let (alloc, pay) = (0..ts.profile_count()).map(rule).unzip();
        Self::new(ts, alloc, pay)
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn allocation(&self, profile: usize, agent: usize) -> &[T] {
        &self.alloc[profile][agent]
    }

    pub fn payment(&self, profile: usize, agent: usize) -> &T {
        &self.pay[profile][agent]
    }

    pub fn outcome(&self, profile: usize, agent: usize) -> Lottery<T> {
        Lottery::new(
            self.alloc[profile][agent].clone(),
            self.pay[profile][agent].clone(),
        )
    }

    /// Flattened allocation `x[i * items + j]`.
    pub fn flat_allocation(&self, profile: usize) -> Vec<T> {
        self.alloc[profile].iter().flatten().cloned().collect()
    }

    pub fn revenue_at(&self, profile: usize) -> T {
        sum(self.pay[profile].iter().cloned())
    }

    pub fn revenue(&self, ts: &TypeSpace<T>) -> T {
        ts.profiles().fold(T::zero(), |acc, p| {
            acc + p.prob.clone() * self.revenue_at(p.index)
        })
    }

    /// Profiles where some rank constraint `sum_{e in S} q_e <= r(S)` fails.
    pub fn feasibility(
        &self,
        ts: &TypeSpace<T>,
        fs: &FeasibilitySystem,
    ) -> Result<FeasibilityReport<T>> {
        if fs.agents() * fs.items() != self.agents * self.items {
            return Err(Error::Validation(
                "feasibility system does not match the table".into(),
            ));
        }
        let ground = fs.ground_size();
        let rows: Vec<(ElementSet, usize)> = if ground <= EXHAUSTIVE_RANK_GROUND {
            ElementSet::full(ground)
                .subsets()
                .skip(1)
                .map(|s| fs.rank(s).map(|r| (s, r)))
                .collect::<Result<_>>()?
        } else {
            let mut rows = fs.polytope_rows();
            rows.extend((0..ground).map(|e| (ElementSet::singleton(e), 1)));
            rows
        };
        let mut violations = Vec::new();
        for profile in 0..self.alloc.len() {
            let x = self.flat_allocation(profile);
            for (s, r) in &rows {
                let lhs = sum(s.iter().map(|e| x[e].clone()));
                if lhs.definitely_gt(&T::from_i64(*r as i64)) {
                    violations.push(FeasibilityViolation {
                        profile: ts.decode(profile),
                        set: fs.elements_of(*s),
                        lhs: Num(lhs),
                        rank: *r,
                    });
                    break;
                }
            }
        }
        Ok(FeasibilityReport {
            exhaustive: ground <= EXHAUSTIVE_RANK_GROUND,
            violations,
        })
    }

    pub fn to_json(&self, ts: &TypeSpace<T>) -> Vec<TableRowJson<T>> {
        (0..self.alloc.len())
            .map(|k| TableRowJson {
                profile: ts.decode(k),
                allocation: self.alloc[k].iter().map(|q| wrap(q)).collect(),
                payments: wrap(&self.pay[k]),
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct TableRowJson<T: Scalar> {
    pub profile: Vec<usize>,
    pub allocation: Vec<Vec<Num<T>>>,
    pub payments: Vec<Num<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct FeasibilityViolation<T: Scalar> {
    pub profile: Vec<usize>,
    pub set: Vec<GroundElement>,
    pub lhs: Num<T>,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct FeasibilityReport<T: Scalar> {
    /// Whether every subset was checked (otherwise the polytope rows only).
    pub exhaustive: bool,
    pub violations: Vec<FeasibilityViolation<T>>,
}

impl<T: Scalar> FeasibilityReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Agent `agent` at profile `profile` gains `gain` by reporting type `report`
/// (for individual rationality, `report` is the true type and `gain` the
/// utility shortfall below zero).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct IcViolation<T: Scalar> {
    pub agent: usize,
    pub profile: Vec<usize>,
    pub report: usize,
    pub gain: Num<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct IcReport<T: Scalar> {
    pub checked: usize,
    pub violations: Vec<IcViolation<T>>,
}

impl<T: Scalar> IcReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Ex-post incentive compatibility over every agent, profile and misreport.
pub fn check_ic<T: Scalar>(table: &MechanismTable<T>, ts: &TypeSpace<T>) -> IcReport<T> {
    let mut checked = 0;
    let mut violations = Vec::new();
    for p in ts.profiles() {
        for i in 0..ts.n_agents() {
            let v = ts.values(&p, i);
            let truthful = table.outcome(p.index, i).utility(v);
            for t in 0..ts.agent(i).len() {
                if t == p.types[i] {
                    continue;
                }
                checked += 1;
                let lie = ts.with_agent_type(p.index, i, t);
                let u = table.outcome(lie, i).utility(v);
                if u.definitely_gt(&truthful) {
                    violations.push(IcViolation {
                        agent: i,
                        profile: p.types.clone(),
                        report: t,
                        gain: Num(u - truthful.clone()),
                    });
                }
            }
        }
    }
    IcReport {
        checked,
        violations,
    }
}

/// Truthful utility is nonnegative for every agent and profile.
pub fn check_ir<T: Scalar>(table: &MechanismTable<T>, ts: &TypeSpace<T>) -> IcReport<T> {
    let mut checked = 0;
    let mut violations = Vec::new();
    for p in ts.profiles() {
        for i in 0..ts.n_agents() {
            checked += 1;
            let u = table.outcome(p.index, i).utility(ts.values(&p, i));
            if T::zero().definitely_gt(&u) {
                violations.push(IcViolation {
                    agent: i,
                    profile: p.types.clone(),
                    report: p.types[i],
                    gain: Num(-u),
                });
            }
        }
    }
    IcReport {
        checked,
        violations,
    }
}

/// Per agent and opponents' profile, the menu offered to that agent.
#[derive(Clone, Debug, PartialEq)]
pub struct LotteryMechanism<T> {
    items: usize,
    /// `menus[i][o]` for agent `i` facing opponents' profile index `o`.
    menus: Vec<Vec<LotteryMenu<T>>>,
    /// `assigned[i][o][t]`: the entry type `t` takes. Each is a utility
    /// maximizer; the record settles ties no single order can.
    assigned: Option<Vec<Vec<Vec<usize>>>>,
}

impl<T: Scalar> LotteryMechanism<T> {
    pub fn new(items: usize, menus: Vec<Vec<LotteryMenu<T>>>) -> Self {
        LotteryMechanism {
            items,
            menus,
            assigned: None,
        }
    }

    /// A single agent offered one fixed menu.
    pub fn single(menu: LotteryMenu<T>) -> Self {
        Self::new(menu.items(), vec![vec![menu]])
    }

    /// Which entry each agent type takes, for every menu.
    pub fn assigned_choices(&self) -> Option<&[Vec<Vec<usize>>]> {
        self.assigned.as_deref()
    }

    pub fn agents(&self) -> usize {
        self.menus.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn menu(&self, ts: &TypeSpace<T>, profile: usize, agent: usize) -> &LotteryMenu<T> {
        let o = if self.menus[agent].len() == 1 {
            0
        } else {
            ts.opponents_index(profile, agent)
        };
        &self.menus[agent][o]
    }

    pub fn menus(&self, agent: usize) -> &[LotteryMenu<T>] {
        &self.menus[agent]
    }

    /// Index of the lottery `agent` picks at `profile`.
    pub fn choice(&self, ts: &TypeSpace<T>, profile: usize, agent: usize) -> usize {
        let types = ts.decode(profile);
        match &self.assigned {
            Some(a) => {
                let o = if a[agent].len() == 1 {
                    0
                } else {
                    ts.opponents_index(profile, agent)
                };
                a[agent][o][types[agent]]
            }
            None => self
                .menu(ts, profile, agent)
                .best_response(&ts.agent(agent).types[types[agent]].values),
        }
    }

    pub fn outcome(&self, ts: &TypeSpace<T>, profile: usize, agent: usize) -> &Lottery<T> {
        &self.menu(ts, profile, agent).lotteries()[self.choice(ts, profile, agent)]
    }

    /// Index of the lottery each agent picks at `profile`.
    pub fn choices(&self, ts: &TypeSpace<T>, profile: usize) -> Vec<usize> {
        (0..self.agents())
            .map(|i| self.choice(ts, profile, i))
            .collect()
    }

    /// The allocation and payments produced by best responses.
    pub fn induced_table(&self, ts: &TypeSpace<T>) -> Result<MechanismTable<T>> {
        MechanismTable::from_fn(ts, |k| {
            let picks = self.choices(ts, k);
            let chosen: Vec<&Lottery<T>> = picks
                .iter()
                .enumerate()
                .map(|(i, &c)| &self.menu(ts, k, i).lotteries()[c])
                .collect();
            (
                chosen.iter().map(|l| l.q.clone()).collect(),
                chosen.iter().map(|l| l.p.clone()).collect(),
            )
        })
    }

    pub fn revenue(&self, ts: &TypeSpace<T>) -> Result<T> {
        Ok(self.induced_table(ts)?.revenue(ts))
    }
}

/// Rank constraints of the allocation induced by `lm`, on every profile.
pub fn lottery_mech_feasibility_check<T: Scalar>(
    lm: &LotteryMechanism<T>,
    fs: &FeasibilitySystem,
    ts: &TypeSpace<T>,
) -> Result<FeasibilityReport<T>> {
    lm.induced_table(ts)?.feasibility(ts, fs)
}

/// Menus made of the outcomes each agent can reach by varying its own report.
///
/// The mechanism records the table's choice for every type. The menu order
/// ranks the entry the table assigns to a type above the entries that type
/// is indifferent to, preferring higher prices and then lower indices; when
/// such requirements are cyclic the order is the default one and only the
/// record reproduces the table.
pub fn mechanism_to_lottery<T: Scalar>(
    table: &MechanismTable<T>,
    ts: &TypeSpace<T>,
) -> Result<LotteryMechanism<T>> {
    let items = ts.n_items();
    let mut menus = Vec::with_capacity(ts.n_agents());
    let mut assigned_all = Vec::with_capacity(ts.n_agents());
    for i in 0..ts.n_agents() {
        let k_i = ts.agent(i).len();
        let mut agent_menus: Vec<Option<LotteryMenu<T>>> = vec![None; ts.opponents_count(i)];
        let mut agent_assigned = vec![Vec::new(); ts.opponents_count(i)];
        for base in (0..ts.profile_count()).filter(|&k| ts.decode(k)[i] == 0) {
            let o = ts.opponents_index(base, i);
            let mut entries = vec![Lottery::null(items)];
            let mut assigned = Vec::with_capacity(k_i);
            for t in 0..k_i {
                let l = table.outcome(ts.with_agent_type(base, i, t), i);
                let idx = match entries.iter().position(|e| e.near(&l)) {
                    Some(idx) => idx,
                    None => {
                        entries.push(l);
                        entries.len() - 1
                    }
                };
                assigned.push(idx);
            }

            let mut edges: Vec<Vec<usize>> = vec![Vec::new(); entries.len()];
            for (t, &own) in assigned.iter().enumerate() {
                let v = &ts.agent(i).types[t].values;
                let u_own = entries[own].utility(v);
                for (k, e) in entries.iter().enumerate() {
                    if k == own {
                        continue;
                    }
                    let u = e.utility(v);
                    if u.definitely_gt(&u_own) {
                        let mut types = ts.decode(base);
                        types[i] = t;
                        if k == 0 {
                            return Err(Error::Validation(format!(
                                "not individually rational: agent {i} at profile {types:?} has utility {u_own}"
                            )));
                        }
                        let report = assigned.iter().position(|&a| a == k).unwrap();
                        return Err(Error::NotIncentiveCompatible {
                            agent: i,
                            profile: types,
                            report,
                            gain: (u - u_own).render(),
                        });
                    }
                    if u.near(&u_own) {
                        edges[own].push(k);
                    }
                }
            }
            let order =
                topological_order(&entries, &edges).unwrap_or_else(|| default_order(&entries));
            agent_menus[o] = Some(LotteryMenu::with_order(items, entries, order)?);
            agent_assigned[o] = assigned;
        }
        menus.push(
            agent_menus
                .into_iter()
                .map(|m| m.expect("every opponent profile visited"))
                .collect(),
        );
        assigned_all.push(agent_assigned);
    }
    Ok(LotteryMechanism {
        items,
        menus,
        assigned: Some(assigned_all),
    })
}

/// Kahn's algorithm; among available entries the default tie order decides.
pub(crate) fn topological_order<T: Scalar>(
    entries: &[Lottery<T>],
    edges: &[Vec<usize>],
) -> Option<Vec<usize>> {
    let rank_of = {
        let default = default_order(entries);
        let mut rank = vec![0; entries.len()];
        for (r, &k) in default.iter().enumerate() {
            rank[k] = r;
        }
        rank
    };
    let mut indegree = vec![0usize; entries.len()];
    for targets in edges {
        for &k in targets {
            indegree[k] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..entries.len())
        .filter(|&k| indegree[k] == 0)
        .map(|k| Reverse((rank_of[k], k)))
        .collect();
    let mut order = Vec::with_capacity(entries.len());
    while let Some(Reverse((_, k))) = ready.pop() {
        order.push(k);
        for &next in &edges[k] {
            indegree[next] -= 1;
            if indegree[next] == 0 {
                ready.push(Reverse((rank_of[next], next)));
            }
        }
    }
    (order.len() == entries.len()).then_some(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;
    use crate::scalar::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn two_point() -> DiscreteDist<Rational> {
        DiscreteDist::new(vec![r(1), r(2)], vec![Rational::from_ratio(1, 2); 2]).unwrap()
    }

    /// Two single-item bidders with values in {1, 2}.
    fn two_bidders() -> TypeSpace<Rational> {
        TypeSpace::product(vec![vec![two_point()], vec![two_point()]]).unwrap()
    }

    fn vickrey_table(ts: &TypeSpace<Rational>) -> MechanismTable<Rational> {
        MechanismTable::from_fn(ts, |k| {
            let p = ts.profile(k);
            let v: Vec<Rational> = (0..2).map(|i| ts.values(&p, i)[0].clone()).collect();
            let winner = if v[1] > v[0] { 1 } else { 0 };
            let mut alloc = vec![vec![r(0)], vec![r(0)]];
            let mut pay = vec![r(0), r(0)];
            alloc[winner][0] = r(1);
            pay[winner] = v[1 - winner].clone();
            (alloc, pay)
        })
        .unwrap()
    }

    #[test]
    fn vickrey_is_truthful_and_converts() {
        let ts = two_bidders();
        let table = vickrey_table(&ts);
        assert!(check_ic(&table, &ts).passed());
        assert!(check_ir(&table, &ts).passed());
        let lm = mechanism_to_lottery(&table, &ts).unwrap();
        assert_eq!(lm.induced_table(&ts).unwrap(), table);
        assert_eq!(table.revenue(&ts), Rational::from_ratio(5, 4));
    }

    #[test]
    fn pay_your_bid_is_not_truthful() {
        let ts = two_bidders();
        let table = MechanismTable::from_fn(&ts, |k| {
            let p = ts.profile(k);
            let v: Vec<Rational> = (0..2).map(|i| ts.values(&p, i)[0].clone()).collect();
            let winner = if v[1] > v[0] { 1 } else { 0 };
            let mut alloc = vec![vec![r(0)], vec![r(0)]];
            let mut pay = vec![r(0), r(0)];
            alloc[winner][0] = r(1);
            pay[winner] = v[winner].clone();
            (alloc, pay)
        })
        .unwrap();
        let report = check_ic(&table, &ts);
        assert!(!report.passed());
        assert!(matches!(
            mechanism_to_lottery(&table, &ts),
            Err(Error::NotIncentiveCompatible { .. })
        ));
    }

    #[test]
    fn posted_price_table_becomes_pricing_menu() {
        let ts = TypeSpace::product(vec![vec![two_point(), two_point()]]).unwrap();
        let table = MechanismTable::from_fn(&ts, |k| {
            let v = ts.values(&ts.profile(k), 0).to_vec();
            if v[0] >= r(2) {
                (vec![vec![r(1), r(0)]], vec![r(2)])
            } else {
                (vec![vec![r(0), r(0)]], vec![r(0)])
            }
        })
        .unwrap();
        let lm = mechanism_to_lottery(&table, &ts).unwrap();
        let menu = &lm.menus(0)[0];
        assert_eq!(menu.len(), 2);
        assert_eq!(menu.lotteries()[1], Lottery::new(vec![r(1), r(0)], r(2)));
        assert_eq!(lm.induced_table(&ts).unwrap(), table);
    }

    #[test]
    fn constant_table_gives_single_lottery() {
        let ts = TypeSpace::product(vec![vec![two_point(), two_point()]]).unwrap();
        let half = Rational::from_ratio(1, 2);
        let table = MechanismTable::from_fn(&ts, |_| {
            (vec![vec![half.clone(), half.clone()]], vec![r(1)])
        })
        .unwrap();
        let lm = mechanism_to_lottery(&table, &ts).unwrap();
        assert_eq!(lm.menus(0)[0].len(), 2);
        assert_eq!(lm.induced_table(&ts).unwrap(), table);
    }

    #[test]
    fn tie_resolution_follows_the_table() {
        // type (3,1) is indifferent between (1/2,1/2) at price 0 and (1,0) at
        // price 1; the table picks the cheaper one, against the default order
        let d = DiscreteDist::new(vec![r(3), r(4)], vec![Rational::from_ratio(1, 2); 2]).unwrap();
        let ts =
            TypeSpace::product(vec![vec![d, DiscreteDist::point_mass(r(1)).unwrap()]]).unwrap();
        let half = Rational::from_ratio(1, 2);
        let table = MechanismTable::from_fn(&ts, |k| {
            if ts.decode(k)[0] == 0 {
                (vec![vec![half.clone(), half.clone()]], vec![r(0)])
            } else {
                (vec![vec![r(1), r(0)]], vec![r(1)])
            }
        })
        .unwrap();
        let lm = mechanism_to_lottery(&table, &ts).unwrap();
        assert_eq!(lm.induced_table(&ts).unwrap(), table);
        let menu = &lm.menus(0)[0];
        let default = LotteryMenu::new(
            2,
            menu.lotteries().to_vec(),
            super::super::LotteryCap::Simplex,
        )
        .unwrap();
        assert_ne!(
            default.best_response(&[r(3), r(1)]),
            menu.best_response(&[r(3), r(1)])
        );
    }

    #[test]
    fn feasibility_witness() {
        let ts = two_bidders();
        let fs = FeasibilitySystem::matching(2, vec![1]).unwrap();
        assert!(vickrey_table(&ts).feasibility(&ts, &fs).unwrap().passed());
        let both =
            MechanismTable::from_fn(&ts, |_| (vec![vec![r(1)], vec![r(1)]], vec![r(0), r(0)]))
                .unwrap();
        let report = both.feasibility(&ts, &fs).unwrap();
        assert_eq!(report.violations.len(), 4);
        assert_eq!(report.violations[0].rank, 1);
    }
}
