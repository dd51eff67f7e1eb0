use crate::dist::{DiscreteDist, Structure, TypeSpace};
use crate::error::{Error, Result};
use crate::feas::{ElementSet, FeasibilitySystem};
use crate::mech::{topological_order, Lottery, LotteryMechanism, LotteryMenu, MechanismTable};
use crate::scalar::{dot, Scalar};

use super::report::Pointwise;
use super::GapCheck;

/// The single-parameter instance with one pseudo-agent per (agent, item)
/// pair. Pseudo-agent `i * m + j` has the marginal `F_ij`.
#[derive(Clone, Debug)]
pub struct CopiesInstance<T> {
    pub ts: TypeSpace<T>,
    pub fs: FeasibilitySystem,
    pub agents: usize,
    pub items: usize,
}

/// Split every agent into independent pseudo-agents. Requires independent
/// item values, so that profile indices of the two type spaces coincide.
pub fn build_copies<T: Scalar>(
    ts: &TypeSpace<T>,
    fs: &FeasibilitySystem,
) -> Result<CopiesInstance<T>> {
    let (n, m) = (ts.n_agents(), ts.n_items());
    if fs.agents() != n || fs.items() != m {
        return Err(Error::Validation(
            "feasibility system does not match the type space".into(),
        ));
    }
    let mut dists: Vec<Vec<DiscreteDist<T>>> = Vec::with_capacity(n * m);
    for i in 0..n {
        let Structure::Product(row) = &ts.agent(i).structure else {
            return Err(Error::Validation(format!(
                "agent {i} has correlated item values; copies need independent ones"
            )));
        };
        dists.extend(row.iter().map(|d| vec![d.clone()]));
    }
    Ok(CopiesInstance {
        ts: TypeSpace::product_with_cap(dists, ts.profile_count().max(1))?,
        fs: fs.copies(),
        agents: n,
        items: m,
    })
}

/// The one-item menu pseudo-agent `(i, j)` faces when the other values of
/// agent `i` are fixed: each lottery becomes `(q_j, p - sum_{k != j} q_k v_k + delta)`
/// with `delta` the least shift making every price nonnegative. Entries keep
/// the parent's indices and preference order; when `delta > 0` a no-purchase
/// entry is appended last.
pub fn derived_menu<T: Scalar>(
    menu: &LotteryMenu<T>,
    values: &[T],
    j: usize,
) -> Result<(LotteryMenu<T>, T)> {
    let pre: Vec<T> = menu
        .lotteries()
        .iter()
        .map(|l| {
            let others = dot(&l.q, values) - l.q[j].clone() * values[j].clone();
            l.p.clone() - others
        })
        .collect();
    let lowest = pre
        .iter()
        .cloned()
        .reduce(|a, b| a.min_of(b))
        .expect("menus are nonempty");
    let delta = (T::zero() - lowest).max_of(T::zero());
    let mut entries: Vec<Lottery<T>> = menu
        .lotteries()
        .iter()
        .zip(pre)
        .map(|(l, p)| Lottery::new(vec![l.q[j].clone()], p + delta.clone()))
        .collect();
    let mut order = menu.order().to_vec();
    if !entries.iter().any(Lottery::is_null) {
        order.push(entries.len());
        entries.push(Lottery::null(1));
    }
    Ok((LotteryMenu::with_order(1, entries, order)?, delta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlEntry<T> {
    pub delta: T,
    /// Index of the parent's chosen entry.
    pub chosen: usize,
    pub q: T,
    pub payment: T,
}

/// The mechanism `A^L` on every profile: `entries[profile][i * m + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ALRecord<T> {
    pub agents: usize,
    pub items: usize,
    pub entries: Vec<Vec<AlEntry<T>>>,
}

impl<T: Scalar> ALRecord<T> {
    pub fn entry(&self, profile: usize, e: usize) -> &AlEntry<T> {
        &self.entries[profile][e]
    }

    pub fn revenue_at(&self, profile: usize) -> T {
        self.entries[profile]
            .iter()
            .fold(T::zero(), |acc, e| acc + e.payment.clone())
    }

    /// Revenue at `profile` from the pseudo-agents in `set`.
    pub fn revenue_from(&self, profile: usize, set: ElementSet) -> T {
        set.iter().fold(T::zero(), |acc, e| {
            acc + self.entries[profile][e].payment.clone()
        })
    }

    pub fn revenue(&self, ts: &TypeSpace<T>) -> T {
        ts.profiles().fold(T::zero(), |acc, p| {
            acc + p.prob.clone() * self.revenue_at(p.index)
        })
    }

    /// Expected revenue from the pseudo-agents in `set`.
    pub fn revenue_of(&self, ts: &TypeSpace<T>, set: ElementSet) -> T {
        ts.profiles().fold(T::zero(), |acc, p| {
            acc + p.prob.clone() * self.revenue_from(p.index, set)
        })
    }

    /// `A^L` as a table on the copies type space (same profile indices).
    pub fn table(&self, copies: &TypeSpace<T>) -> Result<MechanismTable<T>> {
        if copies.profile_count() != self.entries.len()
            || copies.n_agents() != self.agents * self.items
        {
            return Err(Error::Validation(
                "copies type space does not match the record".into(),
            ));
        }
        MechanismTable::from_fn(copies, |k| {
            let row = &self.entries[k];
            (
                row.iter().map(|e| vec![e.q.clone()]).collect(),
                row.iter().map(|e| e.payment.clone()).collect(),
            )
        })
    }
}

/// The one-item menu pseudo-agent `(i, j)` chooses from at `profile`: the
/// derived entries with equal outcomes merged, ordered so that every type of
/// agent `i` sharing the values off item `j` gets the outcome of its parent's
/// choice. Returns the menu and, per parent entry, its merged index.
fn pseudo_agent_menu<T: Scalar>(
    lm: &LotteryMechanism<T>,
    ts: &TypeSpace<T>,
    profile: usize,
    i: usize,
    j: usize,
) -> Result<(LotteryMenu<T>, Vec<usize>, T)> {
    let menu = lm.menu(ts, profile, i);
    let types = ts.decode(profile);
    let agent = ts.agent(i);
    let v = &agent.types[types[i]].values;
    let (derived, delta) = derived_menu(menu, v, j)?;
    let mut merged: Vec<Lottery<T>> = Vec::new();
    let group: Vec<usize> = derived
        .lotteries()
        .iter()
        .map(|l| match merged.iter().position(|m| m.near(l)) {
            Some(g) => g,
            None => {
                merged.push(l.clone());
                merged.len() - 1
            }
        })
        .collect();
    let mut edges = vec![Vec::new(); merged.len()];
    for (t, ty) in agent.types.iter().enumerate() {
        let same_rest = (0..v.len()).all(|k| k == j || ty.values[k] == v[k]);
        if !same_rest {
            continue;
        }
        let own = group[lm.choice(ts, ts.with_agent_type(profile, i, t), i)];
        let x = &ty.values[j..=j];
        let u_own = merged[own].utility(x);
        for (g, l) in merged.iter().enumerate() {
            if g != own && l.utility(x).near(&u_own) && !edges[own].contains(&g) {
                edges[own].push(g);
            }
        }
    }
    let order = topological_order(&merged, &edges).ok_or_else(|| {
        let mut opponents = types.clone();
        opponents.remove(i);
        Error::TieInconsistent {
            agent: i,
            opponents,
        }
    })?;
    Ok((LotteryMenu::with_order(1, merged, order)?, group, delta))
}

/// Build `A^L` for every profile and check that each pseudo-agent receives
/// the outcome of its parent's choice and pays a nonnegative price.
pub fn build_a_l<T: Scalar>(lm: &LotteryMechanism<T>, ts: &TypeSpace<T>) -> Result<ALRecord<T>> {
    let (n, m) = (ts.n_agents(), ts.n_items());
    let mut entries = Vec::with_capacity(ts.profile_count());
    for p in ts.profiles() {
        let mut row = Vec::with_capacity(n * m);
        for i in 0..n {
            let v = ts.values(&p, i);
            let parent = lm.choice(ts, p.index, i);
            for j in 0..m {
                let (menu, group, delta) = pseudo_agent_menu(lm, ts, p.index, i, j)?;
                let chosen = menu.best_response(&v[j..=j]);
                if chosen != group[parent] {
                    return Err(Error::Invariant(format!(
                        "pseudo-agent ({i}, {j}) at profile {:?} picks outcome {chosen} but agent {i} picks {}",
                        p.types, group[parent]
                    )));
                }
                let l = &menu.lotteries()[chosen];
                if l.p < T::zero() && !l.p.near(&T::zero()) {
                    return Err(Error::Invariant(format!(
                        "pseudo-agent ({i}, {j}) at profile {:?} pays {}",
                        p.types, l.p
                    )));
                }
                row.push(AlEntry {
                    delta,
                    chosen: parent,
                    q: l.q[0].clone(),
                    payment: l.p.clone(),
                });
            }
        }
        entries.push(row);
    }
    Ok(ALRecord {
        agents: n,
        items: m,
        entries,
    })
}

/// For every profile, with `sigma(v)` a unit-demand set of pseudo-agents:
/// `Rev[M^L](v) <= sum_{e in sigma} Rev[A^L]_e(v) + sum_{e not in sigma} q_e v_e`,
/// and the weaker form with all of `Rev[A^L](v)` on the right.
pub fn check_copies_bound<T: Scalar>(
    lm: &LotteryMechanism<T>,
    al: &ALRecord<T>,
    ts: &TypeSpace<T>,
    sigma: impl Fn(usize) -> ElementSet,
) -> Result<(GapCheck<T>, GapCheck<T>)> {
    let table = lm.induced_table(ts)?;
    let mut strong = Pointwise::le("copies-bound-pointwise");
    let mut weak = Pointwise::le("copies-bound-total-al-pointwise");
    for p in ts.profiles() {
        let set = sigma(p.index);
        let x = table.flat_allocation(p.index);
        let v: Vec<T> = ts.matrix(&p).into_iter().flatten().collect();
        let rest = (0..x.len())
            .filter(|e| !set.contains(*e))
            .fold(T::zero(), |acc, e| acc + x[e].clone() * v[e].clone());
        let rev = table.revenue_at(p.index);
        strong.observe(
            &p.types,
            rev.clone(),
            al.revenue_from(p.index, set) + rest.clone(),
        );
        weak.observe(&p.types, rev, al.revenue_at(p.index) + rest);
    }
    Ok((strong.finish(), weak.finish()))
}

/// The highest-valued item of each agent, lowest index on ties.
pub fn best_item_per_agent<T: Scalar>(ts: &TypeSpace<T>, profile: usize) -> ElementSet {
    let p = ts.profile(profile);
    let m = ts.n_items();
    (0..ts.n_agents())
        .map(|i| {
            let v = ts.values(&p, i);
            let j = (0..m).fold(0, |b, j| if v[j] > v[b] { j } else { b });
            i * m + j
        })
        .collect()
}
