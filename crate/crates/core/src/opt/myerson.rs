use serde::Serialize;

use crate::dist::{DiscreteDist, TypeSpace};
use crate::error::{Error, Result};
use crate::feas::{ElementSet, FeasibilitySystem, SizePreference};
use crate::json::{wrap, Num};
use crate::mech::MechanismTable;
use crate::scalar::{sum, Scalar};

/// Discrete virtual values `phi` and their ironed version per support point.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualValueTable<T> {
    pub support: Vec<T>,
    pub phi: Vec<T>,
    pub ironed: Vec<T>,
}

impl<T: Scalar> VirtualValueTable<T> {
    pub fn to_json(&self) -> VirtualValueJson<T> {
        VirtualValueJson {
            support: wrap(&self.support),
            phi: wrap(&self.phi),
            ironed: wrap(&self.ironed),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct VirtualValueJson<T: Scalar> {
    pub support: Vec<Num<T>>,
    pub phi: Vec<Num<T>>,
    pub ironed: Vec<Num<T>>,
}

/// `phi(v_k) = v_k - (v_{k+1} - v_k) Pr[v > v_k] / f(v_k)`, with
/// `phi(v_K) = v_K` at the top of the support. The ironed value is the slope
/// of the concave envelope of the revenue curve `q -> v(q) q` over the
/// quantiles `q_k = Pr[v >= v_k]`, anchored at the origin.
pub fn virtual_values<T: Scalar>(d: &DiscreteDist<T>) -> VirtualValueTable<T> {
    let v = d.support();
    let f = d.probs();
    let k = v.len();
    let tails = d.tails();
    let mut phi = Vec::with_capacity(k);
    for i in 0..k {
        if i + 1 == k {
            phi.push(v[i].clone());
        } else {
            let above = tails[i + 1].clone();
            phi.push(v[i].clone() - (v[i + 1].clone() - v[i].clone()) * above / f[i].clone());
        }
    }

    // Points in increasing quantile order: the top value first.
    let mut points: Vec<(T, T)> = vec![(T::zero(), T::zero())];
    for i in (0..k).rev() {
        points.push((tails[i].clone(), v[i].clone() * tails[i].clone()));
    }
    let hull = upper_hull(&points);
    let mut slope_at = vec![T::zero(); points.len()];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let slope = (points[b].1.clone() - points[a].1.clone())
            / (points[b].0.clone() - points[a].0.clone());
        for s in slope_at.iter_mut().take(b + 1).skip(a + 1) {
            *s = slope.clone();
        }
    }
    // points[p] for p >= 1 corresponds to support index k - p.
    let ironed = (0..k).map(|i| slope_at[k - i].clone()).collect();
    VirtualValueTable {
        support: v.to_vec(),
        phi,
        ironed,
    }
}

/// Indices of the upper concave hull of points sorted by strictly increasing x.
fn upper_hull<T: Scalar>(points: &[(T, T)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..points.len() {
        while hull.len() >= 2 {
            let a = &points[hull[hull.len() - 2]];
            let b = &points[hull[hull.len() - 1]];
            let c = &points[i];
            // b lies on or below segment a-c
            let cross = (b.0.clone() - a.0.clone()) * (c.1.clone() - a.1.clone())
                - (b.1.clone() - a.1.clone()) * (c.0.clone() - a.0.clone());
            if T::zero().le_tol(&cross) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Revenue-maximizing posted price for one buyer: `argmax_v v Pr[X >= v]`
/// over the support, ties to the lower price.
pub fn monopoly_price<T: Scalar>(d: &DiscreteDist<T>) -> (T, T) {
    let tails = d.tails();
    let mut best = (
        d.support()[0].clone(),
        d.support()[0].clone() * tails[0].clone(),
    );
    for (v, tail) in d.support().iter().zip(&tails).skip(1) {
        let rev = v.clone() * tail.clone();
        if rev.definitely_gt(&best.1) {
            best = (v.clone(), rev);
        }
    }
    best
}

/// Second-highest entry, or 0 with fewer than two positive entries.
pub fn vickrey<T: Scalar>(values: &[T]) -> T {
    let mut top = T::zero();
    let mut second = T::zero();
    for v in values {
        if *v > top {
            second = std::mem::replace(&mut top, v.clone());
        } else if *v > second {
            second = v.clone();
        }
    }
    second
}

/// Expected second-highest value over all entries of each profile's valuation matrix.
pub fn expected_vickrey<T: Scalar>(ts: &TypeSpace<T>) -> T {
    ts.profiles().fold(T::zero(), |acc, p| {
        let flat: Vec<T> = ts.matrix(&p).into_iter().flatten().collect();
        acc + p.prob * vickrey(&flat)
    })
}

#[derive(Clone, Debug)]
pub struct MyersonOutcome<T> {
    pub table: MechanismTable<T>,
    /// Expected clipped ironed virtual surplus of the winners.
    pub virtual_surplus: T,
    /// Expected sum of threshold payments.
    pub threshold_revenue: T,
    pub virtual_values: Vec<VirtualValueTable<T>>,
}

impl<T: Scalar> MyersonOutcome<T> {
    pub fn revenue(&self) -> &T {
        &self.threshold_revenue
    }
}

/// Myerson's mechanism on a single-parameter instance: every agent has one
/// item and independent values. Winners maximize the ironed virtual surplus
/// among agents with nonnegative ironed virtual value; among maximizers the
/// most winners, then the lexicographically smallest set. Each winner pays
/// the lowest report at which it would still win.
pub fn myerson<T: Scalar>(ts: &TypeSpace<T>, fs: &FeasibilitySystem) -> Result<MyersonOutcome<T>> {
    let n = ts.n_agents();
    if ts.n_items() != 1 {
        return Err(Error::Validation(format!(
            "Myerson's mechanism needs single-parameter agents, got {} items",
            ts.n_items()
        )));
    }
    if fs.ground_size() != n {
        return Err(Error::Validation(format!(
            "feasibility ground set {} does not match {n} agents",
            fs.ground_size()
        )));
    }
    // Agent types are kept in the order of the marginal's support.
    let tables: Vec<VirtualValueTable<T>> = (0..n)
        .map(|i| {
            let d = ts.marginal(i, 0);
            let agent = ts.agent(i);
            let sorted = agent
                .types
                .windows(2)
                .all(|w| w[0].values[0] < w[1].values[0]);
            if !sorted || agent.len() != d.len() {
                return Err(Error::Validation(format!(
                    "agent {i} types must be distinct values in ascending order"
                )));
            }
            Ok(virtual_values(&d))
        })
        .collect::<Result<_>>()?;

    let count = ts.profile_count();
    let mut winners = Vec::with_capacity(count);
    let mut virtual_surplus = T::zero();
    for p in ts.profiles() {
        let mut weights = Vec::with_capacity(n);
        let mut allowed = ElementSet::EMPTY;
        for (i, table) in tables.iter().enumerate() {
            let phi = table.ironed[p.types[i]].clone();
            if T::zero().le_tol(&phi) {
                allowed = allowed.with(i);
            }
            weights.push(phi.max_of(T::zero()));
        }
        let set = fs.max_weight_feasible_in(&weights, allowed, SizePreference::Largest)?;
        let surplus = sum(set.iter().map(|e| weights[e].clone()));
        virtual_surplus = virtual_surplus + p.prob.clone() * surplus;
        winners.push(set);
    }

    let mut alloc = Vec::with_capacity(count);
    let mut pay = Vec::with_capacity(count);
    let mut threshold_revenue = T::zero();
    for p in ts.profiles() {
        let set = winners[p.index];
        let mut a = vec![vec![T::zero()]; n];
        let mut row = vec![T::zero(); n];
        for i in set.iter() {
            a[i][0] = T::one();
            let lowest = (0..=p.types[i])
                .find(|&t| winners[ts.with_agent_type(p.index, i, t)].contains(i))
                .expect("the actual report wins");
            row[i] = tables[i].support[lowest].clone();
        }
        threshold_revenue = threshold_revenue + p.prob.clone() * sum(row.iter().cloned());
        alloc.push(a);
        pay.push(row);
    }
    if !threshold_revenue.near(&virtual_surplus) {
        return Err(Error::Invariant(format!(
            "threshold revenue {threshold_revenue} differs from virtual surplus {virtual_surplus}"
        )));
    }
    Ok(MyersonOutcome {
        table: MechanismTable::new(ts, alloc, pay)?,
        virtual_surplus,
        threshold_revenue,
        virtual_values: tables,
    })
}
