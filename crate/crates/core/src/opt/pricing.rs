//! Revenue-optimal item pricings for a single unit-demand buyer.
//!
//! Revenue is piecewise linear in the price vector, with pieces cut out by
//! the hyperplanes `p_j = v_tj`, `p_j = 0` and `p_j - p_k = v_tj - v_tk`.
//! Buyers break ties toward the higher price, which makes revenue upper
//! semicontinuous, so the optimum sits at a vertex of that arrangement. A
//! vertex fixes every offered price by a rooted forest: roots take a value
//! `v_tj` (or 0) and each edge carries an offset `v_tj - v_tk`.

use std::collections::BTreeSet;

use crate::dist::{AgentType, DiscreteDist, TypeSpace};
use crate::error::{Error, Result};
use crate::feas::ElementSet;
use crate::mech::ItemPricing;
use crate::scalar::Scalar;

/// Most candidate price vectors the grid cross-check will evaluate.
pub const GRID_CAP: usize = 50_000;

/// Most type-to-choice maps the assignment oracle will enumerate.
pub const ASSIGNMENT_CAP: u128 = 2_000_000;

#[derive(Clone, Debug)]
pub struct PricingOptimum<T> {
    pub pricing: ItemPricing<T>,
    pub revenue: T,
    pub vertices: usize,
    /// Best revenue over the candidate grid, when the grid was small enough.
    pub grid_revenue: Option<T>,
}

fn buyer<T: Scalar>(ts: &TypeSpace<T>) -> Result<&[AgentType<T>]> {
    if ts.n_agents() != 1 {
        return Err(Error::Validation(format!(
            "item pricing needs a single buyer, got {} agents",
            ts.n_agents()
        )));
    }
    Ok(&ts.agent(0).types)
}

fn revenue_of<T: Scalar>(pricing: &ItemPricing<T>, types: &[AgentType<T>]) -> T {
    types.iter().fold(T::zero(), |acc, t| {
        acc + t.prob.clone() * pricing.payment(&t.values)
    })
}

fn distinct<T: Scalar>(values: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for v in values {
        if !out.iter().any(|x| x.near(&v)) {
            out.push(v);
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Exact optimum by enumerating every vertex of the price arrangement, with
/// the grid search as a cross-check on small instances.
pub fn optimal_pricing_exact<T: Scalar>(ts: &TypeSpace<T>) -> Result<PricingOptimum<T>> {
    let types = buyer(ts)?;
    let m = ts.n_items();
    if m > 6 {
        return Err(Error::Capacity {
            what: "pricing vertex enumeration items",
            count: m as u128,
            cap: 6,
        });
    }
    let roots: Vec<Vec<T>> = (0..m)
        .map(|j| {
            distinct(std::iter::once(T::zero()).chain(types.iter().map(|t| t.values[j].clone())))
        })
        .collect();
    let offsets: Vec<Vec<Vec<T>>> = (0..m)
        .map(|j| {
            (0..m)
                .map(|k| {
                    distinct(
                        types
                            .iter()
                            .map(|t| t.values[j].clone() - t.values[k].clone()),
                    )
                })
                .collect()
        })
        .collect();

    let mut best = (
        ItemPricing {
            prices: vec![None; m],
        },
        T::zero(),
    );
    let mut vertices = 0usize;
    for offered in ElementSet::full(m).subsets().skip(1) {
        let items = offered.to_vec();
        for parents in forests(&items) {
            let order = topological(&items, &parents);
            let mut prices: Vec<Option<T>> = vec![None; m];
            label(
                &order,
                &parents,
                &roots,
                &offsets,
                &mut prices,
                0,
                &mut |prices| {
                    vertices += 1;
                    let pricing = ItemPricing {
                        prices: prices.to_vec(),
                    };
                    let rev = revenue_of(&pricing, types);
                    if rev.definitely_gt(&best.1) {
                        best = (pricing, rev);
                    }
                },
            );
        }
    }

    let grid_revenue = pricing_grid_search(ts)?.map(|(_, r)| r);
    if let Some(g) = &grid_revenue {
        if g.definitely_gt(&best.1) || (m <= 2 && !g.near(&best.1)) {
            return Err(Error::Invariant(format!(
                "grid search found revenue {g} but vertex enumeration found {}",
                best.1
            )));
        }
    }
    Ok(PricingOptimum {
        pricing: best.0,
        revenue: best.1,
        vertices,
        grid_revenue,
    })
}

/// Parent maps over `items` (None = root) that contain no cycle.
fn forests(items: &[usize]) -> Vec<Vec<Option<usize>>> {
    let k = items.len();
    let mut out = Vec::new();
    let mut choice = vec![0usize; k];
    loop {
        let parents: Vec<Option<usize>> = choice
            .iter()
            .enumerate()
            .map(|(a, &c)| {
                if c == 0 {
                    None
                } else {
                    Some(items[(a + c) % k])
                }
            })
            .collect();
        if acyclic(items, &parents) {
            let mut full = vec![None; items.iter().max().map_or(0, |x| x + 1)];
            for (a, &j) in items.iter().enumerate() {
                full[j] = parents[a];
            }
            out.push(full);
        }
        let mut pos = 0;
        loop {
            if pos == k {
                return out;
            }
            choice[pos] += 1;
            if choice[pos] < k {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn acyclic(items: &[usize], parents: &[Option<usize>]) -> bool {
    let slot = |j: usize| items.iter().position(|&x| x == j).unwrap();
    (0..items.len()).all(|start| {
        let mut cur = parents[start];
        for _ in 0..items.len() {
            match cur {
                None => return true,
                Some(j) => cur = parents[slot(j)],
            }
        }
        false
    })
}

/// Items ordered so that parents come before children.
fn topological(items: &[usize], parents: &[Option<usize>]) -> Vec<usize> {
    let mut order: Vec<usize> = Vec::with_capacity(items.len());
    while order.len() < items.len() {
        for &j in items {
            if !order.contains(&j) && parents[j].is_none_or(|p| order.contains(&p)) {
                order.push(j);
            }
        }
    }
    order
}

fn label<T: Scalar>(
    order: &[usize],
    parents: &[Option<usize>],
    roots: &[Vec<T>],
    offsets: &[Vec<Vec<T>>],
    prices: &mut Vec<Option<T>>,
    depth: usize,
    visit: &mut impl FnMut(&[Option<T>]),
) {
    let Some(&j) = order.get(depth) else {
        visit(prices);
        return;
    };
    let options: Vec<T> = match parents[j] {
        None => roots[j].clone(),
        Some(k) => {
            let base = prices[k].clone().expect("parent priced first");
            offsets[j][k]
                .iter()
                .map(|d| base.clone() + d.clone())
                .collect()
        }
    };
    for p in options {
        if p < T::zero() {
            continue;
        }
        prices[j] = Some(p);
        label(order, parents, roots, offsets, prices, depth + 1, visit);
    }
    prices[j] = None;
}

/// Best pricing over per-item candidates `0`, `v_tj`, `v_tj - v_tk` and
/// `v_sk + v_tj - v_tk`
/// (each item may also be withheld). Returns `None` when the grid exceeds
/// [`GRID_CAP`] points.
pub fn pricing_grid_search<T: Scalar>(ts: &TypeSpace<T>) -> Result<Option<(ItemPricing<T>, T)>> {
    let types = buyer(ts)?;
    let m = ts.n_items();
    let candidates: Vec<Vec<Option<T>>> = (0..m)
        .map(|j| {
            let mut c: Vec<T> = vec![T::zero()];
            for t in types {
                c.push(t.values[j].clone());
                for k in (0..m).filter(|&k| k != j) {
                    c.push(t.values[j].clone() - t.values[k].clone());
                    for s in types {
                        c.push(s.values[k].clone() + t.values[j].clone() - t.values[k].clone());
                    }
                }
            }
            let mut c: Vec<Option<T>> = distinct(c)
                .into_iter()
                .filter(|p| T::zero().le_tol(p))
                .map(Some)
                .collect();
            c.push(None);
            c
        })
        .collect();
    let size = candidates
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
        .unwrap_or(usize::MAX);
    if size > GRID_CAP {
        return Ok(None);
    }
    let mut best = (
        ItemPricing {
            prices: vec![None; m],
        },
        T::zero(),
    );
    let mut idx = vec![0usize; m];
    loop {
        let pricing = ItemPricing {
            prices: idx
                .iter()
                .zip(&candidates)
                .map(|(&i, c)| c[i].clone())
                .collect(),
        };
        let rev = revenue_of(&pricing, types);
        if rev.definitely_gt(&best.1) {
            best = (pricing, rev);
        }
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(Some(best));
            }
            idx[pos] += 1;
            if idx[pos] < candidates[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Exactness oracle: for every map from types to a chosen item or no purchase,
/// find the prices that make the map a best response and earn the most. The
/// constraints are all of the form `p_a - p_b <= c` (with an anchor price
/// fixed at 0), so the optimal prices are shortest-path distances from the
/// anchor, and they maximize every price at once.
pub fn optimal_pricing_by_assignment<T: Scalar>(ts: &TypeSpace<T>) -> Result<(ItemPricing<T>, T)> {
    let types = buyer(ts)?;
    let m = ts.n_items();
    let count = (m as u128 + 1)
        .checked_pow(types.len() as u32)
        .unwrap_or(u128::MAX);
    if count > ASSIGNMENT_CAP {
        return Err(Error::Capacity {
            what: "pricing assignments",
            count,
            cap: ASSIGNMENT_CAP,
        });
    }
    let mut best = (
        ItemPricing {
            prices: vec![None; m],
        },
        T::zero(),
    );
    // choice m means no purchase
    let mut assign = vec![0usize; types.len()];
    loop {
        if let Some((prices, value)) = assignment_prices(types, m, &assign) {
            if value.definitely_gt(&best.1) {
                best = (ItemPricing { prices }, value);
            }
        }
        let mut pos = 0;
        loop {
            if pos == assign.len() {
                return Ok(best);
            }
            assign[pos] += 1;
            if assign[pos] <= m {
                break;
            }
            assign[pos] = 0;
            pos += 1;
        }
    }
}

fn assignment_prices<T: Scalar>(
    types: &[AgentType<T>],
    m: usize,
    assign: &[usize],
) -> Option<(Vec<Option<T>>, T)> {
    let offered: BTreeSet<usize> = assign.iter().copied().filter(|&a| a < m).collect();
    // node m is the anchor with price 0; edge (from, to, w) encodes p_to <= p_from + w
    let mut edges: Vec<(usize, usize, T)> = Vec::new();
    for &j in &offered {
        edges.push((j, m, T::zero()));
    }
    for (t, &a) in assign.iter().enumerate() {
        let v = &types[t].values;
        if a < m {
            edges.push((m, a, v[a].clone()));
            for &k in offered.iter().filter(|&&k| k != a) {
                edges.push((k, a, v[a].clone() - v[k].clone()));
            }
        } else {
            for &k in &offered {
                edges.push((k, m, T::zero() - v[k].clone()));
            }
        }
    }
    let mut dist: Vec<Option<T>> = vec![None; m + 1];
    dist[m] = Some(T::zero());
    for round in 0..=m + 1 {
        let mut changed = false;
        for (from, to, w) in &edges {
            let Some(d) = dist[*from].clone() else {
                continue;
            };
            let cand = d + w.clone();
            if dist[*to]
                .as_ref()
                .is_none_or(|cur| cur.definitely_gt(&cand))
            {
                dist[*to] = Some(cand);
                changed = true;
            }
        }
        if !changed {
            break;
        }
        if round == m + 1 {
            return None;
        }
    }
    if dist[m].as_ref().is_some_and(|d| !d.near(&T::zero())) {
        return None;
    }
    let prices: Vec<Option<T>> = (0..m)
        .map(|j| {
            if offered.contains(&j) {
                dist[j].clone()
            } else {
                None
            }
        })
        .collect();
    let value = assign
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (t, &a)| match &prices.get(a) {
            Some(Some(p)) => acc + types[t].prob.clone() * p.clone(),
            _ => acc,
        });
    Some((prices, value))
}

/// Best common price for `items` i.i.d. items: the buyer purchases whenever
/// some value reaches the price, earning `p (1 - Pr[v < p]^items)`. Candidates
/// are the support points; ties go to the lower price.
pub fn optimal_symmetric_price<T: Scalar>(d: &DiscreteDist<T>, items: usize) -> (T, T) {
    let mut below = T::zero();
    let mut best: Option<(T, T)> = None;
    for (v, f) in d.iter() {
        let none = (0..items).fold(T::one(), |acc, _| acc * below.clone());
        let rev = v.clone() * (T::one() - none);
        if best.as_ref().is_none_or(|(_, b)| rev.definitely_gt(b)) {
            best = Some((v.clone(), rev));
        }
        below = below + f.clone();
    }
    best.expect("distributions are nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn two_point() -> DiscreteDist<Rational> {
        DiscreteDist::new(vec![q(1, 1), q(2, 1)], vec![q(1, 2); 2]).unwrap()
    }

    #[test]
    fn single_item_two_point() {
        let ts = TypeSpace::product(vec![vec![two_point()]]).unwrap();
        let opt = optimal_pricing_exact(&ts).unwrap();
        assert_eq!(opt.revenue, q(1, 1));
        assert_eq!(optimal_pricing_by_assignment(&ts).unwrap().1, q(1, 1));
    }

    #[test]
    fn point_mass_two_items() {
        let ts = TypeSpace::single_agent_explicit(vec![(vec![q(5, 1), q(3, 1)], q(1, 1))]).unwrap();
        let opt = optimal_pricing_exact(&ts).unwrap();
        assert_eq!(opt.revenue, q(5, 1));
        assert_eq!(opt.pricing.payment(&[q(5, 1), q(3, 1)]), q(5, 1));
    }

    #[test]
    fn chained_prices_need_an_offset() {
        // Types (4, 1) and (6, 7): the best pricing sells item 1 to the first
        // type at 4 and item 2 to the second at p_1 + (7 - 6) = 5.
        let ts = TypeSpace::single_agent_explicit(vec![
            (vec![q(4, 1), q(1, 1)], q(1, 2)),
            (vec![q(6, 1), q(7, 1)], q(1, 2)),
        ])
        .unwrap();
        let exact = optimal_pricing_exact(&ts).unwrap();
        let oracle = optimal_pricing_by_assignment(&ts).unwrap();
        assert_eq!(exact.revenue, oracle.1);
        assert_eq!(exact.revenue, q(9, 2));
    }

    #[test]
    fn symmetric_price_two_point() {
        // p = 1 earns 1; p = 2 earns 2 * (1 - 1/4) = 3/2.
        assert_eq!(optimal_symmetric_price(&two_point(), 2), (q(2, 1), q(3, 2)));
    }
}
