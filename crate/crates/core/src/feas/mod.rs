//! Feasibility constraints: intersections of two matroids over the
//! agent-item pairs, with the exchange maps used by the three-mechanism
//! argument.

mod exchange;
mod flow;
mod matroid;
mod set;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use exchange::{
    exchange_bijection, partial_exchange_maps, verify_partial_exchange, PartialExchange,
};
pub use matroid::{MatroidJson, MatroidOracle, EXPLICIT_GROUND_CAP};
pub use set::ElementSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest candidate set searched exhaustively by `max_weight_feasible`
/// when the system is not an intersection of two partition matroids.
pub const BRUTE_FORCE_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundElement {
    pub agent: usize,
    pub item: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SystemKind {
    /// Item `j` may go to at most `capacities[j]` agents.
    Matching {
        capacities: Vec<usize>,
    },
    General,
}

/// Which optimal set to return when several have the same weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizePreference {
    Fewest,
    Largest,
}

/// Feasible sets are the common independent sets of `j1` and `j2`. Element
/// `(i, j)` has index `i * items + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilitySystem {
    agents: usize,
    items: usize,
    j1: MatroidOracle,
    j2: MatroidOracle,
    kind: SystemKind,
}

impl FeasibilitySystem {
    pub fn matching(agents: usize, capacities: Vec<usize>) -> Result<Self> {
        let items = capacities.len();
        check_shape(agents, items)?;
        let by_item: Vec<Vec<usize>> = (0..items)
            .map(|j| (0..agents).map(|i| i * items + j).collect())
            .collect();
        let j1 = MatroidOracle::partition(agents * items, &by_item, capacities.clone())?;
        Ok(FeasibilitySystem {
            agents,
            items,
            j1,
            j2: unit_demand(agents, items)?,
            kind: SystemKind::Matching { capacities },
        })
    }

    /// `j1` intersected with the unit-demand constraint.
    pub fn general(agents: usize, items: usize, j1: MatroidOracle) -> Result<Self> {
        check_shape(agents, items)?;
        Self::from_matroids(agents, items, j1, unit_demand(agents, items)?)
    }

    /// A single agent who may buy at most one item.
    pub fn single_agent(items: usize) -> Result<Self> {
        Self::matching(1, vec![1; items])
    }

    pub fn from_matroids(
        agents: usize,
        items: usize,
        j1: MatroidOracle,
        j2: MatroidOracle,
    ) -> Result<Self> {
        check_shape(agents, items)?;
        for m in [&j1, &j2] {
            if m.ground_size() != agents * items {
                return Err(Error::Validation(format!(
                    "matroid ground size {} does not match {agents} x {items}",
                    m.ground_size()
                )));
            }
        }
        Ok(FeasibilitySystem {
            agents,
            items,
            j1,
            j2,
            kind: SystemKind::General,
        })
    }

    /// The same constraint seen as one pseudo-agent per agent-item pair,
    /// each interested in a single service. Element indices are unchanged.
    pub fn copies(&self) -> FeasibilitySystem {
        FeasibilitySystem {
            agents: self.agents * self.items,
            items: 1,
            j1: self.j1.clone(),
            j2: self.j2.clone(),
            kind: self.kind.clone(),
        }
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn ground_size(&self) -> usize {
        self.agents * self.items
    }

    pub fn j1(&self) -> &MatroidOracle {
        &self.j1
    }

    pub fn j2(&self) -> &MatroidOracle {
        &self.j2
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn index(&self, e: GroundElement) -> Result<usize> {
        if e.agent >= self.agents || e.item >= self.items {
            return Err(Error::OutOfRange {
                agent: e.agent,
                item: e.item,
                agents: self.agents,
                items: self.items,
            });
        }
        Ok(e.agent * self.items + e.item)
    }

    pub fn element(&self, index: usize) -> GroundElement {
        GroundElement {
            agent: index / self.items,
            item: index % self.items,
        }
    }

    pub fn set_of(&self, elements: &[GroundElement]) -> Result<ElementSet> {
        elements.iter().map(|&e| self.index(e)).collect()
    }

    pub fn elements_of(&self, s: ElementSet) -> Vec<GroundElement> {
        s.iter().map(|e| self.element(e)).collect()
    }

    /// Independence in both matroids; `s` must lie inside the ground set.
    pub fn is_feasible(&self, s: ElementSet) -> bool {
        self.j1.is_independent(s) && self.j2.is_independent(s)
    }

    pub fn is_feasible_elements(&self, elements: &[GroundElement]) -> Result<bool> {
        Ok(self.is_feasible(self.set_of(elements)?))
    }

    pub fn rank(&self, s: ElementSet) -> Result<usize> {
        let ones = vec![1.0f64; self.ground_size()];
        let best = self.max_weight_feasible_in(&ones, s, SizePreference::Largest)?;
        Ok(best.len())
    }

    /// A maximum-weight feasible set; among maximizers the fewest elements,
    /// then the lexicographically smallest sorted element list.
    pub fn max_weight_feasible<T: Scalar>(&self, weights: &[T]) -> Result<ElementSet> {
        self.max_weight_feasible_in(
            weights,
            ElementSet::full(self.ground_size()),
            SizePreference::Fewest,
        )
    }

    /// Maximum-weight feasible subset of `allowed`.
    pub fn max_weight_feasible_in<T: Scalar>(
        &self,
        weights: &[T],
        allowed: ElementSet,
        pref: SizePreference,
    ) -> Result<ElementSet> {
        let ground = self.ground_size();
        if weights.len() != ground {
            return Err(Error::Validation(format!(
                "{} weights for a ground set of {ground}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| **w < T::zero()) {
            return Err(Error::Validation(format!("negative weight {w}")));
        }
        if !allowed.is_subset(ElementSet::full(ground)) {
            return Err(Error::Validation(
                "allowed set exceeds the ground set".into(),
            ));
        }
        match (self.j1.as_partition(), self.j2.as_partition()) {
            (Some((l_of, l_caps)), Some((r_of, r_caps))) => {
                let parts = flow::TwoPartitions {
                    left_of: l_of,
                    left_caps: l_caps,
                    right_of: r_of,
                    right_caps: r_caps,
                };
                Ok(lex_optimal_two_partitions(&parts, weights, allowed, pref))
            }
            _ => self.max_weight_brute_force(weights, allowed, pref),
        }
    }

    /// Exhaustive search over all feasible subsets of `allowed`.
    pub fn max_weight_brute_force<T: Scalar>(
        &self,
        weights: &[T],
        allowed: ElementSet,
        pref: SizePreference,
    ) -> Result<ElementSet> {
        if allowed.len() > BRUTE_FORCE_CAP {
            return Err(Error::Capacity {
                what: "exhaustive feasible-set search",
                count: allowed.len() as u128,
                cap: BRUTE_FORCE_CAP as u128,
            });
        }
        let elems = allowed.to_vec();
        let mut best = (ElementSet::EMPTY, T::zero());
        let mut stack = vec![(ElementSet::EMPTY, T::zero(), 0usize)];
        while let Some((set, weight, next)) = stack.pop() {
            if better(&weight, set, &best.1, best.0, pref) {
                best = (set, weight.clone());
            }
            for (k, &e) in elems.iter().enumerate().skip(next) {
                let grown = set.with(e);
                if self.is_feasible(grown) {
                    stack.push((grown, weight.clone() + weights[e].clone(), k + 1));
                }
            }
        }
        Ok(best.0)
    }

    /// Rank inequalities of both matroids, without duplicates.
    pub fn polytope_rows(&self) -> Vec<(ElementSet, usize)> {
        let mut rows = self.j1.polytope_rows();
        for row in self.j2.polytope_rows() {
            if !rows.contains(&row) {
                rows.push(row);
            }
        }
        rows
    }

    /// Every subset `S` with `sum_{e in S} x_e > r(S)`, checked exhaustively.
    pub fn rank_violations<T: Scalar>(&self, x: &[T], limit: usize) -> Result<Vec<ElementSet>> {
        let ground = self.ground_size();
        if ground > BRUTE_FORCE_CAP {
            return Err(Error::Capacity {
                what: "exhaustive rank-constraint check",
                count: ground as u128,
                cap: BRUTE_FORCE_CAP as u128,
            });
        }
        let mut out = Vec::new();
        for s in ElementSet::full(ground).subsets() {
            let total = crate::scalar::sum(s.iter().map(|e| x[e].clone()));
            if total.definitely_gt(&T::from_i64(self.rank(s)? as i64)) {
                out.push(s);
                if out.len() >= limit {
                    break;
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> FeasJson {
        match &self.kind {
            SystemKind::Matching { capacities } => FeasJson::Matching {
                capacities: capacities.clone(),
            },
            SystemKind::General => FeasJson::General {
                matroid: self.j1.to_json(),
            },
        }
    }
}

fn check_shape(agents: usize, items: usize) -> Result<()> {
    if agents == 0 || items == 0 {
        return Err(Error::Validation(
            "need at least one agent and one item".into(),
        ));
    }
    if agents * items > 63 {
        return Err(Error::Capacity {
            what: "agent-item pairs",
            count: (agents * items) as u128,
            cap: 63,
        });
    }
    Ok(())
}

fn unit_demand(agents: usize, items: usize) -> Result<MatroidOracle> {
    let by_agent: Vec<Vec<usize>> = (0..agents)
        .map(|i| (0..items).map(|j| i * items + j).collect())
        .collect();
    MatroidOracle::partition(agents * items, &by_agent, vec![1; agents])
}

fn better<T: Scalar>(
    w: &T,
    s: ElementSet,
    best_w: &T,
    best: ElementSet,
    pref: SizePreference,
) -> bool {
    if !w.near(best_w) {
        return w > best_w;
    }
    match (s.len().cmp(&best.len()), pref) {
        (Ordering::Less, SizePreference::Fewest) | (Ordering::Greater, SizePreference::Largest) => {
            true
        }
        (Ordering::Equal, _) => s.lex_cmp(best) == Ordering::Less,
        _ => false,
    }
}

fn lex_optimal_two_partitions<T: Scalar>(
    parts: &flow::TwoPartitions<'_>,
    weights: &[T],
    allowed: ElementSet,
    pref: SizePreference,
) -> ElementSet {
    let best = flow::best_by_cardinality(parts, weights, allowed);
    let top = best
        .iter()
        .cloned()
        .reduce(|a, b| a.max_of(b))
        .unwrap_or_else(T::zero);
    let mut sizes = (0..best.len()).filter(|&k| best[k].near(&top));
    let target = match pref {
        SizePreference::Fewest => sizes.next(),
        SizePreference::Largest => sizes.last(),
    }
    .unwrap_or(0);

    // Fix elements in ascending order whenever an optimal completion exists.
    let mut left_caps = parts.left_caps.to_vec();
    let mut right_caps = parts.right_caps.to_vec();
    let mut chosen = ElementSet::EMPTY;
    let mut chosen_weight = T::zero();
    let mut remaining = allowed;
    for e in allowed.iter() {
        if chosen.len() == target {
            break;
        }
        remaining = remaining.without(e);
        let (l, r) = (parts.left_of[e], parts.right_of[e]);
        if left_caps[l] == 0 || right_caps[r] == 0 {
            continue;
        }
        left_caps[l] -= 1;
        right_caps[r] -= 1;
        let rest = flow::TwoPartitions {
            left_of: parts.left_of,
            left_caps: &left_caps,
            right_of: parts.right_of,
            right_caps: &right_caps,
        };
        let need = target - chosen.len() - 1;
        let tail = flow::best_by_cardinality(&rest, weights, remaining);
        let with_e = chosen_weight.clone() + weights[e].clone();
        let ok = tail
            .get(need)
            .is_some_and(|t| (with_e.clone() + t.clone()).near(&top));
        if ok {
            chosen = chosen.with(e);
            chosen_weight = with_e;
        } else {
            left_caps[l] += 1;
            right_caps[r] += 1;
        }
    }
    chosen
}

/// `{"kind":"matching","capacities":[..]}` or `{"kind":"general","matroid":{..}}`;
/// the unit-demand constraint is always added.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeasJson {
    Matching { capacities: Vec<usize> },
    General { matroid: MatroidJson },
}

impl FeasJson {
    pub fn build(&self, agents: usize, items: usize) -> Result<FeasibilitySystem> {
        match self {
            FeasJson::Matching { capacities } => {
                if capacities.len() != items {
                    return Err(Error::Validation(format!(
                        "{} capacities for {items} items",
                        capacities.len()
                    )));
                }
                FeasibilitySystem::matching(agents, capacities.clone())
            }
            FeasJson::General { matroid } => {
                check_shape(agents, items)?;
                FeasibilitySystem::general(agents, items, matroid.build(agents * items)?)
            }
        }
    }
}
