//! Discrete value distributions and enumerable type spaces.
//!
//! A [`TypeSpace`] is a list of independent agents; each agent has a finite
//! list of types (a value per item and a probability). Within an agent the
//! item values are either independent ([`Structure::Product`]), built from a
//! shared base value plus an item-specific part ([`Structure::Additive`]), or
//! listed explicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{unwrap, wrap, Num};
use crate::scalar::{sum, Scalar};

/// Default bound on the number of enumerated profiles.
pub const DEFAULT_PROFILE_CAP: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDist<T> {
    support: Vec<T>,
    probs: Vec<T>,
}

impl<T: Scalar> DiscreteDist<T> {
    /// Validate, sort, merge duplicate atoms, drop zero-mass atoms and normalize.
    pub fn new(support: Vec<T>, probs: Vec<T>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Validation("empty support".into()));
        }
        if support.len() != probs.len() {
            return Err(Error::Validation(format!(
                "support has {} points but {} probabilities were given",
                support.len(),
                probs.len()
            )));
        }
        if let Some(v) = support.iter().find(|v| **v < T::zero()) {
            return Err(Error::Validation(format!("negative value {v}")));
        }
        if let Some(p) = probs.iter().find(|p| **p < T::zero()) {
            return Err(Error::Validation(format!("negative probability {p}")));
        }
        let total = sum(probs.iter().cloned());
        if total <= T::zero() {
            return Err(Error::Validation("zero total probability mass".into()));
        }

        let mut atoms: Vec<(T, T)> = support.into_iter().zip(probs).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 = last.1.clone() + p,
                _ => merged.push((v, p)),
            }
        }
        merged.retain(|(_, p)| *p > T::zero());

        let (support, probs) = merged
            .into_iter()
            .map(|(v, p)| (v, p / total.clone()))
            .unzip();
        Ok(Self { support, probs })
    }

    pub fn point_mass(value: T) -> Result<Self> {
        Self::new(vec![value], vec![T::one()])
    }

    /// Equally likely atoms.
    pub fn uniform_over(values: Vec<T>) -> Result<Self> {
        let probs = vec![T::one(); values.len()];
        Self::new(values, probs)
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &T)> {
        self.support.iter().zip(&self.probs)
    }

    pub fn mean(&self) -> T {
        sum(self.iter().map(|(v, p)| v.clone() * p.clone()))
    }

    pub fn max_value(&self) -> &T {
        self.support.last().expect("nonempty")
    }

    /// `Pr[X >= x]`.
    pub fn survival(&self, x: &T) -> T {
        sum(self.iter().filter(|(v, _)| *v >= x).map(|(_, p)| p.clone()))
    }

    /// `Pr[X < x]`.
    pub fn cdf_below(&self, x: &T) -> T {
        sum(self.iter().filter(|(v, _)| *v < x).map(|(_, p)| p.clone()))
    }

    /// Tail masses `Pr[X >= support[k]]` for every k.
    pub fn tails(&self) -> Vec<T> {
        let mut tails = vec![T::zero(); self.len()];
        let mut acc = T::zero();
        for k in (0..self.len()).rev() {
            acc = acc + self.probs[k].clone();
            tails[k] = acc.clone();
        }
        tails
    }

    /// Index of the atom equal to `x`, if any.
    pub fn index_of(&self, x: &T) -> Option<usize> {
        self.support.iter().position(|v| v == x)
    }

    pub fn map_values<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Result<DiscreteDist<U>> {
        DiscreteDist::new(
            self.support.iter().map(&f).collect(),
            self.probs.iter().map(crate::scalar::convert).collect(),
        )
    }

    pub fn to_json(&self) -> DistJson<T> {
        DistJson {
            support: wrap(&self.support),
            probs: wrap(&self.probs),
        }
    }
}

/// `{"support":[...],"probs":[...]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DistJson<T> {
    pub support: Vec<Num<T>>,
    pub probs: Vec<Num<T>>,
}

impl<T: Scalar> DistJson<T> {
    pub fn build(self) -> Result<DiscreteDist<T>> {
        DiscreteDist::new(unwrap(self.support), unwrap(self.probs))
    }
}

/// Discretized equal-revenue distribution `F(x) = 1 - 1/x` on `[1, upper)` with
/// an atom of mass `1/upper` at `upper`.
///
/// The grid is geometric, `x_k = upper^(k/cells)`, and each cell's mass
/// `1/x_k - 1/x_{k+1}` sits on its left endpoint, so every grid price earns
/// revenue exactly 1 and the masses telescope to 1.
pub fn equal_revenue_discrete<T: Scalar>(upper: f64, cells: usize) -> Result<DiscreteDist<T>> {
    if !(upper > 1.0) || !upper.is_finite() {
        return Err(Error::Validation(format!(
            "upper bound {upper} must exceed 1"
        )));
    }
    if cells == 0 {
        return Err(Error::Validation("need at least one cell".into()));
    }
    let mut grid: Vec<T> = (0..cells)
        .map(|k| {
            if k == 0 {
                T::one()
            } else {
                T::from_f64(upper.powf(k as f64 / cells as f64))
            }
        })
        .collect();
    grid.push(T::from_f64(upper));
    for w in grid.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Validation(format!(
                "grid with {cells} cells is too fine to separate {} and {}",
                w[0], w[1]
            )));
        }
    }
    let mut probs = Vec::with_capacity(grid.len());
    for k in 0..cells {
        probs.push(T::one() / grid[k].clone() - T::one() / grid[k + 1].clone());
    }
    probs.push(T::one() / grid[cells].clone());
    Ok(DiscreteDist {
        support: grid,
        probs,
    })
}

/// Equally weighted atoms at the midpoints of the cells of `[lo, hi]` of width `step`.
pub fn uniform_grid<T: Scalar>(lo: T, hi: T, step: T) -> Result<DiscreteDist<T>> {
    if lo >= hi || step <= T::zero() {
        return Err(Error::Validation(format!(
            "need lo < hi and step > 0, got [{lo}, {hi}] step {step}"
        )));
    }
    let ratio = (hi.clone() - lo.clone()) / step.clone();
    let cells = ratio.to_f64().round();
    if cells < 1.0 || !ratio.near(&T::from_f64(cells)) {
        return Err(Error::Validation(format!(
            "step {step} does not divide [{lo}, {hi}]"
        )));
    }
    let cells = cells as i64;
    let half = T::from_ratio(1, 2);
    let support = (0..cells)
        .map(|k| lo.clone() + (T::from_i64(k) + half.clone()) * step.clone())
        .collect();
    let probs = vec![T::one() / T::from_i64(cells); cells as usize];
    Ok(DiscreteDist { support, probs })
}

/// How an agent's item values relate to each other.
#[derive(Clone, Debug, PartialEq)]
pub enum Structure<T> {
    /// Independent values per item.
    Product(Vec<DiscreteDist<T>>),
    /// `v_j = t_0 + t_j` with independent components `t_0..t_m`.
    Additive(Vec<DiscreteDist<T>>),
    Explicit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentType<T> {
    pub values: Vec<T>,
    pub prob: T,
    /// Base components `(t_0, ..., t_m)` for additive agents.
    pub base: Option<Vec<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentTypes<T> {
    pub items: usize,
    pub types: Vec<AgentType<T>>,
    pub structure: Structure<T>,
}

impl<T: Scalar> AgentTypes<T> {
    pub fn product(dists: Vec<DiscreteDist<T>>, cap: usize) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::Validation("an agent needs at least one item".into()));
        }
        let types = enumerate_product(&dists, cap)?
            .into_iter()
            .map(|(values, prob)| AgentType {
                values,
                prob,
                base: None,
            })
            .collect();
        Ok(Self {
            items: dists.len(),
            types,
            structure: Structure::Product(dists),
        })
    }

    pub fn additive(components: Vec<DiscreteDist<T>>, cap: usize) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::Validation(
                "additive agents need a base component and at least one item".into(),
            ));
        }
        let types = enumerate_product(&components, cap)?
            .into_iter()
            .map(|(t, prob)| AgentType {
                values: t[1..].iter().map(|tj| t[0].clone() + tj.clone()).collect(),
                prob,
                base: Some(t),
            })
            .collect();
        Ok(Self {
            items: components.len() - 1,
            types,
            structure: Structure::Additive(components),
        })
    }

    pub fn explicit(types: Vec<(Vec<T>, T)>) -> Result<Self> {
        let items = types.first().map(|t| t.0.len()).unwrap_or(0);
        if items == 0 {
            return Err(Error::Validation("explicit type list is empty".into()));
        }
        if types.iter().any(|(v, _)| v.len() != items) {
            return Err(Error::Validation("types have different item counts".into()));
        }
        if types
            .iter()
            .any(|(v, p)| *p < T::zero() || v.iter().any(|x| *x < T::zero()))
        {
            return Err(Error::Validation("negative value or probability".into()));
        }
        let total = sum(types.iter().map(|t| t.1.clone()));
        if total <= T::zero() {
            return Err(Error::Validation("zero total probability mass".into()));
        }
        let types = types
            .into_iter()
            .filter(|(_, p)| *p > T::zero())
            .map(|(values, p)| AgentType {
                values,
                prob: p / total.clone(),
                base: None,
            })
            .collect();
        Ok(Self {
            items,
            types,
            structure: Structure::Explicit,
        })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Marginal distribution of the value for `item`.
    pub fn marginal(&self, item: usize) -> DiscreteDist<T> {
        match &self.structure {
            Structure::Product(d) => d[item].clone(),
            _ => DiscreteDist::new(
                self.types.iter().map(|t| t.values[item].clone()).collect(),
                self.types.iter().map(|t| t.prob.clone()).collect(),
            )
            .expect("types already validated"),
        }
    }
}

fn enumerate_product<T: Scalar>(dists: &[DiscreteDist<T>], cap: usize) -> Result<Vec<(Vec<T>, T)>> {
    let count = dists
        .iter()
        .try_fold(1u128, |acc, d| acc.checked_mul(d.len() as u128))
        .unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::Capacity {
            what: "type enumeration",
            count,
            cap: cap as u128,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; dists.len()];
    loop {
        let values = idx
            .iter()
            .zip(dists)
            .map(|(&k, d)| d.support[k].clone())
            .collect();
        let prob = idx
            .iter()
            .zip(dists)
            .fold(T::one(), |acc, (&k, d)| acc * d.probs[k].clone());
        out.push((values, prob));
        // last coordinate varies fastest
        let mut pos = dists.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < dists[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// One joint valuation profile: a type index per agent.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile<T> {
    pub index: usize,
    pub types: Vec<usize>,
    pub prob: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeSpace<T> {
    agents: Vec<AgentTypes<T>>,
    items: usize,
    strides: Vec<usize>,
    profile_count: usize,
}

impl<T: Scalar> TypeSpace<T> {
    pub fn from_agents(agents: Vec<AgentTypes<T>>, cap: usize) -> Result<Self> {
        let items = agents.first().map(|a| a.items).unwrap_or(0);
        if agents.is_empty() || items == 0 {
            return Err(Error::Validation(
                "need at least one agent and one item".into(),
            ));
        }
        if agents.iter().any(|a| a.items != items) {
            return Err(Error::Validation(
                "agents disagree on the number of items".into(),
            ));
        }
        let count = agents
            .iter()
            .try_fold(1u128, |acc, a| acc.checked_mul(a.len() as u128))
            .unwrap_or(u128::MAX);
        if count > cap as u128 {
            return Err(Error::Capacity {
                what: "profile enumeration",
                count,
                cap: cap as u128,
            });
        }
        let mut strides = vec![1usize; agents.len()];
        for i in (0..agents.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * agents[i + 1].len();
        }
        Ok(Self {
            agents,
            items,
            strides,
            profile_count: count as usize,
        })
    }

    /// Independent values for every (agent, item) pair; `dists[i][j]` is `F_ij`.
    pub fn product(dists: Vec<Vec<DiscreteDist<T>>>) -> Result<Self> {
        Self::product_with_cap(dists, DEFAULT_PROFILE_CAP)
    }

    pub fn product_with_cap(dists: Vec<Vec<DiscreteDist<T>>>, cap: usize) -> Result<Self> {
        let agents = dists
            .into_iter()
            .map(|row| AgentTypes::product(row, cap))
            .collect::<Result<Vec<_>>>()?;
        Self::from_agents(agents, cap)
    }

    /// Single agent whose value for item `j` is `t_0 + t_j`.
    pub fn additive(components: Vec<DiscreteDist<T>>) -> Result<Self> {
        Self::from_agents(
            vec![AgentTypes::additive(components, DEFAULT_PROFILE_CAP)?],
            DEFAULT_PROFILE_CAP,
        )
    }

    pub fn single_agent_explicit(types: Vec<(Vec<T>, T)>) -> Result<Self> {
        Self::from_agents(vec![AgentTypes::explicit(types)?], DEFAULT_PROFILE_CAP)
    }

    pub fn agents(&self) -> &[AgentTypes<T>] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &AgentTypes<T> {
        &self.agents[i]
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_items(&self) -> usize {
        self.items
    }

    pub fn profile_count(&self) -> usize {
        self.profile_count
    }

    pub fn is_additive(&self) -> bool {
        self.agents
            .iter()
            .all(|a| matches!(a.structure, Structure::Additive(_)))
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.agents)
            .map(|(s, a)| (index / s) % a.len())
            .collect()
    }

    pub fn encode(&self, types: &[usize]) -> usize {
        types.iter().zip(&self.strides).map(|(t, s)| t * s).sum()
    }

    /// Profile index with agent `agent`'s type replaced by `t`.
    pub fn with_agent_type(&self, index: usize, agent: usize, t: usize) -> usize {
        let current = (index / self.strides[agent]) % self.agents[agent].len();
        index - current * self.strides[agent] + t * self.strides[agent]
    }

    /// Index of the opponents' profile `v_{-i}` in a mixed radix without agent `agent`.
    pub fn opponents_index(&self, index: usize, agent: usize) -> usize {
        let types = self.decode(index);
        let mut out = 0;
        for (i, t) in types.iter().enumerate() {
            if i != agent {
                out = out * self.agents[i].len() + t;
            }
        }
        out
    }

    pub fn opponents_count(&self, agent: usize) -> usize {
        self.profile_count / self.agents[agent].len()
    }

    pub fn profile(&self, index: usize) -> Profile<T> {
        let types = self.decode(index);
        let prob = types
            .iter()
            .zip(&self.agents)
            .fold(T::one(), |acc, (&t, a)| acc * a.types[t].prob.clone());
        Profile { index, types, prob }
    }

    pub fn profiles(&self) -> impl Iterator<Item = Profile<T>> + '_ {
        (0..self.profile_count).map(move |k| self.profile(k))
    }

    /// Value vector of agent `i` under `profile`.
    pub fn values<'a>(&'a self, profile: &Profile<T>, i: usize) -> &'a [T] {
        &self.agents[i].types[profile.types[i]].values
    }

    /// Full `n x m` valuation matrix of a profile.
    pub fn matrix(&self, profile: &Profile<T>) -> Vec<Vec<T>> {
        (0..self.n_agents())
            .map(|i| self.values(profile, i).to_vec())
            .collect()
    }

    /// Per-item marginal `F_ij`.
    pub fn marginal(&self, agent: usize, item: usize) -> DiscreteDist<T> {
        self.agents[agent].marginal(item)
    }

    pub fn total_probability(&self) -> T {
        sum(self.profiles().map(|p| p.prob))
    }

    pub fn to_json(&self) -> TypeSpaceJson<T> {
        if let [agent] = self.agents.as_slice() {
            match &agent.structure {
                Structure::Additive(c) => {
                    return TypeSpaceJson::Additive {
                        components: c.iter().map(DiscreteDist::to_json).collect(),
                    }
                }
                Structure::Explicit => {
                    return TypeSpaceJson::Explicit {
                        types: agent
                            .types
                            .iter()
                            .map(|t| ExplicitTypeJson {
                                values: wrap(&t.values),
                                prob: Num(t.prob.clone()),
                            })
                            .collect(),
                    }
                }
                Structure::Product(_) => {}
            }
        }
        TypeSpaceJson::Product {
            agents: self
                .agents
                .iter()
                .map(|a| (0..self.items).map(|j| a.marginal(j).to_json()).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ExplicitTypeJson<T> {
    pub values: Vec<Num<T>>,
    pub prob: Num<T>,
}

/// `{"kind":"product","agents":[[dist,...],...]}`, `{"kind":"additive","components":[...]}`
/// or `{"kind":"explicit","types":[{"values":[...],"prob":...}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", bound = "T: Scalar")]
pub enum TypeSpaceJson<T> {
    Product { agents: Vec<Vec<DistJson<T>>> },
    Additive { components: Vec<DistJson<T>> },
    Explicit { types: Vec<ExplicitTypeJson<T>> },
}

impl<T: Scalar> TypeSpaceJson<T> {
    pub fn build(self) -> Result<TypeSpace<T>> {
        match self {
            TypeSpaceJson::Product { agents } => TypeSpace::product(
                agents
                    .into_iter()
                    .map(|row| row.into_iter().map(DistJson::build).collect())
                    .collect::<Result<_>>()?,
            ),
            TypeSpaceJson::Additive { components } => TypeSpace::additive(
                components
                    .into_iter()
                    .map(DistJson::build)
                    .collect::<Result<_>>()?,
            ),
            TypeSpaceJson::Explicit { types } => TypeSpace::single_agent_explicit(
                types
                    .into_iter()
                    .map(|t| (unwrap(t.values), t.prob.0))
                    .collect(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type Q = Rational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn half_half() -> DiscreteDist<Q> {
        DiscreteDist::new(vec![q(1, 1), q(2, 1)], vec![q(1, 2), q(1, 2)]).unwrap()
    }

    #[test]
    fn make_discrete_examples() {
        let d = half_half();
        assert_eq!(d.support(), &[q(1, 1), q(2, 1)]);
        assert_eq!(d.probs(), &[q(1, 2), q(1, 2)]);

        let sorted = DiscreteDist::new(vec![q(2, 1), q(1, 1)], vec![q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(sorted, d);

        let merged = DiscreteDist::new(vec![q(1, 1), q(1, 1)], vec![q(3, 10), q(7, 10)]).unwrap();
        assert_eq!(merged.support(), &[q(1, 1)]);
        assert_eq!(merged.probs(), &[q(1, 1)]);
    }

    #[test]
    fn make_discrete_errors() {
        assert!(DiscreteDist::new(vec![q(-1, 1)], vec![q(1, 1)]).is_err());
        assert!(DiscreteDist::new(vec![q(1, 1)], vec![q(-1, 1)]).is_err());
        assert!(DiscreteDist::new(vec![q(1, 1)], vec![q(0, 1)]).is_err());
        assert!(DiscreteDist::<Q>::new(vec![], vec![]).is_err());
        assert!(DiscreteDist::new(vec![q(1, 1)], vec![q(1, 2), q(1, 2)]).is_err());
    }

    #[test]
    fn normalizes_unnormalized_weights() {
        let d = DiscreteDist::new(vec![q(0, 1), q(3, 1)], vec![q(1, 1), q(3, 1)]).unwrap();
        assert_eq!(d.probs(), &[q(1, 4), q(3, 4)]);
    }

    #[test]
    fn product_examples() {
        let ts = TypeSpace::product(vec![vec![half_half(), half_half()]]).unwrap();
        assert_eq!(ts.profile_count(), 4);
        assert!(ts.profiles().all(|p| p.prob == q(1, 4)));

        let single =
            TypeSpace::product(vec![vec![DiscreteDist::point_mass(q(5, 1)).unwrap()]]).unwrap();
        assert_eq!(single.profile_count(), 1);
        assert_eq!(single.total_probability(), q(1, 1));

        let skewed = DiscreteDist::new(vec![q(0, 1), q(3, 1)], vec![q(1, 3), q(2, 3)]).unwrap();
        let ts = TypeSpace::product(vec![
            vec![half_half(), skewed.clone()],
            vec![skewed, half_half()],
        ])
        .unwrap();
        assert_eq!(ts.profile_count(), 16);
        // oracle: sum of products of marginal probabilities over all 2^4 index tuples
        let mut oracle = q(0, 1);
        for mask in 0..16u32 {
            let mut p = q(1, 1);
            for bit in 0..4 {
                let (i, j) = (bit / 2, bit % 2);
                let d = ts.marginal(i, j);
                p = p * d.probs()[((mask >> bit) & 1) as usize].clone();
            }
            oracle = oracle + p;
        }
        assert_eq!(oracle, q(1, 1));
        assert_eq!(ts.total_probability(), q(1, 1));
    }

    #[test]
    fn product_capacity_error_names_count() {
        let d = DiscreteDist::uniform_over((0..10).map(Q::from_i64).collect()).unwrap();
        let err =
            TypeSpace::product_with_cap(vec![vec![d.clone(), d.clone(), d]], 999).unwrap_err();
        assert_eq!(
            err,
            Error::Capacity {
                what: "type enumeration",
                count: 1000,
                cap: 999
            }
        );
    }

    #[test]
    fn additive_examples() {
        let zero = DiscreteDist::point_mass(q(0, 1)).unwrap();
        let ts = TypeSpace::additive(vec![zero.clone(), half_half()]).unwrap();
        assert!(ts.is_additive());
        assert_eq!(ts.marginal(0, 0), half_half());

        let one = DiscreteDist::point_mass(q(1, 1)).unwrap();
        let ts = TypeSpace::additive(vec![one, zero.clone(), zero]).unwrap();
        assert_eq!(ts.profile_count(), 1);
        assert_eq!(ts.agent(0).types[0].values, vec![q(1, 1), q(1, 1)]);
    }

    #[test]
    fn additive_covariance_equals_base_variance() {
        let ts = TypeSpace::additive(vec![half_half(), half_half(), half_half()]).unwrap();
        assert_eq!(ts.profile_count(), 8);
        // enumerate the 8 (t0, t1, t2) tuples directly
        let (mut e1, mut e2, mut e12) = (q(0, 1), q(0, 1), q(0, 1));
        for t0 in 1..=2 {
            for t1 in 1..=2 {
                for t2 in 1..=2 {
                    let v1 = Q::from_i64(t0 + t1);
                    let v2 = Q::from_i64(t0 + t2);
                    e1 = e1 + v1.clone() * q(1, 8);
                    e2 = e2 + v2.clone() * q(1, 8);
                    e12 = e12 + v1 * v2 * q(1, 8);
                }
            }
        }
        let oracle = e12 - e1 * e2;
        assert_eq!(oracle, q(1, 4));

        let (mut f1, mut f2, mut f12) = (q(0, 1), q(0, 1), q(0, 1));
        for p in ts.profiles() {
            let v = ts.values(&p, 0);
            f1 = f1 + v[0].clone() * p.prob.clone();
            f2 = f2 + v[1].clone() * p.prob.clone();
            f12 = f12 + v[0].clone() * v[1].clone() * p.prob.clone();
        }
        assert_eq!(f12 - f1 * f2, q(1, 4));
    }

    #[test]
    fn equal_revenue_examples() {
        let d = equal_revenue_discrete::<Q>(2.0, 1).unwrap();
        assert_eq!(d.support(), &[q(1, 1), q(2, 1)]);
        assert_eq!(d.probs(), &[q(1, 2), q(1, 2)]);

        // hand oracle: F(1)=0, F(2)=1/2, F(4^-)=3/4, atom 1/4 at 4
        let d = equal_revenue_discrete::<Q>(4.0, 2).unwrap();
        assert_eq!(d.support(), &[q(1, 1), q(2, 1), q(4, 1)]);
        assert_eq!(d.probs(), &[q(1, 2), q(1, 4), q(1, 4)]);
    }

    #[test]
    fn equal_revenue_every_price_earns_one() {
        for (n, k) in [(10.0, 7), (100.0, 25), (3.5, 4)] {
            let d = equal_revenue_discrete::<Q>(n, k).unwrap();
            assert_eq!(sum(d.probs().iter().cloned()), q(1, 1));
            for (x, tail) in d.support().iter().zip(d.tails()) {
                assert_eq!(x.clone() * tail, q(1, 1));
            }
        }
        let d = equal_revenue_discrete::<f64>(1e4, 2000).unwrap();
        for (x, tail) in d.support().iter().zip(d.tails()) {
            assert!((x * tail - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_grid_examples() {
        let d = uniform_grid(q(5, 1), q(6, 1), q(1, 2)).unwrap();
        assert_eq!(d.support(), &[q(21, 4), q(23, 4)]);
        assert_eq!(d.probs(), &[q(1, 2), q(1, 2)]);

        let d = uniform_grid(q(0, 1), q(1, 1), q(1, 1)).unwrap();
        assert_eq!(d.support(), &[q(1, 2)]);

        let d = uniform_grid(5.0, 6.0, 0.001).unwrap();
        assert_eq!(d.len(), 1000);
        let mean: f64 = d.iter().map(|(v, p)| v * p).sum();
        assert!((mean - 5.5).abs() < 1e-9);

        assert!(uniform_grid(q(0, 1), q(1, 1), q(3, 10)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let ts = TypeSpace::additive(vec![half_half(), half_half()]).unwrap();
        let text = serde_json::to_string(&ts.to_json()).unwrap();
        assert!(text.contains(r#""kind":"additive""#));
        let back: TypeSpaceJson<Q> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build().unwrap(), ts);
    }

    #[test]
    fn opponent_indexing() {
        let d = DiscreteDist::uniform_over(vec![q(1, 1), q(2, 1), q(3, 1)]).unwrap();
        let ts = TypeSpace::product(vec![vec![d.clone()], vec![d.clone()], vec![d]]).unwrap();
        assert_eq!(ts.profile_count(), 27);
        for k in 0..27 {
            let types = ts.decode(k);
            assert_eq!(ts.encode(&types), k);
            let swapped = ts.with_agent_type(k, 1, 2);
            assert_eq!(ts.decode(swapped), vec![types[0], 2, types[2]]);
            assert_eq!(ts.opponents_index(k, 1), types[0] * 3 + types[2]);
        }
    }
}
