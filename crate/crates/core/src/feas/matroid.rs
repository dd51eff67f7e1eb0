use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::set::ElementSet;
use crate::error::{Error, Result};

/// Largest ground set on which explicit matroids are accepted and on which
/// the axioms are verified exhaustively.
pub const EXPLICIT_GROUND_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum MatroidOracle {
    Uniform {
        ground: usize,
        rank: usize,
    },
    Partition {
        ground: usize,
        block_of: Vec<usize>,
        capacities: Vec<usize>,
    },
    Explicit {
        ground: usize,
        independent: HashSet<u64>,
    },
}

impl MatroidOracle {
    pub fn uniform(ground: usize, rank: usize) -> Result<Self> {
        check_ground(ground)?;
        Ok(MatroidOracle::Uniform { ground, rank })
    }

    /// `blocks` must partition `0..ground`.
    pub fn partition(ground: usize, blocks: &[Vec<usize>], capacities: Vec<usize>) -> Result<Self> {
        check_ground(ground)?;
        if blocks.len() != capacities.len() {
            return Err(Error::Validation(format!(
                "{} blocks but {} capacities",
                blocks.len(),
                capacities.len()
            )));
        }
        let mut block_of = vec![usize::MAX; ground];
        for (b, block) in blocks.iter().enumerate() {
            for &e in block {
                if e >= ground {
                    return Err(Error::Validation(format!(
                        "element {e} outside ground {ground}"
                    )));
                }
                if block_of[e] != usize::MAX {
                    return Err(Error::Validation(format!("element {e} in two blocks")));
                }
                block_of[e] = b;
            }
        }
        if let Some(e) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::Validation(format!("element {e} is in no block")));
        }
        Ok(MatroidOracle::Partition {
            ground,
            block_of,
            capacities,
        })
    }

    /// Matroid given by a family of independent sets. The family is closed
    /// downward first (so listing the bases is enough) and then checked
    /// against the augmentation axiom.
    pub fn explicit(ground: usize, sets: &[Vec<usize>]) -> Result<Self> {
        check_ground(ground)?;
        if ground > EXPLICIT_GROUND_CAP {
            return Err(Error::Capacity {
                what: "explicit matroid ground set",
                count: ground as u128,
                cap: EXPLICIT_GROUND_CAP as u128,
            });
        }
        let mut independent = HashSet::new();
        independent.insert(0u64);
        for set in sets {
            if let Some(&e) = set.iter().find(|&&e| e >= ground) {
                return Err(Error::Validation(format!(
                    "element {e} outside ground {ground}"
                )));
            }
            let s: ElementSet = set.iter().copied().collect();
            for sub in s.subsets() {
                independent.insert(sub.0);
            }
        }
        let m = MatroidOracle::Explicit {
            ground,
            independent,
        };
        m.validate_axioms()?;
        Ok(m)
    }

    pub fn ground_size(&self) -> usize {
        match self {
            MatroidOracle::Uniform { ground, .. }
            | MatroidOracle::Partition { ground, .. }
            | MatroidOracle::Explicit { ground, .. } => *ground,
        }
    }

    pub fn is_independent(&self, s: ElementSet) -> bool {
        if !s.is_subset(ElementSet::full(self.ground_size())) {
            return false;
        }
        match self {
            MatroidOracle::Uniform { rank, .. } => s.len() <= *rank,
            MatroidOracle::Partition {
                block_of,
                capacities,
                ..
            } => {
                let mut used = vec![0usize; capacities.len()];
                s.iter().all(|e| {
                    used[block_of[e]] += 1;
                    used[block_of[e]] <= capacities[block_of[e]]
                })
            }
            MatroidOracle::Explicit { independent, .. } => independent.contains(&s.0),
        }
    }

    pub fn rank(&self, s: ElementSet) -> usize {
        match self {
            MatroidOracle::Uniform { rank, .. } => s.len().min(*rank),
            MatroidOracle::Partition {
                block_of,
                capacities,
                ..
            } => {
                let mut used = vec![0usize; capacities.len()];
                for e in s.iter() {
                    used[block_of[e]] += 1;
                }
                used.iter().zip(capacities).map(|(u, c)| (*u).min(*c)).sum()
            }
            MatroidOracle::Explicit { independent, .. } => independent
                .iter()
                .filter(|&&i| ElementSet(i).is_subset(s))
                .map(|&i| ElementSet(i).len())
                .max()
                .unwrap_or(0),
        }
    }

    /// Rank inequalities `x(S) <= r(S)` that, together with `0 <= x <= 1`,
    /// describe the independence polytope.
    pub fn polytope_rows(&self) -> Vec<(ElementSet, usize)> {
        match self {
            MatroidOracle::Uniform { ground, rank } => {
                if rank < ground {
                    vec![(ElementSet::full(*ground), *rank)]
                } else {
                    Vec::new()
                }
            }
            MatroidOracle::Partition {
                block_of,
                capacities,
                ..
            } => capacities
                .iter()
                .enumerate()
                .filter_map(|(b, &cap)| {
                    let block: ElementSet = block_of
                        .iter()
                        .enumerate()
                        .filter(|(_, &bb)| bb == b)
                        .map(|(e, _)| e)
                        .collect();
                    (cap < block.len()).then_some((block, cap))
                })
                .collect(),
            MatroidOracle::Explicit { ground, .. } => {
                // closed sets (flats) with rank below their size
                let full = ElementSet::full(*ground);
                full.subsets()
                    .filter(|s| !s.is_empty())
                    .filter_map(|s| {
                        let r = self.rank(s);
                        if r >= s.len() {
                            return None;
                        }
                        let closed = full.minus(s).iter().all(|e| self.rank(s.with(e)) > r);
                        closed.then_some((s, r))
                    })
                    .collect()
            }
        }
    }

    /// Exhaustive check of heredity and augmentation.
    pub fn validate_axioms(&self) -> Result<()> {
        let ground = self.ground_size();
        if ground > EXPLICIT_GROUND_CAP {
            return Err(Error::Capacity {
                what: "exhaustive matroid axiom check",
                count: ground as u128,
                cap: EXPLICIT_GROUND_CAP as u128,
            });
        }
        let indep: Vec<ElementSet> = ElementSet::full(ground)
            .subsets()
            .filter(|&s| self.is_independent(s))
            .collect();
        if !indep.contains(&ElementSet::EMPTY) {
            return Err(Error::Validation("empty set must be independent".into()));
        }
        for &a in &indep {
            if let Some(e) = a.iter().find(|&e| !self.is_independent(a.without(e))) {
                return Err(Error::Validation(format!(
                    "heredity fails: {a:?} independent but not {:?}",
                    a.without(e)
                )));
            }
        }
        for &a in &indep {
            for &b in &indep {
                if a.len() > b.len() && !a.minus(b).iter().any(|e| self.is_independent(b.with(e))) {
                    return Err(Error::Validation(format!(
                        "augmentation fails for A = {a:?}, B = {b:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn as_partition(&self) -> Option<(&[usize], &[usize])> {
        match self {
            MatroidOracle::Partition {
                block_of,
                capacities,
                ..
            } => Some((block_of, capacities)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> MatroidJson {
        match self {
            MatroidOracle::Uniform { rank, .. } => MatroidJson::Uniform { rank: *rank },
            MatroidOracle::Partition {
                block_of,
                capacities,
                ..
            } => MatroidJson::Partition {
                blocks: (0..capacities.len())
                    .map(|b| {
                        block_of
                            .iter()
                            .enumerate()
                            .filter(|(_, &bb)| bb == b)
                            .map(|(e, _)| e)
                            .collect()
                    })
                    .collect(),
                capacities: capacities.clone(),
            },
            MatroidOracle::Explicit { independent, .. } => {
                let mut sets: Vec<Vec<usize>> = independent
                    .iter()
                    .map(|&s| ElementSet(s).to_vec())
                    .collect();
                sets.sort();
                MatroidJson::Explicit { independent: sets }
            }
        }
    }
}

fn check_ground(ground: usize) -> Result<()> {
    if ground == 0 || ground > 63 {
        return Err(Error::Validation(format!(
            "ground set size {ground} must be between 1 and 63"
        )));
    }
    Ok(())
}

/// `{"kind":"uniform","rank":r}`, `{"kind":"partition","blocks":[[..]],"capacities":[..]}`
/// or `{"kind":"explicit","independent":[[..]]}`; elements are `agent * items + item`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatroidJson {
    Uniform {
        rank: usize,
    },
    Partition {
        blocks: Vec<Vec<usize>>,
        capacities: Vec<usize>,
    },
    Explicit {
        independent: Vec<Vec<usize>>,
    },
}

impl MatroidJson {
    pub fn build(&self, ground: usize) -> Result<MatroidOracle> {
        match self {
            MatroidJson::Uniform { rank } => MatroidOracle::uniform(ground, *rank),
            MatroidJson::Partition { blocks, capacities } => {
                MatroidOracle::partition(ground, blocks, capacities.clone())
            }
            MatroidJson::Explicit { independent } => MatroidOracle::explicit(ground, independent),
        }
    }
}
