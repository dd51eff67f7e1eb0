use super::matroid::MatroidOracle;
use super::set::ElementSet;
use crate::error::{Error, Result};

/// For equal-size independent `b1`, `b2`: pairs `(e, g(e))` with `g` a
/// bijection from `b1 \ b2` onto `b2 \ b1` such that `b1 - e + g(e)` is
/// independent. The lexicographically smallest such matching is returned.
pub fn exchange_bijection(
    m: &MatroidOracle,
    b1: ElementSet,
    b2: ElementSet,
) -> Result<Vec<(usize, usize)>> {
    if b1.len() != b2.len() {
        return Err(Error::Validation(format!(
            "exchange needs equal sizes, got {} and {}",
            b1.len(),
            b2.len()
        )));
    }
    for s in [b1, b2] {
        if !m.is_independent(s) {
            return Err(Error::Validation(format!("{s:?} is not independent")));
        }
    }
    let left = b1.minus(b2).to_vec();
    let right = b2.minus(b1).to_vec();
    let edges: Vec<Vec<bool>> = left
        .iter()
        .map(|&e| {
            right
                .iter()
                .map(|&f| m.is_independent(b1.without(e).with(f)))
                .collect()
        })
        .collect();

    // Assign left vertices in order, each to the smallest partner that still
    // leaves a perfect matching of the rest.
    let mut fixed: Vec<Option<usize>> = vec![None; left.len()];
    for a in 0..left.len() {
        let choice = (0..right.len()).find(|&b| {
            edges[a][b] && !fixed.iter().any(|&f| f == Some(b)) && {
                fixed[a] = Some(b);
                let ok = has_perfect_matching(&edges, &fixed);
                fixed[a] = None;
                ok
            }
        });
        match choice {
            Some(b) => fixed[a] = Some(b),
            None => {
                return Err(Error::Invariant(format!(
                    "no exchange bijection between {b1:?} and {b2:?}"
                )))
            }
        }
    }
    Ok(left
        .iter()
        .zip(fixed)
        .map(|(&e, b)| (e, right[b.unwrap()]))
        .collect())
}

/// Kuhn's augmenting-path test, respecting already fixed pairs.
fn has_perfect_matching(edges: &[Vec<bool>], fixed: &[Option<usize>]) -> bool {
    let n = edges.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (a, f) in fixed.iter().enumerate() {
        if let Some(b) = f {
            owner[*b] = Some(a);
        }
    }
    fn augment(
        a: usize,
        edges: &[Vec<bool>],
        fixed: &[Option<usize>],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for b in 0..edges.len() {
            if !edges[a][b] || seen[b] {
                continue;
            }
            seen[b] = true;
            match owner[b] {
                None => {
                    owner[b] = Some(a);
                    return true;
                }
                Some(o) => {
                    if fixed[o].is_none() && augment(o, edges, fixed, owner, seen) {
                        owner[b] = Some(a);
                        return true;
                    }
                }
            }
        }
        false
    }
    (0..n).filter(|&a| fixed[a].is_none()).all(|a| {
        let mut seen = vec![false; n];
        augment(a, edges, fixed, &mut owner, &mut seen)
    })
}

/// Result of mapping part of one independent set into another.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialExchange {
    /// Elements of the second set that have an image.
    pub mapped: ElementSet,
    /// Pairs `(e, g(e))` with `e` in `mapped` and `g(e)` in the first set.
    pub pairs: Vec<(usize, usize)>,
}

impl PartialExchange {
    pub fn image(&self, e: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == e).map(|p| p.1)
    }

    pub fn preimage(&self, f: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == f).map(|p| p.0)
    }
}

/// For independent `a1`, `a2`: a subset `B` of `a2` and an injection `g`
/// from `B` into `a1` with `a1 - g(e) + e` independent for `e` in `B`, and
/// `a1 + e` independent for every other `e` in `a2`.
///
/// The smaller set is grown with elements of the larger one (lowest index
/// first) until the sizes agree; the exchange bijection of the grown sets is
/// then restricted to `a2` minus the grown `a1`.
pub fn partial_exchange_maps(
    m: &MatroidOracle,
    a1: ElementSet,
    a2: ElementSet,
) -> Result<PartialExchange> {
    for s in [a1, a2] {
        if !m.is_independent(s) {
            return Err(Error::Validation(format!("{s:?} is not independent")));
        }
    }
    let (mut h1, mut h2) = (a1, a2);
    while h1.len() != h2.len() {
        let (small, large) = if h1.len() < h2.len() {
            (&mut h1, h2)
        } else {
            (&mut h2, h1)
        };
        let e = large
            .minus(*small)
            .iter()
            .find(|&e| m.is_independent(small.with(e)))
            .ok_or_else(|| {
                Error::Invariant(format!("augmentation fails between {a1:?} and {a2:?}"))
            })?;
        *small = small.with(e);
    }
    let h = exchange_bijection(m, h1, h2)?;
    let mapped = a2.minus(h1);
    let pairs = h
        .into_iter()
        .filter(|&(_, f)| mapped.contains(f))
        .map(|(e, f)| (f, e))
        .collect::<Vec<_>>();
    let out = PartialExchange { mapped, pairs };
    verify_partial_exchange(m, a1, a2, &out)?;
    Ok(out)
}

/// Both defining properties of a partial exchange map, checked directly.
pub fn verify_partial_exchange(
    m: &MatroidOracle,
    a1: ElementSet,
    a2: ElementSet,
    x: &PartialExchange,
) -> Result<()> {
    let mut images = ElementSet::EMPTY;
    for e in a2.iter() {
        match x.image(e) {
            Some(g) => {
                if !x.mapped.contains(e) || !a1.contains(g) || images.contains(g) {
                    return Err(Error::Invariant(format!(
                        "map of {e} to {g} is not an injection into {a1:?}"
                    )));
                }
                images = images.with(g);
                if !m.is_independent(a1.without(g).with(e)) {
                    return Err(Error::Invariant(format!(
                        "swapping {g} for {e} breaks independence"
                    )));
                }
            }
            None => {
                if x.mapped.contains(e) || !m.is_independent(a1.with(e)) {
                    return Err(Error::Invariant(format!(
                        "{e} has no image but cannot be added to {a1:?}"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    // a=0, b=1, c=2, d=3
    fn blocks_ac_bd() -> MatroidOracle {
        MatroidOracle::partition(4, &[vec![0, 2], vec![1, 3]], vec![1, 1]).unwrap()
    }

    fn set(v: &[usize]) -> ElementSet {
        v.iter().copied().collect()
    }

    #[test]
    fn identical_sets_give_empty_map() {
        let m = MatroidOracle::uniform(4, 2).unwrap();
        assert!(exchange_bijection(&m, set(&[0, 1]), set(&[0, 1]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn uniform_picks_lexicographic_bijection() {
        let m = MatroidOracle::uniform(4, 2).unwrap();
        let g = exchange_bijection(&m, set(&[0, 1]), set(&[2, 3])).unwrap();
        assert_eq!(g, vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn partition_bijection_is_forced() {
        let g = exchange_bijection(&blocks_ac_bd(), set(&[0, 1]), set(&[2, 3])).unwrap();
        assert_eq!(g, vec![(0, 2), (1, 3)]);
        // with blocks {a,d},{b,c} the other bijection is forced
        let m = MatroidOracle::partition(4, &[vec![0, 3], vec![1, 2]], vec![1, 1]).unwrap();
        let g = exchange_bijection(&m, set(&[0, 1]), set(&[2, 3])).unwrap();
        assert_eq!(g, vec![(0, 3), (1, 2)]);
    }

    #[test]
    fn partial_maps_examples() {
        let m = blocks_ac_bd();
        let x = partial_exchange_maps(&m, set(&[0, 1]), set(&[2, 3])).unwrap();
        assert_eq!(x.mapped, set(&[2, 3]));
        assert_eq!((x.image(2), x.image(3)), (Some(0), Some(1)));

        let x = partial_exchange_maps(&m, set(&[0, 1]), set(&[0])).unwrap();
        assert_eq!(x.mapped, ElementSet::EMPTY);
        let x = partial_exchange_maps(&m, ElementSet::EMPTY, set(&[2, 3])).unwrap();
        assert_eq!(x.mapped, ElementSet::EMPTY);
    }

    #[test]
    fn partial_maps_unequal_sizes() {
        let m = MatroidOracle::uniform(5, 3).unwrap();
        let x = partial_exchange_maps(&m, set(&[0, 1, 2]), set(&[3])).unwrap();
        assert_eq!(x.mapped, set(&[3]));
        let x = partial_exchange_maps(&m, set(&[0]), set(&[2, 3, 4])).unwrap();
        verify_partial_exchange(&m, set(&[0]), set(&[2, 3, 4]), &x).unwrap();
    }
}
