//! Lotteries, menus and item pricings for a unit-demand buyer, plus explicit
//! multi-agent mechanism tables and their lottery-menu form.

mod table;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub(crate) use table::topological_order;
pub use table::{
    check_ic, check_ir, lottery_mech_feasibility_check, mechanism_to_lottery, FeasibilityReport,
    FeasibilityViolation, IcReport, IcViolation, LotteryMechanism, MechanismTable,
};

use crate::dist::TypeSpace;
use crate::error::{Error, Result};
use crate::json::{unwrap, wrap, Num};
use crate::scalar::{dot, Scalar};

/// Limit on the allocation probabilities of a lottery.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LotteryCap {
    /// `sum_j q_j <= 1`.
    Simplex,
    /// `q_0 <= 1` and `sum_{j >= 1} q_j <= 1`: item 0 can be sold alongside
    /// one of the others.
    Lifted,
}

impl LotteryCap {
    pub fn admits<T: Scalar>(self, q: &[T]) -> bool {
        let one = T::one();
        if q.iter().any(|x| !T::zero().le_tol(x)) {
            return false;
        }
        match self {
            LotteryCap::Simplex => crate::scalar::sum(q.iter().cloned()).le_tol(&one),
            LotteryCap::Lifted => {
                q.first().is_none_or(|q0| q0.le_tol(&one))
                    && crate::scalar::sum(q.iter().skip(1).cloned()).le_tol(&one)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lottery<T> {
    pub q: Vec<T>,
    pub p: T,
}

impl<T: Scalar> Lottery<T> {
    pub fn new(q: Vec<T>, p: T) -> Self {
        Lottery { q, p }
    }

    pub fn null(items: usize) -> Self {
        Lottery {
            q: vec![T::zero(); items],
            p: T::zero(),
        }
    }

    pub fn is_null(&self) -> bool {
        self.p.is_zero() && self.q.iter().all(|x| x.is_zero())
    }

    pub fn utility(&self, values: &[T]) -> T {
        dot(&self.q, values) - self.p.clone()
    }

    /// Expected value `sum_j q_j v_j`.
    pub fn surplus(&self, values: &[T]) -> T {
        dot(&self.q, values)
    }

    pub fn near(&self, other: &Self) -> bool {
        self.p.near(&other.p) && self.q.iter().zip(&other.q).all(|(a, b)| a.near(b))
    }
}

/// A finite menu that always contains the null lottery. `order` lists entry
/// indices from most to least preferred and decides ties between lotteries
/// of equal utility.
#[derive(Clone, Debug, PartialEq)]
pub struct LotteryMenu<T> {
    items: usize,
    lotteries: Vec<Lottery<T>>,
    order: Vec<usize>,
}

impl<T: Scalar> LotteryMenu<T> {
    /// Validates `q` against `cap`, inserts the null lottery at index 0 if it
    /// is missing, and ranks ties by higher price, then lower index.
    pub fn new(items: usize, lotteries: Vec<Lottery<T>>, cap: LotteryCap) -> Result<Self> {
        if let Some(l) = lotteries.iter().find(|l| l.q.len() != items) {
            return Err(Error::Validation(format!(
                "lottery has {} probabilities for {items} items",
                l.q.len()
            )));
        }
        if let Some(l) = lotteries.iter().find(|l| !cap.admits(&l.q)) {
            return Err(Error::Validation(format!(
                "lottery probabilities {:?} exceed the cap",
                l.q
            )));
        }
        let mut lotteries = lotteries;
        if !lotteries.iter().any(Lottery::is_null) {
            lotteries.insert(0, Lottery::null(items));
        }
        let order = default_order(&lotteries);
        Ok(LotteryMenu {
            items,
            lotteries,
            order,
        })
    }

    /// A menu with an explicit preference order over its entries.
    pub fn with_order(items: usize, lotteries: Vec<Lottery<T>>, order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; lotteries.len()];
        for &k in &order {
            if k >= lotteries.len() || std::mem::replace(&mut seen[k], true) {
                return Err(Error::Validation(
                    "order is not a permutation of the menu".into(),
                ));
            }
        }
        if seen.iter().any(|s| !s) || !lotteries.iter().any(Lottery::is_null) {
            return Err(Error::Validation(
                "order must rank every entry and the menu must contain the null lottery".into(),
            ));
        }
        Ok(LotteryMenu {
            items,
            lotteries,
            order,
        })
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn lotteries(&self) -> &[Lottery<T>] {
        &self.lotteries
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.lotteries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lotteries.is_empty()
    }

    /// Index of the chosen lottery: maximum utility, ties to the entry ranked
    /// first in `order`.
    pub fn best_response(&self, values: &[T]) -> usize {
        let mut best: Option<(usize, T)> = None;
        for &k in &self.order {
            let u = self.lotteries[k].utility(values);
            if best.as_ref().is_none_or(|(_, b)| u.definitely_gt(b)) {
                best = Some((k, u));
            }
        }
        best.expect("menu contains the null lottery").0
    }

    pub fn choose(&self, values: &[T]) -> &Lottery<T> {
        &self.lotteries[self.best_response(values)]
    }

    /// Expected payment of a single buyer drawn from `ts`.
    pub fn revenue(&self, ts: &TypeSpace<T>) -> Result<T> {
        single_agent(ts, self.items)?;
        Ok(self.revenue_over(ts.agent(0).types.iter().map(|t| (&t.values[..], &t.prob))))
    }

    /// Expected payment over an explicit list of `(values, probability)`.
    pub fn revenue_over<'a, I>(&self, types: I) -> T
    where
        I: IntoIterator<Item = (&'a [T], &'a T)>,
    {
        types.into_iter().fold(T::zero(), |acc, (v, prob)| {
            acc + prob.clone() * self.choose(v).p.clone()
        })
    }

    /// Same lotteries with every price shifted by `delta`.
    pub fn shifted(&self, delta: &T) -> LotteryMenu<T> {
        LotteryMenu {
            items: self.items,
            lotteries: self
                .lotteries
                .iter()
                .map(|l| Lottery::new(l.q.clone(), l.p.clone() + delta.clone()))
                .collect(),
            order: self.order.clone(),
        }
    }

    pub fn to_json(&self) -> MenuJson<T> {
        MenuJson {
            lotteries: self
                .lotteries
                .iter()
                .map(|l| LotteryJson {
                    q: wrap(&l.q),
                    p: Num(l.p.clone()),
                })
                .collect(),
        }
    }
}

/// Indices sorted by higher price, then lower index.
pub fn default_order<T: Scalar>(lotteries: &[Lottery<T>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..lotteries.len()).collect();
    order.sort_by(|&a, &b| price_rank(&lotteries[a].p, a, &lotteries[b].p, b));
    order
}

fn price_rank<T: Scalar>(pa: &T, a: usize, pb: &T, b: usize) -> Ordering {
    pb.total_cmp(pa).then(a.cmp(&b))
}

fn single_agent<T: Scalar>(ts: &TypeSpace<T>, items: usize) -> Result<()> {
    if ts.n_agents() != 1 {
        return Err(Error::Validation(format!(
            "expected a single-agent type space, got {} agents",
            ts.n_agents()
        )));
    }
    if ts.n_items() != items {
        return Err(Error::Validation(format!(
            "menu has {items} items, type space {}",
            ts.n_items()
        )));
    }
    Ok(())
}

/// `{"lotteries":[{"q":[...],"p":...}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MenuJson<T> {
    pub lotteries: Vec<LotteryJson<T>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LotteryJson<T> {
    pub q: Vec<Num<T>>,
    pub p: Num<T>,
}

impl<T: Scalar> MenuJson<T> {
    pub fn build(self, cap: LotteryCap) -> Result<LotteryMenu<T>> {
        let items = self.lotteries.first().map(|l| l.q.len()).unwrap_or(0);
        if items == 0 {
            return Err(Error::Validation(
                "menu needs at least one lottery with items".into(),
            ));
        }
        let lotteries = self
            .lotteries
            .into_iter()
            .map(|l| Lottery::new(unwrap(l.q), l.p.0))
            .collect();
        LotteryMenu::new(items, lotteries, cap)
    }
}

/// One price per item; `None` means the item is not offered.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemPricing<T> {
    pub prices: Vec<Option<T>>,
}

impl<T: Scalar> ItemPricing<T> {
    pub fn new(prices: Vec<Option<T>>) -> Result<Self> {
        if prices.iter().flatten().any(|p| *p < T::zero()) {
            return Err(Error::Validation("item prices must be nonnegative".into()));
        }
        Ok(ItemPricing { prices })
    }

    pub fn uniform(items: usize, price: T) -> Self {
        ItemPricing {
            prices: vec![Some(price); items],
        }
    }

    /// The purchased item, if any: maximum utility, ties to a higher price,
    /// then to no purchase, then to the lower index.
    pub fn best_response(&self, values: &[T]) -> Option<usize> {
        let mut best: Option<(Option<usize>, T, T)> = Some((None, T::zero(), T::zero()));
        for (j, price) in self.prices.iter().enumerate() {
            let Some(price) = price else { continue };
            let u = values[j].clone() - price.clone();
            let (_, bu, bp) = best.as_ref().unwrap();
            let take = u.definitely_gt(bu) || (u.near(bu) && price.definitely_gt(bp));
            if take {
                best = Some((Some(j), u, price.clone()));
            }
        }
        best.unwrap().0
    }

    pub fn payment(&self, values: &[T]) -> T {
        match self.best_response(values) {
            Some(j) => self.prices[j].clone().unwrap(),
            None => T::zero(),
        }
    }

    pub fn revenue(&self, ts: &TypeSpace<T>) -> Result<T> {
        single_agent(ts, self.prices.len())?;
        Ok(ts.agent(0).types.iter().fold(T::zero(), |acc, t| {
            acc + t.prob.clone() * self.payment(&t.values)
        }))
    }

    /// The same offer as a menu of deterministic lotteries.
    pub fn to_menu(&self) -> LotteryMenu<T> {
        let m = self.prices.len();
        let lotteries: Vec<Lottery<T>> = self
            .prices
            .iter()
            .enumerate()
            .filter_map(|(j, p)| {
                p.as_ref().map(|p| {
                    let mut q = vec![T::zero(); m];
                    q[j] = T::one();
                    Lottery::new(q, p.clone())
                })
            })
            .collect();
        LotteryMenu::new(m, lotteries, LotteryCap::Simplex).expect("unit vectors fit the simplex")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;
    use crate::scalar::Rational;

    fn r(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    fn menu(entries: &[(&[&str], &str)]) -> LotteryMenu<Rational> {
        let items = entries[0].0.len();
        let lotteries = entries
            .iter()
            .map(|(q, p)| Lottery::new(q.iter().map(|x| r(x)).collect(), r(p)))
            .collect();
        LotteryMenu::new(items, lotteries, LotteryCap::Simplex).unwrap()
    }

    #[test]
    fn null_lottery_is_always_present() {
        let m = menu(&[(&["1", "0"], "5")]);
        assert_eq!(m.len(), 2);
        assert!(m.lotteries()[0].is_null());
        assert_eq!(m.best_response(&[r("6"), r("0")]), 1);
        assert_eq!(m.best_response(&[r("4"), r("0")]), 0);
    }

    #[test]
    fn half_half_lottery_beats_item_prices() {
        let m = menu(&[
            (&["0", "0"], "0"),
            (&["1", "0"], "5.097"),
            (&["0", "1"], "5.097"),
            (&["0.5", "0.5"], "5.057"),
        ]);
        let v = [r("5.5"), r("5.5")];
        assert_eq!(m.best_response(&v), 3);
        assert_eq!(m.choose(&v).utility(&v), r("0.443"));
    }

    #[test]
    fn ties_go_to_higher_price() {
        // both lotteries give utility 1 at v = (3, 3)
        let m = menu(&[(&["1", "0"], "2"), (&["0.5", "0.5"], "2")]);
        assert_eq!(m.best_response(&[r("3"), r("3")]), 1);
        let m = menu(&[(&["1", "0"], "1"), (&["0", "1"], "2")]);
        assert_eq!(m.best_response(&[r("2"), r("3")]), 2);
    }

    #[test]
    fn pricing_examples() {
        let p = ItemPricing::new(vec![Some(r("1")), Some(r("2"))]).unwrap();
        assert_eq!(p.best_response(&[r("1"), r("1")]), Some(0));
        let p = ItemPricing::<Rational>::new(vec![None, None]).unwrap();
        assert_eq!(p.best_response(&[r("9"), r("9")]), None);
        let p = ItemPricing::uniform(2, r("5.097"));
        assert_eq!(p.best_response(&[r("5.05"), r("5.09")]), None);
    }

    #[test]
    fn revenue_examples() {
        let d = DiscreteDist::new(vec![r("1"), r("2")], vec![r("1/2"), r("1/2")]).unwrap();
        let ts = TypeSpace::product(vec![vec![d]]).unwrap();
        let null = LotteryMenu::<Rational>::new(1, vec![], LotteryCap::Simplex).unwrap();
        assert_eq!(null.revenue(&ts).unwrap(), r("0"));
        let p = ItemPricing::uniform(1, r("2"));
        assert_eq!(p.revenue(&ts).unwrap(), r("1"));
        assert_eq!(p.to_menu().revenue(&ts).unwrap(), r("1"));
    }

    #[test]
    fn cap_validation() {
        let over = vec![Lottery::new(vec![r("0.7"), r("0.7")], r("1"))];
        assert!(LotteryMenu::new(2, over.clone(), LotteryCap::Simplex).is_err());
        let lifted = vec![Lottery::new(vec![r("1"), r("0.7"), r("0.3")], r("1"))];
        assert!(LotteryMenu::new(3, lifted, LotteryCap::Lifted).is_ok());
    }

    #[test]
    fn menu_json() {
        let j: MenuJson<Rational> =
            serde_json::from_str(r#"{"lotteries":[{"q":[0.5,0.5],"p":"5/2"}]}"#).unwrap();
        let m = j.build(LotteryCap::Simplex).unwrap();
        assert_eq!(m.len(), 2);
        let text = serde_json::to_string(&m.to_json()).unwrap();
        assert_eq!(
            text,
            r#"{"lotteries":[{"q":[0,0],"p":0},{"q":["1/2","1/2"],"p":"5/2"}]}"#
        );
    }
}
