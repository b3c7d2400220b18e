use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{input, AuctionError, Result};
use crate::rational::{self, int, Rational};

/// How strictly [`AuctionInstance`] checks the total-size condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validation {
    /// Sizes must sum to more than capacity (every real auction run).
    #[default]
    Strict,
    /// Allows `Σ k_i <= K`, for unit tests and oracle edge cases.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bidder {
    pub id: usize,
    #[serde(with = "rational::json")]
    pub size: Rational,
    #[serde(with = "rational::json")]
    pub value: Rational,
}

/// Capacity plus every bidder's public size and private value.
///
/// Invariants: each size is positive and strictly below capacity, values are
/// non-negative, ids are exactly `0..n`, and under [`Validation::Strict`] the
/// sizes sum to more than the capacity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct AuctionInstance {
    capacity: Rational,
    bidders: Vec<Bidder>,
    validation: Validation,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    #[serde(with = "rational::json")]
    capacity: Rational,
    bidders: Vec<Bidder>,
    #[serde(default)]
    validation: Validation,
}

impl TryFrom<InstanceRepr> for AuctionInstance {
    type Error = AuctionError;

    fn try_from(r: InstanceRepr) -> Result<Self> {
        AuctionInstance::from_bidders(r.capacity, r.bidders, r.validation)
    }
}

impl From<AuctionInstance> for InstanceRepr {
    fn from(i: AuctionInstance) -> Self {
        InstanceRepr { capacity: i.capacity, bidders: i.bidders, validation: i.validation }
    }
}

impl AuctionInstance {
    /// Strict instance from `(size, value)` pairs; ids follow input order.
    pub fn new(capacity: Rational, items: Vec<(Rational, Rational)>) -> Result<Self> {
        Self::with_validation(capacity, items, Validation::Strict)
    }

    pub fn relaxed(capacity: Rational, items: Vec<(Rational, Rational)>) -> Result<Self> {
        Self::with_validation(capacity, items, Validation::Relaxed)
    }

    pub fn with_validation(
        capacity: Rational,
        items: Vec<(Rational, Rational)>,
        validation: Validation,
    ) -> Result<Self> {
        let bidders = items.into_iter().enumerate().map(|(id, (size, value))| Bidder { id, size, value }).collect();
        Self::from_bidders(capacity, bidders, validation)
    }

    /// Integer shorthand used throughout tests and presets.
    pub fn from_integers(capacity: i64, sizes: &[i64], values: &[i64]) -> Result<Self> {
        Self::integers_with(capacity, sizes, values, Validation::Strict)
    }

    pub fn integers_with(capacity: i64, sizes: &[i64], values: &[i64], validation: Validation) -> Result<Self> {
        if sizes.len() != values.len() {
            return Err(input(format!("{} sizes but {} values", sizes.len(), values.len())));
        }
        let items = sizes.iter().zip(values).map(|(&k, &v)| (int(k as i128), int(v as i128))).collect();
        Self::with_validation(int(capacity as i128), items, validation)
    }

    pub fn from_bidders(capacity: Rational, mut bidders: Vec<Bidder>, validation: Validation) -> Result<Self> {
        if capacity.is_negative() {
            return Err(input("capacity must be non-negative"));
        }
        if bidders.is_empty() {
            return Err(input("an auction needs at least one bidder"));
        }
        bidders.sort_by_key(|b| b.id);
        for (expected, b) in bidders.iter().enumerate() {
            if b.id != expected {
                return Err(input(format!(
                    "bidder ids must be unique and dense 0..{}; found id {} at position {}",
                    bidders.len(),
                    b.id,
                    expected
                )));
            }
            if !b.size.is_positive() {
                return Err(input(format!("bidder {} has non-positive size", b.id)));
            }
            if b.size >= capacity {
                return Err(input(format!(
                    "bidder {} size {} is not below capacity {}",
                    b.id,
                    rational::format(&b.size),
                    rational::format(&capacity)
                )));
            }
            if b.value.is_negative() {
                return Err(input(format!("bidder {} has negative value", b.id)));
            }
        }
        if validation == Validation::Strict {
            let total = rational::sum(bidders.iter().map(|b| &b.size));
            if total <= capacity {
                return Err(input(format!(
                    "total size {} does not exceed capacity {}",
                    rational::format(&total),
                    rational::format(&capacity)
                )));
            }
        }
        Ok(AuctionInstance { capacity, bidders, validation })
    }

    pub fn capacity(&self) -> &Rational {
        &self.capacity
    }

    pub fn bidders(&self) -> &[Bidder] {
        &self.bidders
    }

    pub fn len(&self) -> usize {
        self.bidders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bidders.is_empty()
    }

    pub fn validation(&self) -> Validation {
        self.validation
    }

    pub fn size(&self, id: usize) -> &Rational {
        &self.bidders[id].size
    }

    pub fn value(&self, id: usize) -> &Rational {
        &self.bidders[id].value
    }

    pub fn values(&self) -> Vec<Rational> {
        self.bidders.iter().map(|b| b.value).collect()
    }

    pub fn total_size(&self) -> Rational {
        rational::sum(self.bidders.iter().map(|b| &b.size))
    }
}

/// One total bid per bidder, indexed by bidder id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct BidProfile {
    bids: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct BidEntry {
    bidder_id: usize,
    #[serde(with = "rational::json")]
    bid: Rational,
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    bids: Vec<BidEntry>,
}

impl TryFrom<ProfileRepr> for BidProfile {
    type Error = AuctionError;

    fn try_from(r: ProfileRepr) -> Result<Self> {
        let n = r.bids.len();
        BidProfile::from_entries(r.bids.into_iter().map(|e| (e.bidder_id, e.bid)), n)
    }
}

impl From<BidProfile> for ProfileRepr {
    fn from(p: BidProfile) -> Self {
        ProfileRepr {
            bids: p.bids.into_iter().enumerate().map(|(bidder_id, bid)| BidEntry { bidder_id, bid }).collect(),
        }
    }
}

impl BidProfile {
    pub fn new(bids: Vec<Rational>) -> Result<Self> {
        if let Some(i) = bids.iter().position(|b| b.is_negative()) {
            return Err(input(format!("bidder {i} submitted a negative bid")));
        }
        Ok(BidProfile { bids })
    }

    pub fn from_integers(bids: &[i64]) -> Result<Self> {
        Self::new(bids.iter().map(|&b| int(b as i128)).collect())
    }

    /// Builds a profile from `(bidder_id, bid)` pairs that must cover `0..n`
    /// exactly once.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, Rational)>, n: usize) -> Result<Self> {
        let mut slots: Vec<Option<Rational>> = vec![None; n];
        for (id, bid) in entries {
            let slot = slots.get_mut(id).ok_or_else(|| input(format!("bid for unknown bidder {id}")))?;
            if slot.replace(bid).is_some() {
                return Err(input(format!("duplicate bid for bidder {id}")));
            }
        }
        let bids = slots
            .into_iter()
            .enumerate()
            .map(|(id, b)| b.ok_or_else(|| input(format!("missing bid for bidder {id}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(bids)
    }

    /// Every bidder bids its value.
    pub fn truthful(instance: &AuctionInstance) -> Self {
        BidProfile { bids: instance.values() }
    }

    pub fn bids(&self) -> &[Rational] {
        &self.bids
    }

    pub fn bid(&self, id: usize) -> &Rational {
        &self.bids[id]
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    /// Copy with bidder `id`'s bid replaced. Panics on a negative bid.
    pub fn with_bid(&self, id: usize, bid: Rational) -> Self {
        assert!(!bid.is_negative(), "negative bid");
        let mut bids = self.bids.clone();
        bids[id] = bid;
        BidProfile { bids }
    }

    /// `B_i / k_i`.
    pub fn per_unit(&self, id: usize, instance: &AuctionInstance) -> Rational {
        self.bids[id] / instance.size(id)
    }

    pub(crate) fn check_covers(&self, instance: &AuctionInstance) -> Result<()> {
        if self.bids.len() != instance.len() {
            return Err(input(format!("profile has {} bids for {} bidders", self.bids.len(), instance.len())));
        }
        Ok(())
    }

    pub fn total(&self) -> Rational {
        self.bids.iter().fold(Rational::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn rejects_size_at_capacity() {
        let err = AuctionInstance::from_integers(10, &[10, 4], &[1, 1]).unwrap_err();
        assert!(matches!(err, AuctionError::Input(_)));
    }

    #[test]
    fn strict_requires_excess_total_size() {
        assert!(AuctionInstance::from_integers(10, &[4, 5], &[1, 1]).is_err());
        assert!(AuctionInstance::integers_with(10, &[4, 5], &[1, 1], Validation::Relaxed).is_ok());
        assert!(AuctionInstance::from_integers(10, &[4, 5, 6], &[1, 1, 1]).is_ok());
    }

    #[test]
    fn ids_must_be_dense() {
        let bidders =
            vec![Bidder { id: 0, size: int(3), value: int(1) }, Bidder { id: 2, size: int(9), value: int(1) }];
        assert!(AuctionInstance::from_bidders(int(10), bidders, Validation::Strict).is_err());
    }

    #[test]
    fn profile_entries_must_cover_every_bidder() {
        assert!(BidProfile::from_entries([(0, int(1)), (2, int(1))], 2).is_err());
        assert!(BidProfile::from_entries([(0, int(1)), (0, int(1))], 2).is_err());
        assert!(BidProfile::from_entries([(0, int(1))], 2).is_err());
        let p = BidProfile::from_entries([(1, int(2)), (0, int(1))], 2).unwrap();
        assert_eq!(p.bids(), &[int(1), int(2)]);
        assert!(BidProfile::new(vec![int(-1)]).is_err());
    }

    #[test]
    fn json_round_trip_uses_rational_pairs() {
        let inst = AuctionInstance::new(int(10), vec![(int(1), int(1)), (ratio(99, 10), int(9))]).unwrap();
        let s = serde_json::to_string(&inst).unwrap();
        assert!(s.contains(r#""size":{"num":99,"den":10}"#), "{s}");
        let back: AuctionInstance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, inst);

        let bad = r#"{"capacity": 10, "bidders": [{"id": 0, "size": 4, "value": 1}]}"#;
        assert!(serde_json::from_str::<AuctionInstance>(bad).is_err());
    }
}
