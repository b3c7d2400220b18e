use std::cmp::Ordering;

use num_traits::Zero;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instance::{AuctionInstance, BidProfile};
use crate::error::Result;
use crate::rational::{self, Rational};

/// How equal per-unit bids are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TieMode {
    /// Smaller size first, then lower bidder id.
    #[default]
    Deterministic,
    /// A random key per bidder drawn from `seed`, then lower bidder id.
    SeededRandom { seed: u64 },
}

/// Compares per-unit bids `bid_a / size_a` and `bid_b / size_b` without
/// dividing. Sizes must be positive.
pub fn cmp_per_unit(bid_a: &Rational, size_a: &Rational, bid_b: &Rational, size_b: &Rational) -> Ordering {
    (bid_a * size_b).cmp(&(bid_b * size_a))
}

/// Bidder ids by descending per-unit bid, ties resolved by `tie_mode`.
pub fn rank_bids(profile: &BidProfile, instance: &AuctionInstance, tie_mode: TieMode) -> Result<Vec<usize>> {
    profile.check_covers(instance)?;
    let n = instance.len();
    let keys: Vec<u64> = match tie_mode {
        TieMode::Deterministic => vec![0; n],
        TieMode::SeededRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.next_u64()).collect()
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (instance.size(a), instance.size(b));
        cmp_per_unit(profile.bid(b), kb, profile.bid(a), ka)
            .then_with(|| match tie_mode {
                TieMode::Deterministic => ka.cmp(kb),
                TieMode::SeededRandom { .. } => keys[a].cmp(&keys[b]),
            })
            .then(a.cmp(&b))
    });
    Ok(order)
}

/// Output of the stop-at-first-misfit greedy packer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationResult {
    /// Every bidder id, best per-unit bid first.
    pub ranked: Vec<usize>,
    /// Packed bidders: always a prefix of `ranked`.
    pub winners: Vec<usize>,
    /// The bidder at rank `m + 1` whose object did not fit.
    pub first_rejected: Option<usize>,
    #[serde(with = "rational::json")]
    pub used_capacity: Rational,
    #[serde(with = "rational::json")]
    pub remaining_capacity: Rational,
}

impl AllocationResult {
    /// Packs `ranked` in order and stops at the first object that does not
    /// fit. Later, smaller objects are never considered.
    pub fn pack(instance: &AuctionInstance, ranked: Vec<usize>) -> Self {
        let capacity = *instance.capacity();
        let mut used = Rational::zero();
        let mut first_rejected = None;
        let mut m = 0;
        for &id in &ranked {
            let next = used + instance.size(id);
            if next > capacity {
                first_rejected = Some(id);
                break;
            }
            used = next;
            m += 1;
        }
        let winners = ranked[..m].to_vec();
        AllocationResult { ranked, winners, first_rejected, used_capacity: used, remaining_capacity: capacity - used }
    }

    pub fn is_winner(&self, id: usize) -> bool {
        self.winners.contains(&id)
    }

    pub fn winner_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &w in &self.winners {
            mask[w] = true;
        }
        mask
    }

    /// Zero-based position of `id` in the ranking.
    pub fn rank_of(&self, id: usize) -> Option<usize> {
        self.ranked.iter().position(|&r| r == id)
    }

    /// Bidders ranked below the last winner, in ranked order.
    pub fn losers(&self) -> &[usize] {
        &self.ranked[self.winners.len()..]
    }

    pub fn last_winner(&self) -> Option<usize> {
        self.winners.last().copied()
    }
}

pub fn greedy_allocate(
    instance: &AuctionInstance,
    profile: &BidProfile,
    tie_mode: TieMode,
) -> Result<AllocationResult> {
    let ranked = rank_bids(profile, instance, tie_mode)?;
    Ok(AllocationResult::pack(instance, ranked))
}

/// Analysis-only safeguard: the greedy packing or the single highest total
/// bid, whichever has the larger total bid. Never used to run an auction.
pub fn greedy_or_top_bidder(instance: &AuctionInstance, profile: &BidProfile, tie_mode: TieMode) -> Result<Vec<usize>> {
    let alloc = greedy_allocate(instance, profile, tie_mode)?;
    let packed_bid = rational::sum(alloc.winners.iter().map(|&w| profile.bid(w)));
    let top = (0..instance.len())
        .max_by(|&a, &b| profile.bid(a).cmp(profile.bid(b)).then(b.cmp(&a)))
        .expect("instances are non-empty");
    if *profile.bid(top) > packed_bid {
        Ok(vec![top])
    } else {
        Ok(alloc.winners)
    }
}
