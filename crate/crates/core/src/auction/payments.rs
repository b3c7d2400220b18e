use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::greedy::{greedy_allocate, AllocationResult, TieMode};
use super::instance::{AuctionInstance, BidProfile};
use crate::error::{domain, input, AuctionError, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PaymentRule {
    /// Uniform price: every winner pays `k_i * b_{m+1}`.
    UP,
    /// Discriminatory price: every winner pays its own bid.
    DP,
    /// Generalized second price: rank `r` pays `k_r * b_{r+1}`.
    GSP,
    /// Tiered loser-walk payment.
    VCG,
}

impl PaymentRule {
    pub const ALL: [PaymentRule; 4] = [PaymentRule::UP, PaymentRule::DP, PaymentRule::GSP, PaymentRule::VCG];

    /// The three formats run in simulations.
    pub const SIMULATED: [PaymentRule; 3] = [PaymentRule::UP, PaymentRule::DP, PaymentRule::GSP];

    pub fn as_str(self) -> &'static str {
        match self {
            PaymentRule::UP => "UP",
            PaymentRule::DP => "DP",
            PaymentRule::GSP => "GSP",
            PaymentRule::VCG => "VCG",
        }
    }
}

impl fmt::Display for PaymentRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PaymentRule {
    type Err = AuctionError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "UP" => Ok(PaymentRule::UP),
            "DP" => Ok(PaymentRule::DP),
            "GSP" => Ok(PaymentRule::GSP),
            "VCG" => Ok(PaymentRule::VCG),
            other => Err(input(format!("unknown payment rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BidderOutcome {
    pub is_winner: bool,
    #[serde(with = "rational::json")]
    pub payment: Rational,
    #[serde(with = "rational::json")]
    pub payoff: Rational,
}

/// Payments and payoffs under one rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub rule: PaymentRule,
    pub bidders: Vec<BidderOutcome>,
    #[serde(with = "rational::json")]
    pub revenue: Rational,
    /// Set when nobody was rejected, so UP/GSP fell back to a zero stop price.
    pub no_stop_bidder: bool,
}

impl AuctionOutcome {
    /// Assembles the outcome from per-bidder payments; losers must carry zero.
    pub fn from_payments(
        rule: PaymentRule,
        alloc: &AllocationResult,
        instance: &AuctionInstance,
        payments: Vec<Rational>,
    ) -> Self {
        let mask = alloc.winner_mask(instance.len());
        let bidders: Vec<BidderOutcome> = payments
            .into_iter()
            .enumerate()
            .map(|(id, payment)| {
                if mask[id] {
                    BidderOutcome { is_winner: true, payment, payoff: instance.value(id) - payment }
                } else {
                    debug_assert!(payment.is_zero());
                    BidderOutcome { is_winner: false, payment: Rational::zero(), payoff: Rational::zero() }
                }
            })
            .collect();
        let revenue = rational::sum(bidders.iter().map(|b| &b.payment));
        AuctionOutcome { rule, bidders, revenue, no_stop_bidder: alloc.first_rejected.is_none() }
    }

    pub fn payoff(&self, id: usize) -> &Rational {
        &self.bidders[id].payoff
    }

    pub fn payment(&self, id: usize) -> &Rational {
        &self.bidders[id].payment
    }

    pub fn winners(&self) -> impl Iterator<Item = usize> + '_ {
        self.bidders.iter().enumerate().filter(|(_, b)| b.is_winner).map(|(i, _)| i)
    }
}

fn stop_price(alloc: &AllocationResult, profile: &BidProfile, instance: &AuctionInstance) -> Rational {
    alloc.first_rejected.map(|j| profile.per_unit(j, instance)).unwrap_or_else(Rational::zero)
}

pub fn up_payments(alloc: &AllocationResult, profile: &BidProfile, instance: &AuctionInstance) -> AuctionOutcome {
    let price = stop_price(alloc, profile, instance);
    let mut payments = vec![Rational::zero(); instance.len()];
    for &w in &alloc.winners {
        payments[w] = instance.size(w) * price;
    }
    AuctionOutcome::from_payments(PaymentRule::UP, alloc, instance, payments)
}

pub fn dp_payments(alloc: &AllocationResult, profile: &BidProfile, instance: &AuctionInstance) -> AuctionOutcome {
    let mut payments = vec![Rational::zero(); instance.len()];
    for &w in &alloc.winners {
        payments[w] = *profile.bid(w);
    }
    AuctionOutcome::from_payments(PaymentRule::DP, alloc, instance, payments)
}

pub fn gsp_payments(alloc: &AllocationResult, profile: &BidProfile, instance: &AuctionInstance) -> AuctionOutcome {
    let mut payments = vec![Rational::zero(); instance.len()];
    for (rank, &w) in alloc.winners.iter().enumerate() {
        let next = alloc.ranked.get(rank + 1).map(|&j| profile.per_unit(j, instance)).unwrap_or_else(Rational::zero);
        payments[w] = instance.size(w) * next;
    }
    AuctionOutcome::from_payments(PaymentRule::GSP, alloc, instance, payments)
}

/// Prices each winner's units tier by tier: walking the losers in ranked
/// order, each loser prices `min(remaining, k_loser)` units at its per-unit
/// bid. Units left after the last loser are free.
pub fn vcg_payments(alloc: &AllocationResult, profile: &BidProfile, instance: &AuctionInstance) -> AuctionOutcome {
    let mut payments = vec![Rational::zero(); instance.len()];
    for &w in &alloc.winners {
        let mut left = *instance.size(w);
        let mut pay = Rational::zero();
        for &l in alloc.losers() {
            if left.is_zero() {
                break;
            }
            let units = left.min(*instance.size(l));
            pay += units * profile.per_unit(l, instance);
            left -= units;
        }
        payments[w] = pay;
    }
    AuctionOutcome::from_payments(PaymentRule::VCG, alloc, instance, payments)
}

pub fn settle(
    rule: PaymentRule,
    alloc: &AllocationResult,
    profile: &BidProfile,
    instance: &AuctionInstance,
) -> AuctionOutcome {
    match rule {
        PaymentRule::UP => up_payments(alloc, profile, instance),
        PaymentRule::DP => dp_payments(alloc, profile, instance),
        PaymentRule::GSP => gsp_payments(alloc, profile, instance),
        PaymentRule::VCG => vcg_payments(alloc, profile, instance),
    }
}

/// Allocates and settles in one call.
pub fn run_auction(
    instance: &AuctionInstance,
    profile: &BidProfile,
    rule: PaymentRule,
    tie_mode: TieMode,
) -> Result<(AllocationResult, AuctionOutcome)> {
    let alloc = greedy_allocate(instance, profile, tie_mode)?;
    let outcome = settle(rule, &alloc, profile, instance);
    Ok((alloc, outcome))
}

/// The per-unit threshold `ẑ` at which `winner_id` stops winning: the
/// per-unit bid of the first rejected bidder, or zero if nobody is rejected.
pub fn critical_price(
    instance: &AuctionInstance,
    profile: &BidProfile,
    winner_id: usize,
    tie_mode: TieMode,
) -> Result<Rational> {
    let alloc = greedy_allocate(instance, profile, tie_mode)?;
    if !alloc.is_winner(winner_id) {
        return Err(domain(format!("bidder {winner_id} is not a winner")));
    }
    Ok(stop_price(&alloc, profile, instance))
}

/// Recomputes payoffs from an outcome's payments: `v_i - payment` for
/// winners, zero for losers. May be negative.
pub fn payoffs(outcome: &AuctionOutcome, instance: &AuctionInstance) -> Vec<Rational> {
    outcome
        .bidders
        .iter()
        .enumerate()
        .map(|(id, b)| if b.is_winner { instance.value(id) - b.payment } else { Rational::zero() })
        .collect()
}
