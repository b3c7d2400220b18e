use serde::{Deserialize, Serialize};

use super::dsic::{payoff_for_bid, profitable_deviation, DeviationReport};
use super::{task_rng, BidGrid, InstanceSampler};
use crate::auction::{
    greedy_allocate, settle, up_payments, vcg_payments, AllocationResult, AuctionInstance, AuctionOutcome, BidProfile,
    PaymentRule, TieMode,
};
use crate::error::Result;
use crate::metrics::optimal_surplus;
use crate::rational::{self, int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome<T> {
    Found { searched: usize, witness: T },
    NotFound { searched: usize },
}

impl<T> SearchOutcome<T> {
    pub fn found(self) -> Option<T> {
        match self {
            SearchOutcome::Found { witness, .. } => Some(witness),
            SearchOutcome::NotFound { .. } => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }

    pub fn searched(&self) -> usize {
        match self {
            SearchOutcome::Found { searched, .. } | SearchOutcome::NotFound { searched } => *searched,
        }
    }
}

fn rule_fn(rule: PaymentRule) -> impl Fn(&AllocationResult, &BidProfile, &AuctionInstance) -> AuctionOutcome + Sync {
    move |a: &AllocationResult, p: &BidProfile, i: &AuctionInstance| settle(rule, a, p, i)
}

/// Underbid grid for bidder `i`: `0, 1/2, ..., v_i`.
fn underbids(value: &Rational) -> Vec<Rational> {
    BidGrid::new(int(0), *value, ratio(1, 2)).expect("valid grid").points()
}

/// Checks whether some truthful winner in `instance` strictly gains by
/// bidding below its value while still winning at a lower payment, all
/// others truthful.
fn underbid_in(instance: &AuctionInstance, rule: PaymentRule) -> Result<Option<DeviationReport>> {
    let truthful = BidProfile::truthful(instance);
    let pay = rule_fn(rule);
    let alloc = greedy_allocate(instance, &truthful, TieMode::Deterministic)?;
    let base = settle(rule, &alloc, &truthful, instance);
    for &w in &alloc.winners {
        let grid = underbids(instance.value(w));
        if let Some(r) =
            profitable_deviation(rule.as_str(), instance, &truthful, w, &grid, &pay, TieMode::Deterministic)?
        {
            let (still_wins, _) =
                payoff_for_bid(instance, &truthful, w, r.deviating_bid, &pay, TieMode::Deterministic)?;
            let (_, dev) = r.replay(rule)?;
            if still_wins && r.deviating_bid < r.truthful_bid && dev.payment(w) < base.payment(w) {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

/// Constructed fallback: a high per-unit bidder who ducks below the next
/// winner and pays the last loser's rate instead.
fn underbid_family() -> Vec<AuctionInstance> {
    vec![AuctionInstance::from_integers(10, &[4, 5, 6], &[8, 5, 3]).expect("valid")]
}

/// Random search (then the constructed family) for a strictly profitable
/// underbid from truthful bidding under `rule`.
pub fn find_underbid_counterexample(
    rule: PaymentRule,
    budget: usize,
    seed: u64,
) -> Result<SearchOutcome<DeviationReport>> {
    let sampler = InstanceSampler::default();
    for t in 0..budget {
        let instance = sampler.sample(&mut task_rng(seed, t as u64));
        if let Some(r) = underbid_in(&instance, rule)? {
            return Ok(SearchOutcome::Found { searched: t + 1, witness: r });
        }
    }
    for (i, instance) in underbid_family().iter().enumerate() {
        if let Some(r) = underbid_in(instance, rule)? {
            return Ok(SearchOutcome::Found { searched: budget + i + 1, witness: r });
        }
    }
    Ok(SearchOutcome::NotFound { searched: budget + underbid_family().len() })
}

pub fn find_gsp_counterexample(budget: usize, seed: u64) -> Result<SearchOutcome<DeviationReport>> {
    find_underbid_counterexample(PaymentRule::GSP, budget, seed)
}

/// A profitable VCG overbid by the highest loser, with the same bid priced
/// under UP for comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VcgCounterexample {
    pub report: DeviationReport,
    /// Per-unit price the deviator pays for its top tier under VCG (the
    /// displaced last winner's per-unit bid).
    #[serde(with = "rational::json")]
    pub displaced_price: Rational,
    #[serde(with = "rational::json")]
    pub up_payoff: Rational,
}

fn overbid_in(instance: &AuctionInstance) -> Result<Option<VcgCounterexample>> {
    let truthful = BidProfile::truthful(instance);
    let alloc = greedy_allocate(instance, &truthful, TieMode::Deterministic)?;
    let Some(loser) = alloc.first_rejected else {
        return Ok(None);
    };
    let value = *instance.value(loser);
    let size = *instance.size(loser);
    let top = rational::sum(instance.bidders().iter().map(|b| &b.value)) + int(1);
    let grid = BidGrid::new(value, top, ratio(1, 4)).expect("valid grid").points();
    for bid in grid.into_iter().skip(1) {
        let profile = truthful.with_bid(loser, bid);
        let dev_alloc = greedy_allocate(instance, &profile, TieMode::Deterministic)?;
        if !dev_alloc.is_winner(loser) {
            continue;
        }
        let vcg = vcg_payments(&dev_alloc, &profile, instance);
        let up = up_payments(&dev_alloc, &profile, instance);
        let Some(first_loser) = dev_alloc.losers().first().copied() else {
            continue;
        };
        let displaced_price = profile.per_unit(first_loser, instance);
        if *vcg.payoff(loser) > int(0) && *up.payoff(loser) < int(0) && value / size < displaced_price {
            return Ok(Some(VcgCounterexample {
                report: DeviationReport {
                    rule: PaymentRule::VCG.as_str().to_string(),
                    instance: instance.clone(),
                    bids: truthful,
                    bidder_id: loser,
                    tie_mode: TieMode::Deterministic,
                    truthful_bid: value,
                    truthful_payoff: int(0),
                    deviating_bid: bid,
                    deviation_payoff: *vcg.payoff(loser),
                },
                displaced_price,
                up_payoff: *up.payoff(loser),
            }));
        }
    }
    Ok(None)
}

/// Constructed fallback: the last winner is small, the highest loser large
/// with a per-unit value just below it, and a cheap second loser prices the
/// remaining units.
fn overbid_family() -> Vec<AuctionInstance> {
    // Per-unit values: 2, 3/2, 7/5, 1/5.
    vec![AuctionInstance::from_integers(20, &[10, 2, 10, 10], &[20, 3, 14, 2]).expect("valid")]
}

/// Searches for a highest-losing bidder whose overbid wins under VCG with a
/// strictly positive payoff while the identical bid loses money under UP.
pub fn find_vcg_counterexample(budget: usize, seed: u64) -> Result<SearchOutcome<VcgCounterexample>> {
    let sampler = InstanceSampler { min_value: 1, ..InstanceSampler::default() };
    for t in 0..budget {
        let instance = sampler.sample(&mut task_rng(seed, t as u64));
        if let Some(w) = overbid_in(&instance)? {
            return Ok(SearchOutcome::Found { searched: t + 1, witness: w });
        }
    }
    for (i, instance) in overbid_family().iter().enumerate() {
        if let Some(w) = overbid_in(instance)? {
            return Ok(SearchOutcome::Found { searched: budget + i + 1, witness: w });
        }
    }
    Ok(SearchOutcome::NotFound { searched: budget + overbid_family().len() })
}

/// Truthful UP outcome compared against the best feasible packing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InefficiencyWitness {
    pub instance: AuctionInstance,
    pub outcome: AuctionOutcome,
    #[serde(with = "rational::json")]
    pub packed_value: Rational,
    #[serde(with = "rational::json")]
    pub optimal_value: Rational,
    pub optimal_set: Vec<usize>,
    pub lowest_winner: Option<usize>,
    pub highest_loser: Option<usize>,
    #[serde(with = "rational::json")]
    pub remaining_capacity: Rational,
    /// `k̂ + k_i >= k'_i` and `v_i < v'_i` for the lowest winner `i` and the
    /// highest loser `i'`: swapping them is feasible and strictly better.
    pub swap_condition: bool,
}

impl InefficiencyWitness {
    pub fn gap(&self) -> Rational {
        self.optimal_value - self.packed_value
    }
}

/// Runs truthful UP on `instance` and measures it against the optimum.
pub fn inefficiency_witness_for(instance: &AuctionInstance) -> Result<InefficiencyWitness> {
    let truthful = BidProfile::truthful(instance);
    let alloc = greedy_allocate(instance, &truthful, TieMode::Deterministic)?;
    let outcome = up_payments(&alloc, &truthful, instance);
    let packed_value = rational::sum(alloc.winners.iter().map(|&w| instance.value(w)));
    let (optimal_value, optimal_set) = optimal_surplus(instance);
    let lowest_winner = alloc.last_winner();
    let highest_loser = alloc.first_rejected;
    let swap_condition = match (lowest_winner, highest_loser) {
        (Some(i), Some(j)) => {
            alloc.remaining_capacity + instance.size(i) >= *instance.size(j) && instance.value(i) < instance.value(j)
        }
        _ => false,
    };
    Ok(InefficiencyWitness {
        instance: instance.clone(),
        outcome,
        packed_value,
        optimal_value,
        optimal_set,
        lowest_winner,
        highest_loser,
        remaining_capacity: alloc.remaining_capacity,
        swap_condition,
    })
}

/// The two-object example: capacity 10, a size-1 object worth 1 and a
/// size-9.9 object worth 9.
pub fn two_object_instance() -> AuctionInstance {
    AuctionInstance::new(int(10), vec![(int(1), int(1)), (ratio(99, 10), int(9))]).expect("valid instance")
}

/// Searches lab-like instances (7 bidders, sizes up to 10, values 1..10) for
/// a truthful UP allocation that is strictly worse than the optimum and
/// exhibits the lowest-winner / highest-loser swap.
pub fn find_up_inefficiency_witness(budget: usize, seed: u64) -> Result<SearchOutcome<InefficiencyWitness>> {
    let sampler =
        InstanceSampler { min_bidders: 3, max_bidders: 7, max_capacity: 36, max_size: 10, min_value: 1, max_value: 10 };
    for t in 0..budget {
        let instance = sampler.sample(&mut task_rng(seed, t as u64));
        let w = inefficiency_witness_for(&instance)?;
        if w.swap_condition && w.packed_value < w.optimal_value {
            return Ok(SearchOutcome::Found { searched: t + 1, witness: w });
        }
    }
    let w = inefficiency_witness_for(&two_object_instance())?;
    if w.swap_condition && w.packed_value < w.optimal_value {
        return Ok(SearchOutcome::Found { searched: budget + 1, witness: w });
    }
    Ok(SearchOutcome::NotFound { searched: budget + 1 })
}
