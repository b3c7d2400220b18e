use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{task_rng, BidGrid, InstanceSampler};
use crate::auction::{
    greedy_allocate, settle, up_payments, AllocationResult, AuctionInstance, AuctionOutcome, BidProfile, PaymentRule,
    TieMode,
};
use crate::error::{input, Result};
use crate::rational::{self, Rational};

/// A payment rule as a plain function of the allocation, so deliberately
/// broken rules can be run through the same checks.
pub type PaymentFn = dyn Fn(&AllocationResult, &BidProfile, &AuctionInstance) -> AuctionOutcome + Sync;

/// Payoff of `bidder` when it bids `bid` and everyone else keeps `bids`.
pub fn payoff_for_bid(
    instance: &AuctionInstance,
    bids: &BidProfile,
    bidder: usize,
    bid: Rational,
    payments: &PaymentFn,
    tie_mode: TieMode,
) -> Result<(bool, Rational)> {
    let profile = bids.with_bid(bidder, bid);
    let alloc = greedy_allocate(instance, &profile, tie_mode)?;
    let outcome = payments(&alloc, &profile, instance);
    let b = &outcome.bidders[bidder];
    Ok((b.is_winner, b.payoff))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestResponse {
    /// Every grid bid attaining the maximum, ascending.
    #[serde(with = "rational::json_vec")]
    pub bids: Vec<Rational>,
    #[serde(with = "rational::json")]
    pub payoff: Rational,
}

/// Exhaustive best response of `bidder_id` over `grid`, opponents fixed.
pub fn best_response(
    instance: &AuctionInstance,
    bids: &BidProfile,
    bidder_id: usize,
    grid: &BidGrid,
    rule: PaymentRule,
    tie_mode: TieMode,
) -> Result<BestResponse> {
    if bidder_id >= instance.len() {
        return Err(input(format!("bidder {bidder_id} out of range")));
    }
    let pay = move |a: &AllocationResult, p: &BidProfile, i: &AuctionInstance| settle(rule, a, p, i);
    let mut best: Option<BestResponse> = None;
    for bid in grid.points() {
        let (_, payoff) = payoff_for_bid(instance, bids, bidder_id, bid, &pay, tie_mode)?;
        match &mut best {
            Some(b) if payoff < b.payoff => {}
            Some(b) if payoff == b.payoff => b.bids.push(bid),
            _ => best = Some(BestResponse { bids: vec![bid], payoff }),
        }
    }
    best.ok_or_else(|| input("empty bid grid"))
}

/// A profitable deviation from truthful bidding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub rule: String,
    pub instance: AuctionInstance,
    /// Full profile; the deviator's own entry holds its truthful bid.
    pub bids: BidProfile,
    pub bidder_id: usize,
    pub tie_mode: TieMode,
    #[serde(with = "rational::json")]
    pub truthful_bid: Rational,
    #[serde(with = "rational::json")]
    pub truthful_payoff: Rational,
    #[serde(with = "rational::json")]
    pub deviating_bid: Rational,
    #[serde(with = "rational::json")]
    pub deviation_payoff: Rational,
}

impl DeviationReport {
    /// Re-runs both bids through the named rule and returns
    /// `(truthful outcome, deviation outcome)`.
    pub fn replay(&self, rule: PaymentRule) -> Result<(AuctionOutcome, AuctionOutcome)> {
        let run = |bid: Rational| -> Result<AuctionOutcome> {
            let profile = self.bids.with_bid(self.bidder_id, bid);
            let alloc = greedy_allocate(&self.instance, &profile, self.tie_mode)?;
            Ok(settle(rule, &alloc, &profile, &self.instance))
        };
        Ok((run(self.truthful_bid)?, run(self.deviating_bid)?))
    }
}

/// Best strictly profitable deviation for `bidder` over the grid, if any.
pub(crate) fn profitable_deviation(
    label: &str,
    instance: &AuctionInstance,
    bids: &BidProfile,
    bidder: usize,
    grid: &[Rational],
    payments: &PaymentFn,
    tie_mode: TieMode,
) -> Result<Option<DeviationReport>> {
    let truthful = *instance.value(bidder);
    let bids = bids.with_bid(bidder, truthful);
    let (_, base) = payoff_for_bid(instance, &bids, bidder, truthful, payments, tie_mode)?;
    let mut best: Option<(Rational, Rational)> = None;
    for &bid in grid {
        if bid == truthful {
            continue;
        }
        let (_, payoff) = payoff_for_bid(instance, &bids, bidder, bid, payments, tie_mode)?;
        if payoff > base && best.is_none_or(|(_, p)| payoff > p) {
            best = Some((bid, payoff));
        }
    }
    Ok(best.map(|(deviating_bid, deviation_payoff)| DeviationReport {
        rule: label.to_string(),
        instance: instance.clone(),
        bids: bids.clone(),
        bidder_id: bidder,
        tie_mode,
        truthful_bid: truthful,
        truthful_payoff: base,
        deviating_bid,
        deviation_payoff,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DsicConfig {
    pub trials: usize,
    pub opponent_profiles: usize,
    pub sampler: InstanceSampler,
    pub grid: BidGrid,
    pub seed: u64,
    pub tie_mode: TieMode,
}

impl Default for DsicConfig {
    fn default() -> Self {
        DsicConfig {
            trials: 1000,
            opponent_profiles: 20,
            sampler: InstanceSampler::default(),
            grid: BidGrid::integers(0, 20).expect("valid grid"),
            seed: 0,
            tie_mode: TieMode::Deterministic,
        }
    }
}

/// JSON report emitted by the `verify` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub check: String,
    pub trials: usize,
    pub profiles_checked: usize,
    /// `(instance, opponent profile, bidder)` triples with a strictly
    /// profitable deviation.
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_counterexample: Option<DeviationReport>,
    pub residuals: Vec<f64>,
}

/// For each sampled instance and random opponent profile, checks that no
/// grid bid strictly beats truthful bidding for any bidder.
pub fn verify_dsic(label: &str, payments: &PaymentFn, cfg: &DsicConfig) -> Result<VerifyReport> {
    let grid = cfg.grid.points();
    if grid.is_empty() {
        return Err(input("empty bid grid"));
    }
    let per_trial: Vec<(usize, usize, Option<DeviationReport>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<_> {
            let mut rng = task_rng(cfg.seed, t as u64);
            let instance = cfg.sampler.sample(&mut rng);
            let mut checked = 0;
            let mut violations = 0;
            let mut first = None;
            for _ in 0..cfg.opponent_profiles {
                let raw: Vec<Rational> =
                    (0..instance.len()).map(|_| *grid.choose(&mut rng).expect("non-empty")).collect();
                let bids = BidProfile::new(raw)?;
                for bidder in 0..instance.len() {
                    checked += 1;
                    let pts = cfg.grid.points_with(instance.value(bidder));
                    if let Some(r) =
                        profitable_deviation(label, &instance, &bids, bidder, &pts, payments, cfg.tie_mode)?
                    {
                        violations += 1;
                        first.get_or_insert(r);
                    }
                }
            }
            Ok((checked, violations, first))
        })
        .collect::<Result<_>>()?;
    let mut report = VerifyReport {
        check: label.to_string(),
        trials: cfg.trials,
        profiles_checked: 0,
        violations: 0,
        first_counterexample: None,
        residuals: Vec::new(),
    };
    for (checked, violations, first) in per_trial {
        report.profiles_checked += checked;
        report.violations += violations;
        if report.first_counterexample.is_none() {
            report.first_counterexample = first;
        }
    }
    Ok(report)
}

pub fn verify_up_dsic(cfg: &DsicConfig) -> Result<VerifyReport> {
    verify_dsic("up-dsic", &up_payments, cfg)
}
