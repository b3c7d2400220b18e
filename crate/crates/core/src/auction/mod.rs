//! Knapsack auction engine: bid ranking, stop-at-first-misfit greedy
//! allocation and the UP / DP / GSP / VCG payment rules. Everything is exact
//! rational arithmetic and pure.

mod greedy;
mod instance;
mod payments;

pub use greedy::{cmp_per_unit, greedy_allocate, greedy_or_top_bidder, rank_bids, AllocationResult, TieMode};
pub use instance::{AuctionInstance, BidProfile, Bidder, Validation};
pub use payments::{
    critical_price, dp_payments, gsp_payments, payoffs, run_auction, settle, up_payments, vcg_payments, AuctionOutcome,
    BidderOutcome, PaymentRule,
};
