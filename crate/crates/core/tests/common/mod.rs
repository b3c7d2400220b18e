//! Shared reference implementations for the integration tests.

use knapsack_auction::auction::AuctionInstance;
use knapsack_auction::rational::{int, Rational};

/// Straight-line greedy: repeatedly take the best remaining per-unit bid
/// (ties: smaller size, then lower id) and stop at the first misfit.
pub fn reference_greedy(inst: &AuctionInstance, bids: &[Rational]) -> Vec<usize> {
    let mut left: Vec<usize> = (0..inst.len()).collect();
    let mut used = int(0);
    let mut winners = Vec::new();
    while !left.is_empty() {
        let mut best = 0;
        for j in 1..left.len() {
            let (a, b) = (left[j], left[best]);
            let ra = bids[a] / inst.size(a);
            let rb = bids[b] / inst.size(b);
            if ra > rb || (ra == rb && (inst.size(a) < inst.size(b) || (inst.size(a) == inst.size(b) && a < b))) {
                best = j;
            }
        }
        let id = left.remove(best);
        if used + inst.size(id) > *inst.capacity() {
            break;
        }
        used += inst.size(id);
        winners.push(id);
    }
    winners
}
