//! Monte-Carlo packing probability `ψ(B, k)`: the chance that an object of
//! size `k` bidding `B` is packed when every opponent follows a symmetric
//! bid function.
//!
//! Opponent draws are generated once and reused for every probe, so
//! estimates at different bids share random numbers. On fixed draws a higher
//! bid never loses rank, which makes the estimate exactly non-decreasing in
//! `B`. Ties between the probe and an opponent go to the opponent.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::task_rng;
use crate::error::{config, Result};

/// Symmetric environment: `n_bidders` bidders with values uniform on
/// `[value_lo, value_hi]` and sizes uniform over `sizes` (with replacement).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BneEnvironment {
    pub n_bidders: usize,
    pub capacity: f64,
    pub value_lo: f64,
    pub value_hi: f64,
    pub sizes: Vec<f64>,
}

impl BneEnvironment {
    pub fn validate(&self) -> Result<()> {
        if self.n_bidders == 0 {
            return Err(config("environment needs at least one bidder"));
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&k| k <= 0.0 || k >= self.capacity) {
            return Err(config("sizes must be positive and below capacity"));
        }
        if !(self.value_lo <= self.value_hi) {
            return Err(config("value range is empty"));
        }
        Ok(())
    }

    /// Two bidders, unit sizes, capacity 1.5 and values uniform on `[0, 1]`:
    /// only one object fits, so the discriminatory auction is a first-price
    /// auction.
    pub fn first_price_pair() -> Self {
        BneEnvironment { n_bidders: 2, capacity: 1.5, value_lo: 0.0, value_hi: 1.0, sizes: vec![1.0] }
    }
}

/// One opponent: value quantile `u` in `[0, 1)` and an index into the
/// environment's size support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpponentDraw {
    pub quantile: f64,
    pub size_index: usize,
}

/// Fixed opponent draws shared by every probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpponentDraws {
    pub samples: Vec<Vec<OpponentDraw>>,
}

impl OpponentDraws {
    /// Value quantiles are stratified per opponent slot (a shuffled,
    /// jittered lattice `(j + U) / n`), which keeps draws uniform while
    /// cutting the variance of `ψ`. Sizes are drawn independently.
    pub fn generate(env: &BneEnvironment, n_samples: usize, seed: u64) -> Self {
        let mut rng = task_rng(seed, 0x5051);
        let slots = env.n_bidders.saturating_sub(1);
        let columns: Vec<Vec<f64>> = (0..slots)
            .map(|_| {
                let mut strata: Vec<usize> = (0..n_samples).collect();
                strata.shuffle(&mut rng);
                strata.into_iter().map(|j| (j as f64 + rng.gen::<f64>()) / n_samples as f64).collect()
            })
            .collect();
        let samples = (0..n_samples)
            .map(|i| {
                columns
                    .iter()
                    .map(|col| OpponentDraw { quantile: col[i], size_index: rng.gen_range(0..env.sizes.len()) })
                    .collect()
            })
            .collect();
        OpponentDraws { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub(crate) fn value_of(env: &BneEnvironment, quantile: f64) -> f64 {
    env.value_lo + quantile * (env.value_hi - env.value_lo)
}

/// Per-draw opponents ranked by per-unit bid with prefix size sums.
struct RankedDraw {
    /// Descending per-unit bids.
    per_unit: Vec<f64>,
    /// `prefix[j]` = total size of the `j` best opponents.
    prefix: Vec<f64>,
}

/// ψ evaluator for a fixed opponent strategy on fixed draws.
pub struct PsiEvaluator {
    capacity: f64,
    draws: Vec<RankedDraw>,
}

impl PsiEvaluator {
    pub fn new(env: &BneEnvironment, draws: &OpponentDraws, strategy: impl Fn(f64, usize) -> f64) -> Self {
        let draws = draws
            .samples
            .iter()
            .map(|opps| {
                let mut ranked: Vec<(f64, f64)> = opps
                    .iter()
                    .map(|d| {
                        let size = env.sizes[d.size_index];
                        let bid = strategy(value_of(env, d.quantile), d.size_index);
                        (bid / size, size)
                    })
                    .collect();
                ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
                let mut prefix = Vec::with_capacity(ranked.len() + 1);
                prefix.push(0.0);
                for (_, k) in &ranked {
                    prefix.push(prefix.last().copied().unwrap_or(0.0) + k);
                }
                RankedDraw { per_unit: ranked.into_iter().map(|r| r.0).collect(), prefix }
            })
            .collect();
        PsiEvaluator { capacity: env.capacity, draws }
    }

    /// Number of draws in which the probe is packed.
    pub fn packed_count(&self, bid: f64, size: f64) -> usize {
        let probe = bid / size;
        self.draws
            .iter()
            .filter(|d| {
                // Opponents at or above the probe's per-unit bid go first;
                // greedy reaches the probe only if all of them fit, which the
                // prefix test implies.
                let ahead = d.per_unit.partition_point(|&p| p >= probe);
                d.prefix[ahead] + size <= self.capacity
            })
            .count()
    }

    pub fn psi(&self, bid: f64, size: f64) -> f64 {
        if self.draws.is_empty() {
            return 0.0;
        }
        self.packed_count(bid, size) as f64 / self.draws.len() as f64
    }

    pub fn samples(&self) -> usize {
        self.draws.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiEstimate {
    pub bid: f64,
    pub size: f64,
    pub psi: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub(crate) fn binomial_se(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Monte-Carlo `ψ(B, k)` with opponents bidding `strategy(value, size_index)`.
pub fn estimate_psi(
    bid: f64,
    size: f64,
    strategy: impl Fn(f64, usize) -> f64,
    env: &BneEnvironment,
    n_samples: usize,
    seed: u64,
) -> Result<PsiEstimate> {
    env.validate()?;
    if n_samples == 0 {
        return Err(config("need at least one sample"));
    }
    let draws = OpponentDraws::generate(env, n_samples, seed);
    let eval = PsiEvaluator::new(env, &draws, strategy);
    let psi = eval.psi(bid, size);
    Ok(PsiEstimate { bid, size, psi, std_error: binomial_se(psi, n_samples), samples: n_samples })
}

/// Cross-check for small opponent counts (at most 8): for each draw,
/// enumerates every subset `S` of opponents and counts the draw as packed
/// when `S` is exactly the set ranked ahead of the probe and `S` plus the
/// probe fits.
pub fn psi_by_subsets(
    env: &BneEnvironment,
    draws: &OpponentDraws,
    strategy: impl Fn(f64, usize) -> f64,
    bid: f64,
    size: f64,
) -> Result<f64> {
    let m = env.n_bidders.saturating_sub(1);
    if m > 8 {
        return Err(config("subset enumeration limited to 8 opponents"));
    }
    let probe = bid / size;
    let mut packed = 0usize;
    for opps in &draws.samples {
        let rates: Vec<(f64, f64)> = opps
            .iter()
            .map(|d| {
                let k = env.sizes[d.size_index];
                (strategy(value_of(env, d.quantile), d.size_index) / k, k)
            })
            .collect();
        for mask in 0u32..(1 << m) {
            let in_s = |j: usize| mask & (1 << j) != 0;
            let exact_front = (0..m).all(|j| (rates[j].0 >= probe) == in_s(j));
            if !exact_front {
                continue;
            }
            let load: f64 = (0..m).filter(|&j| in_s(j)).map(|j| rates[j].1).sum();
            if load + size <= env.capacity {
                packed += 1;
            }
        }
    }
    Ok(packed as f64 / draws.samples.len().max(1) as f64)
}
