//! Evaluation measures: learning ratio, revenue, full-information surplus
//! `S`, achieved surplus `C`, the efficiency gap `E = S - C` and the
//! efficiency ratio `100 * C / S`, plus summary statistics.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::auction::{rank_bids, AllocationResult, AuctionInstance, AuctionOutcome, BidProfile, TieMode};
use crate::error::{domain, Result};
use crate::rational::{self, int, Rational};

/// `v/k - B/k`. Positive means shading, negative overbidding.
pub fn learning_ratio(value: &Rational, size: &Rational, bid: &Rational) -> Result<Rational> {
    if size.is_zero() {
        return Err(domain("learning ratio needs a non-zero size"));
    }
    Ok((value - bid) / size)
}

pub fn revenue(outcome: &AuctionOutcome) -> Rational {
    rational::sum(outcome.bidders.iter().filter(|b| b.is_winner).map(|b| &b.payment))
}

/// Greedy packing by value-to-size ratio with the auction's own stopping
/// rule, i.e. the allocation under truthful bids.
pub fn full_info_allocation(instance: &AuctionInstance, tie_mode: TieMode) -> AllocationResult {
    let truthful = BidProfile::truthful(instance);
    let ranked = rank_bids(&truthful, instance, tie_mode).expect("truthful profile covers instance");
    AllocationResult::pack(instance, ranked)
}

/// `S`: summed value of the full-information greedy packing.
pub fn full_info_surplus(instance: &AuctionInstance, tie_mode: TieMode) -> Rational {
    let alloc = full_info_allocation(instance, tie_mode);
    rational::sum(alloc.winners.iter().map(|&w| instance.value(w)))
}

/// Comparison benchmark: walk the value-to-size ranking and keep packing
/// any object that still fits instead of stopping at the first misfit.
pub fn skip_fill_surplus(instance: &AuctionInstance, tie_mode: TieMode) -> Rational {
    let truthful = BidProfile::truthful(instance);
    let ranked = rank_bids(&truthful, instance, tie_mode).expect("truthful profile covers instance");
    let mut used = Rational::zero();
    let mut value = Rational::zero();
    for id in ranked {
        let next = used + instance.size(id);
        if next <= *instance.capacity() {
            used = next;
            value += instance.value(id);
        }
    }
    value
}

/// Best feasible packing value by exhaustive subset search. Intended for
/// small instances; panics above 24 bidders.
pub fn optimal_surplus(instance: &AuctionInstance) -> (Rational, Vec<usize>) {
    let n = instance.len();
    assert!(n <= 24, "exhaustive packing limited to 24 bidders");
    let mut best = (Rational::zero(), Vec::new());
    for mask in 0u32..(1u32 << n) {
        let mut size = Rational::zero();
        let mut value = Rational::zero();
        for id in 0..n {
            if mask & (1 << id) != 0 {
                size += instance.size(id);
                value += instance.value(id);
            }
        }
        if size <= *instance.capacity() && value > best.0 {
            best = (value, (0..n).filter(|id| mask & (1 << id) != 0).collect());
        }
    }
    best
}

/// `C`: summed value of the auction's actual winners.
pub fn achieved_surplus(outcome: &AuctionOutcome, instance: &AuctionInstance) -> Rational {
    rational::sum(outcome.winners().map(|w| instance.value(w)))
}

/// `100 * C / S`, defined as 100 when `S = 0`.
pub fn efficiency_ratio(achieved: &Rational, full_info: &Rational) -> Rational {
    if full_info.is_zero() {
        int(100)
    } else {
        int(100) * achieved / full_info
    }
}

/// All measures for one auction round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundMetrics {
    #[serde(with = "rational::json_vec")]
    pub learning_ratios: Vec<Rational>,
    #[serde(with = "rational::json_vec")]
    pub payoffs: Vec<Rational>,
    pub winners: Vec<bool>,
    #[serde(with = "rational::json")]
    pub revenue: Rational,
    #[serde(with = "rational::json")]
    pub full_info_surplus: Rational,
    #[serde(with = "rational::json")]
    pub achieved_surplus: Rational,
    #[serde(with = "rational::json")]
    pub efficiency_gap: Rational,
    #[serde(with = "rational::json")]
    pub efficiency_ratio: Rational,
    /// `C > S`: the bids produced a better packing than the truthful greedy
    /// one. Gap and ratio are kept as computed.
    pub exceeds_benchmark: bool,
}

impl RoundMetrics {
    pub fn compute(
        instance: &AuctionInstance,
        profile: &BidProfile,
        outcome: &AuctionOutcome,
        tie_mode: TieMode,
    ) -> Result<Self> {
        let learning_ratios = instance
            .bidders()
            .iter()
            .map(|b| learning_ratio(&b.value, &b.size, profile.bid(b.id)))
            .collect::<Result<Vec<_>>>()?;
        let s = full_info_surplus(instance, tie_mode);
        let c = achieved_surplus(outcome, instance);
        Ok(RoundMetrics {
            learning_ratios,
            payoffs: outcome.bidders.iter().map(|b| b.payoff).collect(),
            winners: outcome.bidders.iter().map(|b| b.is_winner).collect(),
            revenue: revenue(outcome),
            efficiency_gap: s - c,
            efficiency_ratio: efficiency_ratio(&c, &s),
            exceeds_benchmark: c > s,
            full_info_surplus: s,
            achieved_surplus: c,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.learning_ratios.len()
    }

    pub fn mean_learning_ratio(&self) -> f64 {
        let total = rational::sum(&self.learning_ratios);
        rational::to_f64(&total) / self.learning_ratios.len() as f64
    }
}

/// Median, mean and population standard deviation (divisor `N`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub mean: f64,
    pub sd: f64,
}

fn big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Exact median; the mean of the two middle elements for even counts.
pub fn exact_median(sample: &[Rational]) -> Option<Rational> {
    if sample.is_empty() {
        return None;
    }
    let mut sorted = sample.to_vec();
    sorted.sort();
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 { sorted[mid] } else { (sorted[mid - 1] + sorted[mid]) / int(2) })
}

/// Exact mean, accumulated in arbitrary precision.
pub fn exact_mean(sample: &[Rational]) -> Option<BigRational> {
    if sample.is_empty() {
        return None;
    }
    let total = sample.iter().fold(BigRational::zero(), |acc, x| acc + big(x));
    Some(total / BigRational::from_integer(BigInt::from(sample.len())))
}

impl SummaryStats {
    pub fn from_rationals(sample: &[Rational]) -> Result<Self> {
        let median = exact_median(sample).ok_or_else(|| domain("empty sample"))?;
        let mean = exact_mean(sample).expect("non-empty").to_f64().unwrap_or(f64::NAN);
        let floats: Vec<f64> = sample.iter().map(rational::to_f64).collect();
        let min = sample.iter().min().expect("non-empty");
        let max = sample.iter().max().expect("non-empty");
        Ok(SummaryStats {
            count: sample.len(),
            min: rational::to_f64(min),
            max: rational::to_f64(max),
            median: rational::to_f64(&median),
            mean,
            sd: population_sd(&floats, mean),
        })
    }

    pub fn from_f64(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(domain("empty sample"));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 { sorted[mid] } else { (sorted[mid - 1] + sorted[mid]) / 2.0 };
        let mean = sample.iter().sum::<f64>() / sample.len() as f64;
        Ok(SummaryStats {
            count: sample.len(),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            median,
            mean,
            sd: population_sd(sample, mean),
        })
    }
}

fn population_sd(sample: &[f64], mean: f64) -> f64 {
    let ss: f64 = sample.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / sample.len() as f64).sqrt()
}

/// Statistics pooled over all agents plus each agent's own, with the agents
/// of lowest and highest mean payoff singled out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentBreakdown {
    pub all: SummaryStats,
    pub per_agent: Vec<SummaryStats>,
    pub worst_agent: usize,
    pub best_agent: usize,
    pub worst: SummaryStats,
    pub best: SummaryStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub episodes: usize,
    pub learning_ratio: AgentBreakdown,
    pub payoff: AgentBreakdown,
    pub revenue: SummaryStats,
    pub efficiency_ratio: SummaryStats,
    pub efficiency_gap: SummaryStats,
    /// Rounds where `C > S`.
    pub exceeds_benchmark: usize,
}

/// Trailing rolling means of the per-round aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingMeans {
    pub window: usize,
    pub learning_ratio: Vec<f64>,
    pub revenue: Vec<f64>,
    pub efficiency_ratio: Vec<f64>,
}

/// Trailing mean over at most `window` points; early points average what is
/// available.
pub fn rolling_mean(series: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(series.len());
    let mut acc = 0.0;
    for (i, x) in series.iter().enumerate() {
        acc += x;
        if i >= window {
            acc -= series[i - window];
        }
        out.push(acc / (i + 1).min(window) as f64);
    }
    out
}

impl RollingMeans {
    pub fn from_series(learning_ratio: &[f64], revenue: &[f64], efficiency_ratio: &[f64], window: usize) -> Self {
        RollingMeans {
            window,
            learning_ratio: rolling_mean(learning_ratio, window),
            revenue: rolling_mean(revenue, window),
            efficiency_ratio: rolling_mean(efficiency_ratio, window),
        }
    }
}

fn per_agent(stream: &[RoundMetrics], pick: impl Fn(&RoundMetrics) -> &[Rational]) -> Result<Vec<Vec<Rational>>> {
    let n = stream[0].n_agents();
    if stream.iter().any(|r| r.n_agents() != n) {
        return Err(domain("rounds disagree on the number of agents"));
    }
    Ok((0..n).map(|i| stream.iter().map(|r| pick(r)[i]).collect()).collect())
}

fn breakdown(columns: &[Vec<Rational>], worst: usize, best: usize) -> Result<AgentBreakdown> {
    let pooled: Vec<Rational> = columns.iter().flatten().copied().collect();
    let per_agent = columns.iter().map(|c| SummaryStats::from_rationals(c)).collect::<Result<Vec<_>>>()?;
    Ok(AgentBreakdown {
        all: SummaryStats::from_rationals(&pooled)?,
        worst: per_agent[worst],
        best: per_agent[best],
        per_agent,
        worst_agent: worst,
        best_agent: best,
    })
}

/// Summary statistics over a window of rounds (typically the final 10%).
pub fn summarize_window(stream: &[RoundMetrics]) -> Result<MetricsSummary> {
    if stream.is_empty() {
        return Err(domain("cannot summarize an empty stream"));
    }
    let ratios = per_agent(stream, |r| &r.learning_ratios)?;
    let payoffs = per_agent(stream, |r| &r.payoffs)?;
    let means: Vec<BigRational> = payoffs.iter().map(|c| exact_mean(c).expect("non-empty")).collect();
    // Lowest id wins ties in both directions.
    let mut worst = 0;
    let mut best = 0;
    for (i, m) in means.iter().enumerate() {
        if *m < means[worst] {
            worst = i;
        }
        if *m > means[best] {
            best = i;
        }
    }
    let col = |f: fn(&RoundMetrics) -> Rational| stream.iter().map(f).collect::<Vec<_>>();
    Ok(MetricsSummary {
        episodes: stream.len(),
        learning_ratio: breakdown(&ratios, worst, best)?,
        payoff: breakdown(&payoffs, worst, best)?,
        revenue: SummaryStats::from_rationals(&col(|r| r.revenue))?,
        efficiency_ratio: SummaryStats::from_rationals(&col(|r| r.efficiency_ratio))?,
        efficiency_gap: SummaryStats::from_rationals(&col(|r| r.efficiency_gap))?,
        exceeds_benchmark: stream.iter().filter(|r| r.exceeds_benchmark).count(),
    })
}

/// Window statistics plus rolling means over the whole stream.
pub fn summarize(stream: &[RoundMetrics], window: usize) -> Result<(MetricsSummary, RollingMeans)> {
    let stats = summarize_window(stream)?;
    let lr: Vec<f64> = stream.iter().map(RoundMetrics::mean_learning_ratio).collect();
    let rev: Vec<f64> = stream.iter().map(|r| rational::to_f64(&r.revenue)).collect();
    let eff: Vec<f64> = stream.iter().map(|r| rational::to_f64(&r.efficiency_ratio)).collect();
    Ok((stats, RollingMeans::from_series(&lr, &rev, &eff, window)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{run_auction, PaymentRule, Validation};
    use crate::rational::ratio;

    #[test]
    fn learning_ratio_examples() {
        assert_eq!(learning_ratio(&int(8), &int(4), &int(8)).unwrap(), int(0));
        assert_eq!(learning_ratio(&int(8), &int(4), &int(6)).unwrap(), ratio(1, 2));
        assert!(learning_ratio(&int(8), &int(0), &int(6)).is_err());
    }

    #[test]
    fn surplus_examples() {
        let inst = AuctionInstance::from_integers(10, &[4, 5, 6], &[9, 8, 7]).unwrap();
        assert_eq!(full_info_surplus(&inst, TieMode::Deterministic), int(17));
        let p = BidProfile::new(vec![int(8), ratio(15, 2), int(6)]).unwrap();
        let (_, o) = run_auction(&inst, &p, PaymentRule::UP, TieMode::Deterministic).unwrap();
        let m = RoundMetrics::compute(&inst, &p, &o, TieMode::Deterministic).unwrap();
        assert_eq!(m.achieved_surplus, int(17));
        assert_eq!(m.efficiency_gap, int(0));
        assert_eq!(m.efficiency_ratio, int(100));
        let (_, dp) = run_auction(&inst, &p, PaymentRule::DP, TieMode::Deterministic).unwrap();
        assert_eq!(revenue(&dp), ratio(31, 2));
    }

    #[test]
    fn single_item_and_symmetric_surplus() {
        let one = AuctionInstance::integers_with(10, &[4], &[3], Validation::Relaxed).unwrap();
        assert_eq!(full_info_surplus(&one, TieMode::Deterministic), int(3));
        // Five items of size 3 and value 2 in K=10: floor(10/3) = 3 fit.
        let sym = AuctionInstance::from_integers(10, &[3; 5], &[2; 5]).unwrap();
        assert_eq!(full_info_surplus(&sym, TieMode::Deterministic), int(6));
    }

    #[test]
    fn skip_fill_and_optimum_on_two_object_instance() {
        let inst = AuctionInstance::new(int(10), vec![(int(1), int(1)), (ratio(99, 10), int(9))]).unwrap();
        assert_eq!(full_info_surplus(&inst, TieMode::Deterministic), int(1));
        assert_eq!(skip_fill_surplus(&inst, TieMode::Deterministic), int(1));
        assert_eq!(optimal_surplus(&inst), (int(9), vec![1]));
    }

    #[test]
    fn efficiency_ratio_zero_benchmark() {
        assert_eq!(efficiency_ratio(&int(0), &int(0)), int(100));
        assert_eq!(efficiency_ratio(&int(9), &int(12)), int(75));
    }

    #[test]
    fn summary_of_small_streams() {
        let s = SummaryStats::from_rationals(&[int(1), int(2), int(3)]).unwrap();
        assert_eq!(s.median, 2.0);
        assert_eq!(s.mean, 2.0);
        assert!((s.sd - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let c = SummaryStats::from_rationals(&[ratio(7, 3); 5]).unwrap();
        assert_eq!(c.sd, 0.0);
        assert_eq!(c.median, c.mean);
        assert!(SummaryStats::from_rationals(&[]).is_err());
        assert_eq!(exact_median(&[int(1), int(4)]), Some(ratio(5, 2)));
    }

    #[test]
    fn summarize_rejects_empty_stream() {
        assert!(summarize(&[], 10).is_err());
    }

    #[test]
    fn rolling_mean_trails() {
        assert_eq!(rolling_mean(&[1.0, 2.0, 3.0, 4.0], 2), vec![1.0, 1.5, 2.5, 3.5]);
        assert_eq!(rolling_mean(&[5.0, 7.0], 1), vec![5.0, 7.0]);
    }
}
