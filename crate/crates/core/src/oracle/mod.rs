//! Brute-force checks of the mechanism's incentive properties and the
//! numerical equilibrium solver for the discriminatory-price auction.

mod bne;
mod dsic;
mod psi;
mod search;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::auction::AuctionInstance;
use crate::error::{config, Result};
use crate::rational::{self, int, Rational};

pub use bne::{check_bne_best_response, solve_dp_bne, BneConfig, BneSolution, BneUpdate, BrCheck, BrCheckReport};
pub use dsic::{
    best_response, payoff_for_bid, verify_dsic, verify_up_dsic, BestResponse, DeviationReport, DsicConfig, PaymentFn,
    VerifyReport,
};
pub use psi::{estimate_psi, psi_by_subsets, BneEnvironment, OpponentDraws, PsiEstimate, PsiEvaluator};
pub use search::{
    find_gsp_counterexample, find_underbid_counterexample, find_up_inefficiency_witness, find_vcg_counterexample,
    inefficiency_witness_for, two_object_instance, InefficiencyWitness, SearchOutcome, VcgCounterexample,
};

/// Finite enumeration of candidate total bids `min, min + step, ..., <= max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BidGrid {
    #[serde(with = "rational::json")]
    pub min: Rational,
    #[serde(with = "rational::json")]
    pub max: Rational,
    #[serde(with = "rational::json")]
    pub step: Rational,
}

impl BidGrid {
    pub fn new(min: Rational, max: Rational, step: Rational) -> Result<Self> {
        if step <= int(0) {
            return Err(config("bid grid step must be positive"));
        }
        if min > max {
            return Err(config("bid grid min exceeds max"));
        }
        if min < int(0) {
            return Err(config("bids are non-negative"));
        }
        Ok(BidGrid { min, max, step })
    }

    /// Integer bids `lo..=hi`.
    pub fn integers(lo: i64, hi: i64) -> Result<Self> {
        Self::new(int(lo as i128), int(hi as i128), int(1))
    }

    pub fn points(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut x = self.min;
        while x <= self.max {
            out.push(x);
            x += self.step;
        }
        out
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step).floor().to_integer() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: &Rational) -> bool {
        *x >= self.min && *x <= self.max && ((x - self.min) / self.step).is_integer()
    }

    /// Grid points plus `extra` if it is not already on the grid.
    pub fn points_with(&self, extra: &Rational) -> Vec<Rational> {
        let mut pts = self.points();
        if !self.contains(extra) {
            let at = pts.partition_point(|p| p < extra);
            pts.insert(at, *extra);
        }
        pts
    }
}

/// Random integer instances satisfying the strict instance invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSampler {
    pub min_bidders: usize,
    pub max_bidders: usize,
    pub max_capacity: i64,
    pub max_size: i64,
    pub min_value: i64,
    pub max_value: i64,
}

impl Default for InstanceSampler {
    /// `n <= 5`, `K <= 20`, sizes and values at most 10.
    fn default() -> Self {
        InstanceSampler { min_bidders: 2, max_bidders: 5, max_capacity: 20, max_size: 10, min_value: 0, max_value: 10 }
    }
}

impl InstanceSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AuctionInstance {
        loop {
            let n = rng.gen_range(self.min_bidders..=self.max_bidders);
            let capacity = rng.gen_range(2..=self.max_capacity);
            let size_hi = self.max_size.min(capacity - 1);
            let sizes: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=size_hi)).collect();
            if sizes.iter().sum::<i64>() <= capacity {
                continue;
            }
            let values: Vec<i64> = (0..n).map(|_| rng.gen_range(self.min_value..=self.max_value)).collect();
            return AuctionInstance::from_integers(capacity, &sizes, &values)
                .expect("sampled instance satisfies invariants");
        }
    }
}

/// Per-task RNG: the master seed selects the key, the task index the stream.
pub(crate) fn task_rng(seed: u64, task: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn grid_points() {
        let g = BidGrid::new(int(0), int(2), ratio(1, 2)).unwrap();
        assert_eq!(g.points(), vec![int(0), ratio(1, 2), int(1), ratio(3, 2), int(2)]);
        assert_eq!(g.len(), 5);
        assert!(g.contains(&ratio(3, 2)));
        assert!(!g.contains(&ratio(1, 3)));
        assert_eq!(g.points_with(&ratio(1, 3))[1], ratio(1, 3));
        assert!(BidGrid::new(int(0), int(2), int(0)).is_err());
        assert_eq!(BidGrid::integers(0, 20).unwrap().len(), 21);
    }

    #[test]
    fn sampler_respects_bounds() {
        let s = InstanceSampler::default();
        let mut rng = task_rng(1, 0);
        for _ in 0..500 {
            let inst = s.sample(&mut rng);
            assert!(inst.len() >= 2 && inst.len() <= 5);
            assert!(*inst.capacity() <= int(20));
            assert!(inst.total_size() > *inst.capacity());
            assert!(inst.bidders().iter().all(|b| b.size <= int(10) && b.value <= int(10)));
        }
    }
}
