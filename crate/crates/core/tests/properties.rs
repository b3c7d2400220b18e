use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use knapsack_auction::auction::{
    critical_price, greedy_allocate, run_auction, settle, AuctionInstance, BidProfile, PaymentRule, TieMode,
};
use knapsack_auction::harness::{lab, sample_environment};
use knapsack_auction::learning::{q_update, QTable, State};
use knapsack_auction::metrics::{revenue, summarize_window, RoundMetrics};
use knapsack_auction::rational::{int, ratio, Rational};

mod common;
use common::reference_greedy;

/// Instances with integer sizes and values whose sizes overflow capacity,
/// paired with integer bids in `0..=20`.
fn instance_and_bids() -> impl Strategy<Value = (AuctionInstance, Vec<Rational>)> {
    (2usize..=6, 2i64..=20)
        .prop_flat_map(|(n, k)| {
            let size_hi = (k - 1).min(10);
            (
                Just(k),
                prop::collection::vec(1..=size_hi, n),
                prop::collection::vec(0i64..=10, n),
                prop::collection::vec(0i64..=20, n),
            )
        })
        .prop_filter("sizes must overflow capacity", |(k, sizes, _, _)| sizes.iter().sum::<i64>() > *k)
        .prop_map(|(k, sizes, values, bids)| {
            let inst = AuctionInstance::from_integers(k, &sizes, &values).unwrap();
            (inst, bids.into_iter().map(|b| int(b as i128)).collect())
        })
}

fn metrics_for(inst: &AuctionInstance, bids: &[Rational], rule: PaymentRule) -> RoundMetrics {
    let profile = BidProfile::new(bids.to_vec()).unwrap();
    let (_, out) = run_auction(inst, &profile, rule, TieMode::Deterministic).unwrap();
    RoundMetrics::compute(inst, &profile, &out, TieMode::Deterministic).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn greedy_matches_reference((inst, bids) in instance_and_bids()) {
        let alloc = greedy_allocate(&inst, &BidProfile::new(bids.clone()).unwrap(), TieMode::Deterministic).unwrap();
        prop_assert_eq!(alloc.winners, reference_greedy(&inst, &bids));
    }

    #[test]
    fn winning_is_monotone_in_own_bid((inst, bids) in instance_and_bids(), who in 0usize..6) {
        let i = who % inst.len();
        let profile = BidProfile::new(bids).unwrap();
        let mut won = false;
        for b in 0..=20 {
            let wins = greedy_allocate(&inst, &profile.with_bid(i, int(b)), TieMode::Deterministic).unwrap().is_winner(i);
            prop_assert!(!won || wins, "bidder {} lost after winning at a lower bid", i);
            won = wins;
        }
    }

    #[test]
    fn random_ties_still_pack_a_feasible_prefix((inst, bids) in instance_and_bids(), seed in any::<u64>()) {
        let alloc = greedy_allocate(&inst, &BidProfile::new(bids).unwrap(), TieMode::SeededRandom { seed }).unwrap();
        let used: Rational = alloc.winners.iter().map(|&w| *inst.size(w)).sum();
        prop_assert!(used <= *inst.capacity());
        prop_assert_eq!(&alloc.ranked[..alloc.winners.len()], &alloc.winners[..]);
    }

    #[test]
    fn payments_are_ordered((inst, bids) in instance_and_bids()) {
        // Per winner: VCG <= UP <= GSP <= own bid; losers pay nothing.
        let profile = BidProfile::new(bids).unwrap();
        let alloc = greedy_allocate(&inst, &profile, TieMode::Deterministic).unwrap();
        let [vcg, up, gsp, dp] = [PaymentRule::VCG, PaymentRule::UP, PaymentRule::GSP, PaymentRule::DP]
            .map(|r| settle(r, &alloc, &profile, &inst));
        for id in 0..inst.len() {
            if alloc.is_winner(id) {
                prop_assert!(vcg.payment(id) <= up.payment(id));
                prop_assert!(up.payment(id) <= gsp.payment(id));
                prop_assert!(gsp.payment(id) <= dp.payment(id));
                prop_assert_eq!(dp.payment(id), profile.bid(id));
            } else {
                for o in [&vcg, &up, &gsp, &dp] {
                    prop_assert_eq!(*o.payment(id), int(0));
                }
            }
        }
    }

    #[test]
    fn revenue_and_surplus_identities((inst, bids) in instance_and_bids(), rule_ix in 0usize..4) {
        let rule = [PaymentRule::UP, PaymentRule::DP, PaymentRule::GSP, PaymentRule::VCG][rule_ix];
        let profile = BidProfile::new(bids.clone()).unwrap();
        let (alloc, out) = run_auction(&inst, &profile, rule, TieMode::Deterministic).unwrap();
        let m = metrics_for(&inst, &bids, rule);
        let by_payoff: Rational = alloc.winners.iter().map(|&w| inst.value(w) - out.payoff(w)).sum();
        prop_assert_eq!(revenue(&out), by_payoff);
        prop_assert_eq!(m.revenue, by_payoff);
        prop_assert_eq!(m.efficiency_gap, m.full_info_surplus - m.achieved_surplus);
        if m.full_info_surplus != int(0) {
            prop_assert_eq!(m.efficiency_ratio * m.full_info_surplus, int(100) * m.achieved_surplus);
        }
        prop_assert_eq!(m.exceeds_benchmark, m.achieved_surplus > m.full_info_surplus);
        for (i, r) in m.learning_ratios.iter().enumerate() {
            prop_assert_eq!(*r, (inst.value(i) - bids[i]) / inst.size(i));
        }
    }

    #[test]
    fn critical_price_separates_winning_from_losing((inst, bids) in instance_and_bids()) {
        let profile = BidProfile::new(bids).unwrap();
        let (alloc, up) = run_auction(&inst, &profile, PaymentRule::UP, TieMode::Deterministic).unwrap();
        for &w in &alloc.winners {
            let z = critical_price(&inst, &profile, w, TieMode::Deterministic).unwrap();
            let k = *inst.size(w);
            prop_assert_eq!(*up.payment(w), k * z);
            let above = profile.with_bid(w, k * (z + ratio(1, 7)));
            prop_assert!(greedy_allocate(&inst, &above, TieMode::Deterministic).unwrap().is_winner(w));
            if z > int(0) {
                let below = profile.with_bid(w, k * z * ratio(6, 7));
                prop_assert!(!greedy_allocate(&inst, &below, TieMode::Deterministic).unwrap().is_winner(w));
            }
        }
    }

    #[test]
    fn summary_ignores_round_order(
        rounds in prop::collection::vec(instance_and_bids(), 1..12),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let n = 3;
        let stream: Vec<RoundMetrics> = rounds
            .iter()
            .filter(|(inst, _)| inst.len() >= n)
            .map(|(inst, bids)| {
                // Truncate to a common agent count so rounds can be pooled.
                let sizes: Vec<i64> = (0..n).map(|i| inst.size(i).to_integer() as i64).collect();
                let values: Vec<i64> = (0..n).map(|i| inst.value(i).to_integer() as i64).collect();
                let small = AuctionInstance::from_integers(sizes.iter().sum::<i64>() - 1, &sizes, &values).unwrap();
                metrics_for(&small, &bids[..n], PaymentRule::GSP)
            })
            .collect();
        prop_assume!(!stream.is_empty());
        let mut shuffled = stream.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = summarize_window(&stream).unwrap();
        let b = summarize_window(&shuffled).unwrap();
        for (x, y) in [
            (a.revenue, b.revenue),
            (a.efficiency_ratio, b.efficiency_ratio),
            (a.learning_ratio.all, b.learning_ratio.all),
            (a.payoff.all, b.payoff.all),
        ] {
            prop_assert_eq!((x.count, x.median, x.mean, x.min, x.max), (y.count, y.median, y.mean, y.min, y.max));
            prop_assert!((x.sd - y.sd).abs() <= 1e-9 * (1.0 + x.sd));
        }
        prop_assert_eq!(a.exceeds_benchmark, b.exceeds_benchmark);
    }

    #[test]
    fn q_values_stay_within_observed_rewards(
        updates in prop::collection::vec((1i64..=10, 4i64..=10, 0usize..21, -5.0f64..15.0), 1..200),
        alpha in 0.0f64..=1.0,
    ) {
        let mut table = QTable::new((1, 10), (4, 10), 21, 0.0).unwrap();
        let lo = updates.iter().map(|u| u.3).fold(0.0, f64::min);
        let hi = updates.iter().map(|u| u.3).fold(0.0, f64::max);
        for &(value, size, a, r) in &updates {
            q_update(&mut table, State { value, size }, a, r, alpha).unwrap();
        }
        for value in 1..=10 {
            for size in 4..=10 {
                for &q in table.row(State { value, size }).unwrap() {
                    prop_assert!(q >= lo - 1e-12 && q <= hi + 1e-12);
                }
            }
        }
    }

    #[test]
    fn lab_draws_are_permutations_with_two_or_three_losers(
        seed in any::<u64>(),
        bids in prop::collection::vec(0i64..=20, 7),
    ) {
        let cfg = lab();
        let draw = sample_environment(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut sizes = draw.sizes.clone();
        sizes.sort();
        prop_assert_eq!(sizes, (4..=10).collect::<Vec<_>>());
        prop_assert!(draw.values.iter().all(|v| (1..=10).contains(v)));
        prop_assert_eq!(draw.resamples, 0);
        let inst = AuctionInstance::from_integers(cfg.capacity, &draw.sizes, &draw.values).unwrap();
        let bids: Vec<Rational> = bids.into_iter().map(|b| int(b as i128)).collect();
        let alloc = greedy_allocate(&inst, &BidProfile::new(bids).unwrap(), TieMode::Deterministic).unwrap();
        let losers = 7 - alloc.winners.len();
        prop_assert!((2..=3).contains(&losers), "{} losers", losers);
    }
}
