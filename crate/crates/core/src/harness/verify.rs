//! Theory checks as one suite, for the `verify` subcommand.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::auction::PaymentRule;
use crate::error::{config, AuctionError, Result};
use crate::oracle::{
    check_bne_best_response, find_gsp_counterexample, find_up_inefficiency_witness, find_vcg_counterexample,
    inefficiency_witness_for, solve_dp_bne, two_object_instance, verify_up_dsic, BneConfig, BneEnvironment, DsicConfig,
};
use crate::rational::int;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    UpDsic,
    Gsp,
    Vcg,
    UpInefficiency,
    DpBne,
}

impl Check {
    pub const ALL: [Check; 5] = [Check::UpDsic, Check::Gsp, Check::Vcg, Check::UpInefficiency, Check::DpBne];

    pub fn as_str(self) -> &'static str {
        match self {
            Check::UpDsic => "up-dsic",
            Check::Gsp => "gsp",
            Check::Vcg => "vcg",
            Check::UpInefficiency => "up-inefficiency",
            Check::DpBne => "dp-bne",
        }
    }
}

impl FromStr for Check {
    type Err = AuctionError;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| config(format!("unknown check {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: Check,
    pub passed: bool,
    pub detail: Value,
}

/// Runs one check. `trials` is the instance count for `up-dsic` and the
/// search budget for the counterexample checks; it is ignored by `dp-bne`.
pub fn run_check(check: Check, trials: usize, seed: u64) -> Result<CheckReport> {
    let (passed, detail) = match check {
        Check::UpDsic => {
            let r = verify_up_dsic(&DsicConfig { trials, seed, ..DsicConfig::default() })?;
            (r.violations == 0, serde_json::to_value(r)?)
        }
        Check::Gsp => {
            let out = find_gsp_counterexample(trials, seed)?;
            let searched = out.searched();
            let found = out.is_found();
            let witness = out.found();
            let replays = match &witness {
                Some(w) => {
                    let (truth, dev) = w.replay(PaymentRule::GSP)?;
                    *truth.payoff(w.bidder_id) == w.truthful_payoff && *dev.payoff(w.bidder_id) == w.deviation_payoff
                }
                None => false,
            };
            (found && replays, json!({ "searched": searched, "found": found, "replays": replays, "witness": witness }))
        }
        Check::Vcg => {
            let out = find_vcg_counterexample(trials, seed)?;
            let searched = out.searched();
            let found = out.is_found();
            let witness = out.found();
            let ok = witness
                .as_ref()
                .is_some_and(|w| w.report.deviation_payoff > w.report.truthful_payoff && w.up_payoff < int(0));
            (found && ok, json!({ "searched": searched, "found": found, "witness": witness }))
        }
        Check::UpInefficiency => {
            let pair = inefficiency_witness_for(&two_object_instance())?;
            let out = find_up_inefficiency_witness(trials, seed)?;
            let searched = out.searched();
            let found = out.is_found();
            let witness = out.found();
            let ok = pair.gap() == int(8) && witness.as_ref().is_some_and(|w| w.gap() > int(0));
            (
                found && ok,
                json!({ "two_object_gap": crate::rational::format(&pair.gap()), "searched": searched, "found": found, "witness": witness }),
            )
        }
        Check::DpBne => {
            let env = BneEnvironment::first_price_pair();
            let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
            let sol = solve_dp_bne(&grid, &env, &BneConfig { seed, ..BneConfig::default() })?;
            let br = check_bne_best_response(&sol, &env, grid[1] - grid[0], 3.0, 20_000, seed.wrapping_add(1))?;
            let shaded = sol.bids[0].iter().zip(&grid).skip(1).all(|(b, v)| b < v);
            let passed = sol.converged && sol.residual < 1e-3 && shaded && br.passed;
            (
                passed,
                json!({
                    "converged": sol.converged,
                    "iterations": sol.iterations,
                    "residual": sol.residual,
                    "shaded_above_minimum": shaded,
                    "best_response_passed": br.passed,
                    "worst_excess": br.worst_excess,
                    "bids": sol.bids[0],
                    "value_grid": grid,
                }),
            )
        }
    };
    Ok(CheckReport { check, passed, detail })
}
