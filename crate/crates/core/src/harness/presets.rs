use serde::{Deserialize, Serialize};

use super::config::{Infeasible, SimConfig, SizeMode, SizeSampler, ValueDistribution};
use super::sweep::SweepSpec;
use crate::auction::{PaymentRule, TieMode};
use crate::error::{config, Result};
use crate::learning::AgentConfig;

pub const PRESET_NAMES: [&str; 4] = ["lab", "ai", "cs-7", "cs-10"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preset {
    Config(SimConfig),
    Sweep(SweepSpec),
}

/// The laboratory environment: 7 bidders, capacity 36, integer values
/// 1..=10, sizes a permutation of 4..=10 (total 49), 20 rounds.
pub fn lab() -> SimConfig {
    SimConfig {
        rule: PaymentRule::UP,
        n_agents: 7,
        capacity: 36,
        values: ValueDistribution { lo: 1, hi: 10 },
        sizes: SizeSampler { lo: 4, hi: 10, mode: SizeMode::WithoutReplacement },
        episodes: 20,
        tie_mode: TieMode::Deterministic,
        agent: AgentConfig::default(),
        master_seed: 0,
        on_infeasible: Infeasible::Resample,
        summary_fraction: 0.1,
        rolling_window: None,
        checkpoint_every: 10_000,
        output: None,
    }
}

/// The lab environment played by learners for 100,000 episodes.
pub fn ai() -> SimConfig {
    SimConfig { episodes: 100_000, ..lab() }
}

fn comparative_statics(n_agents: usize, sizes: (i64, i64)) -> SweepSpec {
    SweepSpec {
        base: ai(),
        rules: PaymentRule::SIMULATED.to_vec(),
        n_agents: vec![n_agents],
        capacities: vec![30, 36, 40],
        size_ranges: vec![sizes],
        size_mode: SizeMode::WithoutReplacement,
        seeds: vec![0],
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    match name {
        "lab" => Ok(Preset::Config(lab())),
        "ai" => Ok(Preset::Config(ai())),
        "cs-7" => Ok(Preset::Sweep(comparative_statics(7, (4, 10)))),
        "cs-10" => Ok(Preset::Sweep(comparative_statics(10, (1, 10)))),
        other => Err(config(format!("unknown preset {other:?}; expected one of {}", PRESET_NAMES.join(", ")))),
    }
}
