use serde::{Deserialize, Serialize};

use super::config::{SimConfig, SizeMode};
use crate::auction::PaymentRule;
use crate::error::{config, Result};

/// Cross product `rules × n_agents × capacities × size_ranges × seeds` over a
/// base config. Each seed is used as the cell's master seed, so cells that
/// differ only in rule see identical environment draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub rules: Vec<PaymentRule>,
    pub n_agents: Vec<usize>,
    pub capacities: Vec<i64>,
    pub size_ranges: Vec<(i64, i64)>,
    pub size_mode: SizeMode,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub label: String,
    pub config: SimConfig,
}

impl SweepSpec {
    pub fn len(&self) -> usize {
        self.rules.len() * self.n_agents.len() * self.capacities.len() * self.size_ranges.len() * self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every cell, validated, in a fixed order (seed outermost, rule
    /// innermost).
    pub fn cells(&self) -> Result<Vec<SweepCell>> {
        if self.is_empty() {
            return Err(config("sweep has an empty axis"));
        }
        let mut out = Vec::with_capacity(self.len());
        for &seed in &self.seeds {
            for &n in &self.n_agents {
                for &k in &self.capacities {
                    for &(lo, hi) in &self.size_ranges {
                        for &rule in &self.rules {
                            let mut cfg = self.base.clone();
                            cfg.rule = rule;
                            cfg.n_agents = n;
                            cfg.capacity = k;
                            cfg.sizes.lo = lo;
                            cfg.sizes.hi = hi;
                            cfg.sizes.mode = self.size_mode;
                            cfg.master_seed = seed;
                            cfg.output = None;
                            let label = format!("{rule}-n{n}-K{k}-s{lo}_{hi}-seed{seed}");
                            cfg.validate().map_err(|e| config(format!("cell {label}: {e}")))?;
                            out.push(SweepCell { label, config: cfg });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
