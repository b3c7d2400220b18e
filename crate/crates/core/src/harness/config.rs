use std::path::PathBuf;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auction::{PaymentRule, TieMode};
use crate::error::{config, Result};
use crate::learning::{AgentConfig, Draw, EnvironmentSampler};

/// Values drawn i.i.d. uniform on the integers `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueDistribution {
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeMode {
    WithoutReplacement,
    WithReplacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeSampler {
    pub lo: i64,
    pub hi: i64,
    pub mode: SizeMode,
}

/// What to do with a draw whose sizes do not exceed the capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasible {
    /// Draw again and count it.
    #[default]
    Resample,
    /// Fail the run.
    Reject,
}

/// Redraw limit per episode under [`Infeasible::Resample`].
pub const MAX_RESAMPLES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub rule: PaymentRule,
    pub n_agents: usize,
    pub capacity: i64,
    pub values: ValueDistribution,
    pub sizes: SizeSampler,
    pub episodes: u64,
    pub tie_mode: TieMode,
    pub agent: AgentConfig,
    pub master_seed: u64,
    #[serde(default)]
    pub on_infeasible: Infeasible,
    /// Trailing share of episodes the summary covers.
    pub summary_fraction: f64,
    /// Rolling-mean window for plots; `None` picks 1,000 for runs of at
    /// least 10,000 episodes and 1 otherwise.
    pub rolling_window: Option<usize>,
    pub checkpoint_every: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents == 0 {
            return Err(config("need at least one agent"));
        }
        if self.capacity < 1 {
            return Err(config("capacity must be positive"));
        }
        let v = self.values;
        if v.lo < 0 || v.lo > v.hi {
            return Err(config(format!("bad value range {}..{}", v.lo, v.hi)));
        }
        let s = self.sizes;
        if s.lo < 1 || s.lo > s.hi {
            return Err(config(format!("bad size range {}..{}", s.lo, s.hi)));
        }
        if s.hi >= self.capacity {
            return Err(config("every size must be below the capacity"));
        }
        let cardinality = (s.hi - s.lo + 1) as usize;
        let max_total = match s.mode {
            SizeMode::WithoutReplacement => {
                if cardinality < self.n_agents {
                    return Err(config(format!(
                        "{} agents cannot draw distinct sizes from {}..{}",
                        self.n_agents, s.lo, s.hi
                    )));
                }
                (0..self.n_agents as i64).map(|j| s.hi - j).sum::<i64>()
            }
            SizeMode::WithReplacement => s.hi * self.n_agents as i64,
        };
        if max_total <= self.capacity {
            return Err(config("sizes can never exceed the capacity"));
        }
        if !(self.summary_fraction > 0.0 && self.summary_fraction <= 1.0) {
            return Err(config("summary fraction must lie in (0, 1]"));
        }
        if self.rolling_window == Some(0) {
            return Err(config("rolling window must be positive"));
        }
        if self.episodes == 0 {
            return Err(config("need at least one episode"));
        }
        let top = self.agent.action_grid.max;
        if top < crate::rational::int(v.hi as i128) {
            return Err(config("action grid does not reach the highest value"));
        }
        self.agent.validate()
    }

    pub fn window(&self) -> usize {
        self.rolling_window.unwrap_or(if self.episodes >= 10_000 { 1_000 } else { 1 })
    }

    /// First episode of the summary window.
    pub fn summary_start(&self) -> u64 {
        let len = ((self.episodes as f64) * self.summary_fraction).ceil() as u64;
        self.episodes - len.clamp(1, self.episodes)
    }
}

/// One raw draw: values first, then sizes.
fn draw_once(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> (Vec<i64>, Vec<i64>) {
    let n = cfg.n_agents;
    let values = (0..n).map(|_| rng.gen_range(cfg.values.lo..=cfg.values.hi)).collect();
    let s = cfg.sizes;
    let sizes = match s.mode {
        SizeMode::WithReplacement => (0..n).map(|_| rng.gen_range(s.lo..=s.hi)).collect(),
        SizeMode::WithoutReplacement => {
            index::sample(rng, (s.hi - s.lo + 1) as usize, n).into_iter().map(|i| s.lo + i as i64).collect()
        }
    };
    (values, sizes)
}

/// Values and sizes for every agent. Draws whose sizes do not exceed the
/// capacity are redrawn (and counted) or rejected per the config.
pub fn sample_environment(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Result<Draw> {
    let mut resamples = 0;
    loop {
        let (values, sizes) = draw_once(cfg, rng);
        if sizes.iter().sum::<i64>() > cfg.capacity {
            return Ok(Draw { values, sizes, resamples });
        }
        if cfg.on_infeasible == Infeasible::Reject {
            return Err(config("sampled sizes do not exceed the capacity"));
        }
        resamples += 1;
        if resamples >= MAX_RESAMPLES {
            return Err(config("no feasible environment after many redraws"));
        }
    }
}

impl EnvironmentSampler for SimConfig {
    fn capacity(&self) -> i64 {
        self.capacity
    }

    fn n_agents(&self) -> usize {
        self.n_agents
    }

    fn value_range(&self) -> (i64, i64) {
        (self.values.lo, self.values.hi)
    }

    fn size_range(&self) -> (i64, i64) {
        (self.sizes.lo, self.sizes.hi)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Draw> {
        sample_environment(self, rng)
    }
}
