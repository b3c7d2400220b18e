use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// How ε falls after the pure-exploration phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decay {
    /// Straight line from the initial to the final ε, reached at the last
    /// episode.
    Linear,
    /// `final + (initial - final) * rate^t`, forced to the final ε at the
    /// last episode.
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exploration {
    pub pure_exploration_episodes: u64,
    pub initial_epsilon: f64,
    pub decay: Decay,
    pub final_epsilon: f64,
}

impl Default for Exploration {
    fn default() -> Self {
        Exploration { pure_exploration_episodes: 1_000, initial_epsilon: 1.0, decay: Decay::Linear, final_epsilon: 0.0 }
    }
}

impl Exploration {
    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.initial_epsilon) || !unit.contains(&self.final_epsilon) {
            return Err(config("epsilon must lie in [0, 1]"));
        }
        if self.final_epsilon > self.initial_epsilon {
            return Err(config("final epsilon exceeds initial epsilon"));
        }
        if let Decay::Exponential { rate } = self.decay {
            if !(rate > 0.0 && rate < 1.0) {
                return Err(config("exponential decay rate must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// Exploration probability at `episode` (0-based) of a `total`-episode run.
pub fn epsilon_at(episode: u64, total: u64, schedule: &Exploration) -> f64 {
    if episode < schedule.pure_exploration_episodes {
        return 1.0;
    }
    let last = total.saturating_sub(1);
    if episode >= last {
        return schedule.final_epsilon;
    }
    let t = episode - schedule.pure_exploration_episodes;
    let (hi, lo) = (schedule.initial_epsilon, schedule.final_epsilon);
    match schedule.decay {
        Decay::Linear => {
            let span = (last - schedule.pure_exploration_episodes) as f64;
            hi + (lo - hi) * (t as f64 / span)
        }
        Decay::Exponential { rate } => lo + (hi - lo) * rate.powf(t as f64),
    }
}
