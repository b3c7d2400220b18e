use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::explore::{epsilon_at, Exploration};
use super::qtable::{q_update, select_action, QTable, State};
use crate::auction::{run_auction, AuctionInstance, AuctionOutcome, BidProfile, PaymentRule, TieMode};
use crate::error::{config, AuctionError, Result};
use crate::metrics::RoundMetrics;
use crate::oracle::BidGrid;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub learning_rate: f64,
    pub exploration: Exploration,
    pub action_grid: BidGrid,
    /// Reward for losing; zero reproduces the game's own payoff.
    pub loser_reward: f64,
    /// Starting Q-value for every cell. Zero by default; positive values
    /// give optimistic initialisation.
    pub initial_q: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            learning_rate: 0.1,
            exploration: Exploration::default(),
            action_grid: BidGrid::integers(0, 20).expect("valid grid"),
            loser_reward: -1.0,
            initial_q: 0.0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.learning_rate) {
            return Err(config("learning rate must lie in [0, 1]"));
        }
        if !(self.loser_reward <= 0.0) {
            return Err(config("loser reward must be non-positive"));
        }
        if !self.initial_q.is_finite() {
            return Err(config("initial Q-value must be finite"));
        }
        self.exploration.validate()
    }
}

/// One environment draw: per-agent values and sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Draw {
    pub values: Vec<i64>,
    pub sizes: Vec<i64>,
    /// Rejected draws (total size not above capacity) before this one.
    pub resamples: u64,
}

/// Source of per-episode environments.
pub trait EnvironmentSampler {
    fn capacity(&self) -> i64;
    fn n_agents(&self) -> usize;
    fn value_range(&self) -> (i64, i64);
    fn size_range(&self) -> (i64, i64);
    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Draw>;
}

/// A learner: its table and its own exploration stream.
#[derive(Debug, Clone)]
pub struct Agent {
    pub id: usize,
    pub table: QTable,
    pub rng: ChaCha8Rng,
}

impl Agent {
    pub fn new(id: usize, table: QTable, rng: ChaCha8Rng) -> Self {
        Agent { id, table, rng }
    }
}

/// What one agent saw and did in an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentStep {
    pub state: State,
    pub action: usize,
    #[serde(with = "rational::json")]
    pub bid: Rational,
    pub reward: f64,
    pub winner: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub epsilon: f64,
    pub resamples: u64,
    pub capacity: i64,
    pub steps: Vec<AgentStep>,
    pub outcome: AuctionOutcome,
    pub metrics: RoundMetrics,
}

/// Per-episode context shared by every agent.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeContext {
    pub episode: u64,
    pub epsilon: f64,
    pub rule: PaymentRule,
    pub tie_mode: TieMode,
}

/// Plays one auction: draws the environment, lets every agent pick a bid from
/// its own table, settles, rewards winners with their payoff and losers with
/// the loser reward, and updates each agent's own cell.
pub fn run_episode(
    agents: &mut [Agent],
    cfg: &AgentConfig,
    sampler: &dyn EnvironmentSampler,
    ctx: EpisodeContext,
    env_rng: &mut ChaCha8Rng,
) -> Result<EpisodeRecord> {
    let draw = sampler.draw(env_rng)?;
    if draw.values.len() != agents.len() || draw.sizes.len() != agents.len() {
        return Err(config("environment draw does not match the number of agents"));
    }
    let grid = cfg.action_grid.points();
    let states: Vec<State> = draw.values.iter().zip(&draw.sizes).map(|(&value, &size)| State { value, size }).collect();
    let actions = agents
        .iter_mut()
        .zip(&states)
        .map(|(a, &s)| select_action(&a.table, s, ctx.epsilon, &mut a.rng))
        .collect::<Result<Vec<_>>>()?;
    let bids: Vec<Rational> = actions.iter().map(|&i| grid[i]).collect();

    let instance = AuctionInstance::from_integers(sampler.capacity(), &draw.sizes, &draw.values)?;
    let profile = BidProfile::new(bids.clone())?;
    let (_, outcome) = run_auction(&instance, &profile, ctx.rule, ctx.tie_mode)?;
    let metrics = RoundMetrics::compute(&instance, &profile, &outcome, ctx.tie_mode)?;

    let mut steps = Vec::with_capacity(agents.len());
    for (i, agent) in agents.iter_mut().enumerate() {
        let b = &outcome.bidders[i];
        let reward = if b.is_winner { rational::to_f64(&b.payoff) } else { cfg.loser_reward };
        q_update(&mut agent.table, states[i], actions[i], reward, cfg.learning_rate)?;
        steps.push(AgentStep { state: states[i], action: actions[i], bid: bids[i], reward, winner: b.is_winner });
    }
    Ok(EpisodeRecord {
        episode: ctx.episode,
        epsilon: ctx.epsilon,
        resamples: draw.resamples,
        capacity: sampler.capacity(),
        steps,
        outcome,
        metrics,
    })
}

/// Receives episode records and checkpoints as a simulation runs.
pub trait EpisodeSink {
    fn record(&mut self, rec: &EpisodeRecord) -> std::io::Result<()>;

    fn checkpoint(&mut self, _episode: u64, _agents: &[Agent]) -> std::io::Result<()> {
        Ok(())
    }
}

/// Discards everything.
pub struct NullSink;

impl EpisodeSink for NullSink {
    fn record(&mut self, _rec: &EpisodeRecord) -> std::io::Result<()> {
        Ok(())
    }
}

/// Keeps every record; meant for tests and short runs.
#[derive(Default)]
pub struct VecSink(pub Vec<EpisodeRecord>);

impl EpisodeSink for VecSink {
    fn record(&mut self, rec: &EpisodeRecord) -> std::io::Result<()> {
        self.0.push(rec.clone());
        Ok(())
    }
}

/// Independent random streams for one simulation.
#[derive(Debug, Clone)]
pub struct SimulationRngs {
    pub environment: ChaCha8Rng,
    pub ties: ChaCha8Rng,
    pub agents: Vec<ChaCha8Rng>,
}

#[derive(Debug, Clone)]
pub struct TrainingSetup {
    pub rule: PaymentRule,
    pub episodes: u64,
    /// `SeededRandom` draws a fresh tie-break seed per episode from the tie
    /// stream; the seed inside the variant is ignored.
    pub tie_mode: TieMode,
    pub agent: AgentConfig,
    /// Checkpoint every this many episodes (0 disables periodic ones; a
    /// final checkpoint is always written).
    pub checkpoint_every: u64,
}

#[derive(Debug, Clone)]
pub struct TrainingResult {
    pub agents: Vec<Agent>,
    pub resamples: u64,
}

/// Fresh agents with tables covering the sampler's state space.
pub fn init_agents(sampler: &dyn EnvironmentSampler, cfg: &AgentConfig, rngs: Vec<ChaCha8Rng>) -> Result<Vec<Agent>> {
    if rngs.len() != sampler.n_agents() {
        return Err(config("need one random stream per agent"));
    }
    let n_actions = cfg.action_grid.len();
    rngs.into_iter()
        .enumerate()
        .map(|(id, rng)| {
            QTable::new(sampler.value_range(), sampler.size_range(), n_actions, cfg.initial_q)
                .map(|t| Agent::new(id, t, rng))
        })
        .collect()
}

/// Sequential episode loop. Sink failures carry the episode index at which
/// they happened.
pub fn run_simulation(
    setup: &TrainingSetup,
    sampler: &dyn EnvironmentSampler,
    rngs: SimulationRngs,
    sink: &mut dyn EpisodeSink,
) -> Result<TrainingResult> {
    setup.agent.validate()?;
    let SimulationRngs { environment: mut env_rng, ties: mut tie_rng, agents: agent_rngs } = rngs;
    let mut agents = init_agents(sampler, &setup.agent, agent_rngs)?;
    let mut resamples = 0;
    let io = |episode: u64| move |source| AuctionError::EpisodeIo { episode, source };
    for episode in 0..setup.episodes {
        let tie_mode = match setup.tie_mode {
            TieMode::Deterministic => TieMode::Deterministic,
            TieMode::SeededRandom { .. } => TieMode::SeededRandom { seed: rand::RngCore::next_u64(&mut tie_rng) },
        };
        let ctx = EpisodeContext {
            episode,
            epsilon: epsilon_at(episode, setup.episodes, &setup.agent.exploration),
            rule: setup.rule,
            tie_mode,
        };
        let rec = run_episode(&mut agents, &setup.agent, sampler, ctx, &mut env_rng)?;
        resamples += rec.resamples;
        sink.record(&rec).map_err(io(episode))?;
        let done = episode + 1;
        if setup.checkpoint_every > 0 && done % setup.checkpoint_every == 0 && done < setup.episodes {
            sink.checkpoint(done, &agents).map_err(io(episode))?;
        }
    }
    sink.checkpoint(setup.episodes, &agents).map_err(io(setup.episodes))?;
    Ok(TrainingResult { agents, resamples })
}
