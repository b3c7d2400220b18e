//! Decentralised tabular Q-learning bidders. Each episode is one auction and
//! a terminal decision: the state is the agent's `(value, size)`, the action
//! a bid from a fixed grid, the reward its payoff (or a fixed negative reward
//! for losing). There is no discounting.

mod episode;
mod explore;
mod qtable;

pub use episode::{
    init_agents, run_episode, run_simulation, Agent, AgentConfig, AgentStep, Draw, EnvironmentSampler, EpisodeContext,
    EpisodeRecord, EpisodeSink, NullSink, SimulationRngs, TrainingResult, TrainingSetup, VecSink,
};
pub use explore::{epsilon_at, Decay, Exploration};
pub use qtable::{q_update, select_action, QTable, State};
