//! Knapsack auctions with private values and public sizes.
//!
//! - [`auction`]: greedy allocation and the UP / DP / GSP / VCG payment rules.
//! - [`metrics`]: learning ratio, revenue and efficiency measures.
//! - [`oracle`]: brute-force mechanism checks and the DP equilibrium solver.
//! - [`learning`]: tabular Q-learning bidders and the episode loop.
//! - [`harness`]: configuration, presets, sweeps, reporting.

pub mod auction;
pub mod error;
pub mod harness;
pub mod learning;
pub mod metrics;
pub mod oracle;
pub mod rational;

pub use error::{AuctionError, Result};
pub use rational::Rational;
