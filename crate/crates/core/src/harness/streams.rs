//! Named random streams derived from one master seed.
//!
//! Every stream is ChaCha8 keyed by `seed_from_u64(master)`; the label picks
//! the 64-bit stream id as the FNV-1a hash of its UTF-8 bytes. Streams with
//! different labels never overlap, and drawing from one leaves the others
//! untouched.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::learning::SimulationRngs;

pub const ENVIRONMENT: &str = "environment";
pub const TIES: &str = "ties";

pub fn agent_label(id: usize) -> String {
    format!("agent/{id}")
}

/// 64-bit FNV-1a.
pub fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStreams {
    pub master_seed: u64,
}

pub fn rng_streams(master_seed: u64) -> RngStreams {
    RngStreams { master_seed }
}

impl RngStreams {
    pub fn stream(&self, label: &str) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(label_hash(label));
        rng
    }

    /// A derived seed, e.g. for a sub-simulation.
    pub fn derive_seed(&self, label: &str) -> u64 {
        self.stream(label).next_u64()
    }

    pub fn simulation(&self, n_agents: usize) -> SimulationRngs {
        SimulationRngs {
            environment: self.stream(ENVIRONMENT),
            ties: self.stream(TIES),
            agents: (0..n_agents).map(|i| self.stream(&agent_label(i))).collect(),
        }
    }
}
