use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::output::{write_json_atomic, OutputFormat, RunSink, RunSummary, SCHEMA_VERSION, SUMMARY_JSON};
use super::streams::rng_streams;
use super::sweep::SweepSpec;
use crate::error::Result;
use crate::learning::{run_simulation, EpisodeSink, TrainingResult, TrainingSetup};

pub fn training_setup(cfg: &SimConfig) -> TrainingSetup {
    TrainingSetup {
        rule: cfg.rule,
        episodes: cfg.episodes,
        tie_mode: cfg.tie_mode,
        agent: cfg.agent.clone(),
        checkpoint_every: cfg.checkpoint_every,
    }
}

/// Runs `cfg` with streams derived from its master seed.
pub fn simulate(cfg: &SimConfig, sink: &mut dyn EpisodeSink) -> Result<TrainingResult> {
    cfg.validate()?;
    let rngs = rng_streams(cfg.master_seed).simulation(cfg.n_agents);
    run_simulation(&training_setup(cfg), cfg, rngs, sink)
}

/// Runs without writing files and returns the summary.
pub fn run_in_memory(cfg: &SimConfig) -> Result<RunSummary> {
    let mut sink = RunSink::in_memory(cfg);
    simulate(cfg, &mut sink)?;
    sink.finish()
}

/// Runs into `dir`: records, plot series, checkpoint and `summary.json`.
pub fn run_to_dir(cfg: &SimConfig, dir: &Path, format: OutputFormat) -> Result<RunSummary> {
    let mut sink = RunSink::create(cfg, dir, format)?;
    simulate(cfg, &mut sink)?;
    let summary = sink.finish()?;
    write_json_atomic(&dir.join(SUMMARY_JSON), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub label: String,
    pub dir: PathBuf,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepIndex {
    pub schema_version: u32,
    pub spec: SweepSpec,
    pub cells: Vec<SweepEntry>,
}

/// Runs every cell in parallel, each into `dir/<label>`, and writes
/// `dir/sweep.json`.
pub fn run_sweep(spec: &SweepSpec, dir: &Path, format: OutputFormat) -> Result<SweepIndex> {
    let cells = spec.cells()?;
    let entries = cells
        .par_iter()
        .map(|cell| {
            let sub = dir.join(&cell.label);
            run_to_dir(&cell.config, &sub, format).map(|summary| SweepEntry {
                label: cell.label.clone(),
                dir: sub,
                summary,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let index = SweepIndex { schema_version: SCHEMA_VERSION, spec: spec.clone(), cells: entries };
    write_json_atomic(&dir.join("sweep.json"), &index)?;
    Ok(index)
}
