//! Configuration, presets, seeded streams, sweeps and reporting around the
//! learning loop.

mod config;
mod output;
mod presets;
mod report;
mod run;
mod streams;
mod sweep;
mod verify;

pub use config::{sample_environment, Infeasible, SimConfig, SizeMode, SizeSampler, ValueDistribution, MAX_RESAMPLES};
pub use output::{
    write_json_atomic, AgentCheckpoint, AgentMsd, AgentTable, AuctionPerformance, Checkpoint, Msd, OutputFormat,
    RunSink, RunSummary, Series, SummaryAccumulator, SummaryWindow, BIDDERS_CSV, BIDDER_COLUMNS, CHECKPOINT_JSON,
    EPISODES_CSV, EPISODES_JSONL, EPISODE_COLUMNS, SCHEMA_VERSION, SERIES_COLUMNS, SERIES_CSV, SUMMARY_JSON,
};
pub use presets::{ai, lab, preset, Preset, PRESET_NAMES};
pub use report::{discover_runs, line_chart_svg, report, Line, Report, ReportRun};
pub use run::{run_in_memory, run_sweep, run_to_dir, simulate, training_setup, SweepEntry, SweepIndex};
pub use streams::{agent_label, label_hash, rng_streams, RngStreams, ENVIRONMENT, TIES};
pub use sweep::{SweepCell, SweepSpec};
pub use verify::{run_check, Check, CheckReport};
