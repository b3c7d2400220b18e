//! Run artifacts: per-bidder and per-episode CSV (or JSON lines), a plot
//! series, checkpoints and the final summary.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use crate::auction::PaymentRule;
use crate::error::{config, Result};
use crate::learning::{Agent, EpisodeRecord, EpisodeSink, QTable};
use crate::metrics::{summarize_window, AgentBreakdown, MetricsSummary, RoundMetrics, SummaryStats};
use crate::rational::{self, format as exact, Rational};

pub const SCHEMA_VERSION: u32 = 1;

pub const BIDDERS_CSV: &str = "bidders.csv";
pub const EPISODES_CSV: &str = "episodes.csv";
pub const EPISODES_JSONL: &str = "episodes.jsonl";
pub const SERIES_CSV: &str = "series.csv";
pub const CHECKPOINT_JSON: &str = "checkpoint.json";
pub const SUMMARY_JSON: &str = "summary.json";

pub const BIDDER_COLUMNS: [&str; 16] = [
    "episode",
    "rule",
    "bidder_id",
    "value",
    "size",
    "bid",
    "per_unit_bid",
    "winner",
    "payment",
    "payoff",
    "learning_ratio",
    "revenue",
    "S",
    "C",
    "E",
    "efficiency_ratio",
];

pub const EPISODE_COLUMNS: [&str; 12] = [
    "episode",
    "rule",
    "epsilon",
    "resamples",
    "winners",
    "revenue",
    "S",
    "C",
    "E",
    "efficiency_ratio",
    "mean_learning_ratio",
    "exceeds_benchmark",
];

pub const SERIES_COLUMNS: [&str; 4] = ["episode", "mean_learning_ratio", "revenue", "efficiency_ratio"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Msd {
    pub median: f64,
    pub mean: f64,
    pub sd: f64,
}

impl From<SummaryStats> for Msd {
    fn from(s: SummaryStats) -> Self {
        Msd { median: s.median, mean: s.mean, sd: s.sd }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentMsd {
    pub agent: usize,
    #[serde(flatten)]
    pub stats: Msd,
}

/// One row of the agent tables: all agents pooled, the agent with the
/// lowest mean payoff and the one with the highest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentTable {
    pub all: Msd,
    pub worst_agent: AgentMsd,
    pub best_agent: AgentMsd,
}

impl From<&AgentBreakdown> for AgentTable {
    fn from(b: &AgentBreakdown) -> Self {
        AgentTable {
            all: b.all.into(),
            worst_agent: AgentMsd { agent: b.worst_agent, stats: b.worst.into() },
            best_agent: AgentMsd { agent: b.best_agent, stats: b.best.into() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuctionPerformance {
    pub revenue: Msd,
    pub efficiency: Msd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryWindow {
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub rule: PaymentRule,
    pub episodes: u64,
    pub window: SummaryWindow,
    pub resamples: u64,
    pub agent_learning_ratios: AgentTable,
    pub agent_payoffs: AgentTable,
    pub auction_performance: AuctionPerformance,
    pub efficiency_gap: Msd,
    pub exceeds_benchmark: usize,
    pub details: MetricsSummary,
    pub config: SimConfig,
}

impl RunSummary {
    pub fn read(path: &Path) -> Result<Self> {
        let s: RunSummary = serde_json::from_reader(io::BufReader::new(File::open(path)?))?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(config(format!("unsupported summary schema {}", s.schema_version)));
        }
        Ok(s)
    }
}

/// Per-episode means used by plots.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    pub learning_ratio: Vec<f64>,
    pub revenue: Vec<f64>,
    pub efficiency_ratio: Vec<f64>,
}

impl Series {
    pub fn push(&mut self, m: &RoundMetrics) {
        self.learning_ratio.push(m.mean_learning_ratio());
        self.revenue.push(rational::to_f64(&m.revenue));
        self.efficiency_ratio.push(rational::to_f64(&m.efficiency_ratio));
    }

    pub fn len(&self) -> usize {
        self.revenue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.revenue.is_empty()
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut s = Series::default();
        for row in rdr.records() {
            let row = row?;
            let num = |i: usize| -> Result<f64> {
                row.get(i)
                    .and_then(|x| x.parse().ok())
                    .ok_or_else(|| config(format!("{}: bad number in column {i}", path.display())))
            };
            s.learning_ratio.push(num(1)?);
            s.revenue.push(num(2)?);
            s.efficiency_ratio.push(num(3)?);
        }
        Ok(s)
    }
}

/// Keeps the summary window's metrics and the plot series.
#[derive(Debug, Clone)]
pub struct SummaryAccumulator {
    start: u64,
    window: Vec<RoundMetrics>,
    pub series: Series,
    resamples: u64,
    episodes: u64,
}

impl SummaryAccumulator {
    pub fn new(window_start: u64) -> Self {
        SummaryAccumulator {
            start: window_start,
            window: Vec::new(),
            series: Series::default(),
            resamples: 0,
            episodes: 0,
        }
    }

    pub fn push(&mut self, rec: &EpisodeRecord) {
        if rec.episode >= self.start {
            self.window.push(rec.metrics.clone());
        }
        self.series.push(&rec.metrics);
        self.resamples += rec.resamples;
        self.episodes += 1;
    }

    pub fn window(&self) -> &[RoundMetrics] {
        &self.window
    }

    pub fn finish(&self, cfg: &SimConfig) -> Result<RunSummary> {
        let details = summarize_window(&self.window)?;
        Ok(RunSummary {
            schema_version: SCHEMA_VERSION,
            rule: cfg.rule,
            episodes: self.episodes,
            window: SummaryWindow { start: self.start, end: self.episodes },
            resamples: self.resamples,
            agent_learning_ratios: (&details.learning_ratio).into(),
            agent_payoffs: (&details.payoff).into(),
            auction_performance: AuctionPerformance {
                revenue: details.revenue.into(),
                efficiency: details.efficiency_ratio.into(),
            },
            efficiency_gap: details.efficiency_gap.into(),
            exceeds_benchmark: details.exceeds_benchmark,
            details,
            config: cfg.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub id: usize,
    pub table: QTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    /// Episodes completed.
    pub episode: u64,
    pub config: SimConfig,
    pub agents: Vec<AgentCheckpoint>,
}

impl Checkpoint {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(io::BufReader::new(File::open(path)?))?)
    }
}

/// Serialises `value` to `path` through a temporary file and a rename.
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
    }
    fs::rename(tmp, path)
}

fn bool01(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn mean_exact(xs: &[Rational]) -> Rational {
    rational::sum(xs) / Rational::from_integer(xs.len() as i128)
}

enum Records {
    Csv { bidders: csv::Writer<BufWriter<File>>, episodes: csv::Writer<BufWriter<File>> },
    Json(BufWriter<File>),
}

/// Sink that writes a run directory and accumulates the summary.
pub struct RunSink {
    records: Option<Records>,
    series: Option<csv::Writer<BufWriter<File>>>,
    checkpoint: Option<PathBuf>,
    cfg: SimConfig,
    pub summary: SummaryAccumulator,
}

impl RunSink {
    /// Summary only; nothing touches the file system.
    pub fn in_memory(cfg: &SimConfig) -> Self {
        RunSink {
            records: None,
            series: None,
            checkpoint: None,
            cfg: cfg.clone(),
            summary: SummaryAccumulator::new(cfg.summary_start()),
        }
    }

    pub fn create(cfg: &SimConfig, dir: &Path, format: OutputFormat) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let records = match format {
            OutputFormat::Csv => {
                let mut bidders = csv::Writer::from_writer(BufWriter::new(File::create(dir.join(BIDDERS_CSV))?));
                bidders.write_record(BIDDER_COLUMNS)?;
                let mut episodes = csv::Writer::from_writer(BufWriter::new(File::create(dir.join(EPISODES_CSV))?));
                episodes.write_record(EPISODE_COLUMNS)?;
                Records::Csv { bidders, episodes }
            }
            OutputFormat::Json => Records::Json(BufWriter::new(File::create(dir.join(EPISODES_JSONL))?)),
        };
        let mut series = csv::Writer::from_writer(BufWriter::new(File::create(dir.join(SERIES_CSV))?));
        series.write_record(SERIES_COLUMNS)?;
        Ok(RunSink {
            records: Some(records),
            series: Some(series),
            checkpoint: Some(dir.join(CHECKPOINT_JSON)),
            cfg: cfg.clone(),
            summary: SummaryAccumulator::new(cfg.summary_start()),
        })
    }

    pub fn finish(mut self) -> Result<RunSummary> {
        match self.records.take() {
            Some(Records::Csv { mut bidders, mut episodes }) => {
                bidders.flush()?;
                episodes.flush()?;
            }
            Some(Records::Json(mut w)) => w.flush()?,
            None => {}
        }
        if let Some(mut s) = self.series.take() {
            s.flush()?;
        }
        self.summary.finish(&self.cfg)
    }
}

fn csv_io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

impl EpisodeSink for RunSink {
    fn record(&mut self, rec: &EpisodeRecord) -> io::Result<()> {
        self.summary.push(rec);
        let m = &rec.metrics;
        let rule = rec.outcome.rule.as_str();
        let ep = rec.episode.to_string();
        match &mut self.records {
            Some(Records::Csv { bidders, episodes }) => {
                let (rev, s, c, e, eff) = (
                    exact(&m.revenue),
                    exact(&m.full_info_surplus),
                    exact(&m.achieved_surplus),
                    exact(&m.efficiency_gap),
                    exact(&m.efficiency_ratio),
                );
                for (i, step) in rec.steps.iter().enumerate() {
                    let size = Rational::from_integer(step.state.size as i128);
                    let b = &rec.outcome.bidders[i];
                    bidders
                        .write_record([
                            ep.as_str(),
                            rule,
                            &i.to_string(),
                            &step.state.value.to_string(),
                            &step.state.size.to_string(),
                            &exact(&step.bid),
                            &exact(&(step.bid / size)),
                            bool01(b.is_winner),
                            &exact(&b.payment),
                            &exact(&b.payoff),
                            &exact(&m.learning_ratios[i]),
                            &rev,
                            &s,
                            &c,
                            &e,
                            &eff,
                        ])
                        .map_err(csv_io)?;
                }
                episodes
                    .write_record([
                        ep.as_str(),
                        rule,
                        &rec.epsilon.to_string(),
                        &rec.resamples.to_string(),
                        &m.winners.iter().filter(|&&w| w).count().to_string(),
                        &rev,
                        &s,
                        &c,
                        &e,
                        &eff,
                        &exact(&mean_exact(&m.learning_ratios)),
                        bool01(m.exceeds_benchmark),
                    ])
                    .map_err(csv_io)?;
            }
            Some(Records::Json(w)) => {
                serde_json::to_writer(&mut *w, rec)?;
                w.write_all(b"\n")?;
            }
            None => {}
        }
        if let Some(s) = &mut self.series {
            let i = self.summary.series.len() - 1;
            let ser = &self.summary.series;
            s.write_record([
                ep,
                ser.learning_ratio[i].to_string(),
                ser.revenue[i].to_string(),
                ser.efficiency_ratio[i].to_string(),
            ])
            .map_err(csv_io)?;
        }
        Ok(())
    }

    fn checkpoint(&mut self, episode: u64, agents: &[Agent]) -> io::Result<()> {
        let Some(path) = &self.checkpoint else { return Ok(()) };
        let cp = Checkpoint {
            schema_version: SCHEMA_VERSION,
            episode,
            config: self.cfg.clone(),
            agents: agents.iter().map(|a| AgentCheckpoint { id: a.id, table: a.table.clone() }).collect(),
        };
        write_json_atomic(path, &cp)
    }
}
