use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use knapsack_auction::auction::{PaymentRule, TieMode};
use knapsack_auction::harness::{
    discover_runs, preset, report, run_check, run_sweep, run_to_dir, Check, OutputFormat, Preset, RunSummary,
    SimConfig, SizeMode, SweepSpec, SCHEMA_VERSION,
};
use knapsack_auction::learning::Decay;
use knapsack_auction::oracle::BidGrid;
use knapsack_auction::rational;
use knapsack_auction::AuctionError;

const OUT_ENV: &str = "KNAPSACK_AUCTION_OUT";

#[derive(Parser)]
#[command(name = "knapsack-auction", version, about = "Knapsack auction simulator, learners and theory checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train learners on one configuration and write its artifacts.
    Run(RunArgs),
    /// Run every cell of a comparative-statics preset.
    Sweep(SweepArgs),
    /// Run theory checks and print a JSON report.
    Verify(VerifyArgs),
    /// Plot rolling means and collect summaries of finished runs.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Ties {
    Deterministic,
    Random,
}

/// Overrides applied on top of a preset.
#[derive(Args)]
struct EnvArgs {
    /// Number of agents.
    #[arg(long)]
    agents: Option<usize>,
    /// Knapsack capacity.
    #[arg(long)]
    capacity: Option<i64>,
    /// Integer value range, `LO..HI`.
    #[arg(long, value_parser = parse_range)]
    values: Option<(i64, i64)>,
    /// Integer size range, `LO..HI`.
    #[arg(long, value_parser = parse_range)]
    sizes: Option<(i64, i64)>,
    /// Draw sizes with replacement (default: without).
    #[arg(long)]
    replacement: bool,
    #[arg(long)]
    episodes: Option<u64>,
    /// Learning rate.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    loser_reward: Option<f64>,
    /// Bid grid, `LO..HI` or `LO..HI:STEP` (rationals such as `1/2` allowed).
    #[arg(long, value_parser = parse_grid)]
    grid: Option<BidGrid>,
    /// Episodes of pure exploration before decay starts.
    #[arg(long)]
    pure_exploration: Option<u64>,
    /// `linear` or `exp:RATE`.
    #[arg(long, value_parser = parse_decay)]
    decay: Option<Decay>,
    /// Initial Q-value (positive for optimistic starts).
    #[arg(long, allow_hyphen_values = true)]
    initial_q: Option<f64>,
    #[arg(long, value_enum)]
    ties: Option<Ties>,
    /// Share of final episodes the summary covers.
    #[arg(long)]
    summary_fraction: Option<f64>,
    #[arg(long)]
    checkpoint_every: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    /// `lab` or `ai`.
    #[arg(long, default_value = "ai")]
    preset: String,
    /// UP, DP, GSP or VCG.
    #[arg(long)]
    rule: Option<PaymentRule>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory. Defaults to `$KNAPSACK_AUCTION_OUT/<RULE>-seed<SEED>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    env: EnvArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// `cs-7` or `cs-10`.
    #[arg(long)]
    preset: String,
    /// Comma-separated rules replacing the preset's.
    #[arg(long, value_delimiter = ',')]
    rules: Option<Vec<PaymentRule>>,
    /// Comma-separated capacities replacing the preset's.
    #[arg(long, value_delimiter = ',')]
    capacities: Option<Vec<i64>>,
    /// Comma-separated master seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Sweep directory. Defaults to `$KNAPSACK_AUCTION_OUT/<PRESET>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    env: EnvArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// up-dsic, gsp, vcg, up-inefficiency, dp-bne or all.
    #[arg(long, default_value = "all")]
    check: String,
    /// Instances (up-dsic) or search budget (counterexample checks).
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directories, or directories containing runs.
    #[arg(required = true)]
    dirs: Vec<PathBuf>,
    /// Where plots and report.json go. Defaults to the first directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rolling-mean window (default: 1,000 for long runs, else 1).
    #[arg(long)]
    window: Option<usize>,
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
    let lo = lo.trim().parse().map_err(|_| format!("bad lower bound in {s:?}"))?;
    let hi = hi.trim().parse().map_err(|_| format!("bad upper bound in {s:?}"))?;
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> Result<BidGrid, String> {
    let (range, step) = match s.split_once(':') {
        Some((r, st)) => (r, st),
        None => (s, "1"),
    };
    let (lo, hi) = range.split_once("..").ok_or_else(|| format!("expected LO..HI[:STEP], got {s:?}"))?;
    let q = |x: &str| rational::parse(x.trim()).ok_or_else(|| format!("bad number {x:?}"));
    BidGrid::new(q(lo)?, q(hi)?, q(step)?).map_err(|e| e.to_string())
}

fn parse_decay(s: &str) -> Result<Decay, String> {
    if s == "linear" {
        return Ok(Decay::Linear);
    }
    let rate = s.strip_prefix("exp:").ok_or_else(|| format!("expected linear or exp:RATE, got {s:?}"))?;
    Ok(Decay::Exponential { rate: rate.parse().map_err(|_| format!("bad rate {rate:?}"))? })
}

impl EnvArgs {
    fn apply(&self, cfg: &mut SimConfig) {
        if let Some(n) = self.agents {
            cfg.n_agents = n;
        }
        if let Some(k) = self.capacity {
            cfg.capacity = k;
        }
        if let Some((lo, hi)) = self.values {
            cfg.values.lo = lo;
            cfg.values.hi = hi;
        }
        if let Some((lo, hi)) = self.sizes {
            cfg.sizes.lo = lo;
            cfg.sizes.hi = hi;
        }
        if self.replacement {
            cfg.sizes.mode = SizeMode::WithReplacement;
        }
        if let Some(e) = self.episodes {
            cfg.episodes = e;
        }
        if let Some(a) = self.alpha {
            cfg.agent.learning_rate = a;
        }
        if let Some(r) = self.loser_reward {
            cfg.agent.loser_reward = r;
        }
        if let Some(g) = &self.grid {
            cfg.agent.action_grid = g.clone();
        }
        if let Some(p) = self.pure_exploration {
            cfg.agent.exploration.pure_exploration_episodes = p;
        }
        if let Some(d) = self.decay {
            cfg.agent.exploration.decay = d;
        }
        if let Some(q) = self.initial_q {
            cfg.agent.initial_q = q;
        }
        match self.ties {
            Some(Ties::Deterministic) => cfg.tie_mode = TieMode::Deterministic,
            Some(Ties::Random) => cfg.tie_mode = TieMode::SeededRandom { seed: 0 },
            None => {}
        }
        if let Some(f) = self.summary_fraction {
            cfg.summary_fraction = f;
        }
        if let Some(c) = self.checkpoint_every {
            cfg.checkpoint_every = c;
        }
    }
}

fn out_base() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

/// Errors that mean the invocation itself was wrong.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn config_as_usage(e: AuctionError) -> anyhow::Error {
    match e {
        AuctionError::Config(_) | AuctionError::Input(_) => usage(e.to_string()),
        other => other.into(),
    }
}

fn print_summary(label: &str, s: &RunSummary) {
    let lr = &s.agent_learning_ratios.all;
    let perf = &s.auction_performance;
    println!(
        "{label}: episodes {}..{} | learning ratio median {:.3} mean {:.3} | revenue mean {:.3} | efficiency mean {:.3} | resamples {}",
        s.window.start, s.window.end, lr.median, lr.mean, perf.revenue.mean, perf.efficiency.mean, s.resamples
    );
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = match preset(&args.preset).map_err(config_as_usage)? {
        Preset::Config(c) => c,
        Preset::Sweep(_) => {
            bail!(usage(format!("preset {} is a sweep; use `sweep --preset {}`", args.preset, args.preset)))
        }
    };
    if let Some(r) = args.rule {
        cfg.rule = r;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    args.env.apply(&mut cfg);
    cfg.validate().map_err(config_as_usage)?;
    let dir = args.out.unwrap_or_else(|| out_base().join(format!("{}-seed{}", cfg.rule, cfg.master_seed)));
    cfg.output = Some(dir.clone());
    let summary =
        run_to_dir(&cfg, &dir, args.env.format.into()).with_context(|| format!("run into {}", dir.display()))?;
    print_summary(&dir.display().to_string(), &summary);
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    let mut spec: SweepSpec = match preset(&args.preset).map_err(config_as_usage)? {
        Preset::Sweep(s) => s,
        Preset::Config(_) => {
            bail!(usage(format!("preset {} is a single run; use `run --preset {}`", args.preset, args.preset)))
        }
    };
    args.env.apply(&mut spec.base);
    if let Some(n) = args.env.agents {
        spec.n_agents = vec![n];
    }
    if let Some(k) = args.env.capacity {
        spec.capacities = vec![k];
    }
    if let Some(r) = args.env.sizes {
        spec.size_ranges = vec![r];
    }
    if args.env.replacement {
        spec.size_mode = SizeMode::WithReplacement;
    }
    if let Some(r) = args.rules {
        spec.rules = r;
    }
    if let Some(c) = args.capacities {
        spec.capacities = c;
    }
    if let Some(s) = args.seeds {
        spec.seeds = s;
    }
    spec.cells().map_err(config_as_usage)?;
    let dir = args.out.unwrap_or_else(|| out_base().join(&args.preset));
    let index = run_sweep(&spec, &dir, args.env.format.into())?;
    for cell in &index.cells {
        print_summary(&cell.label, &cell.summary);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let checks: Vec<Check> =
        if args.check == "all" { Check::ALL.to_vec() } else { vec![args.check.parse().map_err(config_as_usage)?] };
    let mut reports = Vec::new();
    for c in checks {
        let r = run_check(c, args.trials, args.seed).map_err(config_as_usage)?;
        eprintln!("{}: {}", c.as_str(), if r.passed { "pass" } else { "FAIL" });
        reports.push(r);
    }
    let all_passed = reports.iter().all(|r| r.passed);
    let doc = if reports.len() == 1 {
        serde_json::to_value(&reports[0])?
    } else {
        serde_json::json!({ "schema_version": SCHEMA_VERSION, "passed": all_passed, "checks": reports })
    };
    let text = serde_json::to_string_pretty(&doc)?;
    println!("{text}");
    if let Some(path) = args.out {
        std::fs::write(&path, text + "\n").with_context(|| format!("write {}", path.display()))?;
    }
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_report(args: ReportArgs) -> anyhow::Result<ExitCode> {
    let mut runs = Vec::new();
    for d in &args.dirs {
        let found = discover_runs(d).with_context(|| format!("scan {}", d.display()))?;
        if found.is_empty() {
            bail!(usage(format!("{} holds no finished runs", d.display())));
        }
        runs.extend(found);
    }
    let out = args.out.unwrap_or_else(|| args.dirs[0].clone());
    let rep = report(&runs, &out, args.window)?;
    println!(
        "{:<28} {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8}",
        "run", "lr med", "lr mean", "lr sd", "rev med", "rev mean", "rev sd", "eff med", "eff mean", "eff sd"
    );
    for r in &rep.runs {
        let (lr, p) = (&r.summary.agent_learning_ratios.all, &r.summary.auction_performance);
        println!(
            "{:<28} {:>8.3} {:>8.3} {:>8.3} | {:>8.3} {:>8.3} {:>8.3} | {:>8.3} {:>8.3} {:>8.3}",
            r.label,
            lr.median,
            lr.mean,
            lr.sd,
            p.revenue.median,
            p.revenue.mean,
            p.revenue.sd,
            p.efficiency.median,
            p.efficiency.mean,
            p.efficiency.sd
        );
    }
    for p in &rep.plots {
        eprintln!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_for(err: &anyhow::Error) -> ExitCode {
    if err.chain().any(|e| e.is::<Usage>()) {
        ExitCode::from(2)
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_for(&e)
        }
    }
}
