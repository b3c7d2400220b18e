use std::path::Path;
use std::process::{Command, Output};

use knapsack_auction::harness::{RunSummary, Series, SweepIndex, BIDDER_COLUMNS, EPISODE_COLUMNS};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knapsack-auction")).args(args).output().unwrap()
}

fn cli_ok(args: &[&str]) -> Output {
    let out = cli(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_complete_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    cli_ok(&["run", "--preset", "lab", "--rule", "DP", "--episodes", "300", "--seed", "3", "--out", path(&dir)]);

    let mut bidders = csv::Reader::from_path(dir.join("bidders.csv")).unwrap();
    assert_eq!(bidders.headers().unwrap().iter().collect::<Vec<_>>(), BIDDER_COLUMNS);
    assert_eq!(bidders.records().count(), 300 * 7);
    let mut episodes = csv::Reader::from_path(dir.join("episodes.csv")).unwrap();
    assert_eq!(episodes.headers().unwrap().iter().collect::<Vec<_>>(), EPISODE_COLUMNS);
    assert_eq!(episodes.records().count(), 300);

    let summary = RunSummary::read(&dir.join("summary.json")).unwrap();
    assert_eq!(summary.episodes, 300);
    assert_eq!(summary.resamples, 0);
    assert_eq!((summary.window.start, summary.window.end), (270, 300));
    let checkpoint: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("checkpoint.json")).unwrap()).unwrap();
    assert_eq!(checkpoint["episode"], 300);
    assert_eq!(checkpoint["agents"].as_array().unwrap().len(), 7);
    assert_eq!(Series::read_csv(&dir.join("series.csv")).unwrap().learning_ratio.len(), 300);
}

#[test]
fn json_format_and_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    cli_ok(&[
        "run",
        "--preset",
        "ai",
        "--rule",
        "GSP",
        "--episodes",
        "200",
        "--agents",
        "5",
        "--capacity",
        "20",
        "--sizes",
        "2..8",
        "--replacement",
        "--values",
        "1..6",
        "--alpha",
        "0.2",
        "--loser-reward",
        "-0.5",
        "--grid",
        "0..12:1/2",
        "--format",
        "json",
        "--out",
        path(&dir),
    ]);
    let text = std::fs::read_to_string(dir.join("episodes.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 200);
    let summary = RunSummary::read(&dir.join("summary.json")).unwrap();
    let c = &summary.config;
    assert_eq!((c.n_agents, c.capacity, c.values.lo, c.values.hi), (5, 20, 1, 6));
    assert_eq!(c.agent.learning_rate, 0.2);
    assert_eq!(c.agent.loser_reward, -0.5);
    assert_eq!(c.agent.action_grid.len(), 25);
}

#[test]
fn default_output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_knapsack-auction"))
        .args(["run", "--preset", "lab", "--rule", "UP", "--seed", "9"])
        .env("KNAPSACK_AUCTION_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("UP-seed9").join("summary.json").exists());
}

#[test]
fn usage_errors_exit_nonzero() {
    for args in [
        vec!["run", "--preset", "cs-7"],
        vec!["run", "--preset", "nope"],
        vec!["run", "--rule", "XYZ"],
        vec!["run", "--preset", "lab", "--sizes", "4..6"],
        vec!["run", "--preset", "lab", "--values", "10"],
        vec!["run", "--preset", "lab", "--alpha", "1.5"],
        vec!["sweep", "--preset", "lab"],
        vec!["verify", "--check", "nope"],
        vec!["report"],
    ] {
        let out = cli(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_up_dsic_reports_zero_violations() {
    let out = cli_ok(&["verify", "--check", "up-dsic", "--trials", "100"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["detail"]["violations"], 0);
}

#[test]
fn verify_all_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("verify.json");
    let out = cli_ok(&["verify", "--trials", "200", "--out", path(&file)]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["checks"].as_array().unwrap().len(), 5);
    assert!(file.exists());
}

#[test]
fn sweep_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("cs7");
    cli_ok(&["sweep", "--preset", "cs-7", "--episodes", "120", "--seeds", "0", "--out", path(&dir)]);
    let index: SweepIndex = serde_json::from_slice(&std::fs::read(dir.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(index.cells.len(), 9);

    let out = cli_ok(&["report", path(&dir)]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 10);
    for svg in ["learning_ratio.svg", "revenue.svg", "efficiency.svg"] {
        let text = std::fs::read_to_string(dir.join(svg)).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"), "{svg}");
    }
    assert!(dir.join("report.json").exists());

    // Each cell reproduces in isolation from its own config.
    let cell = &index.cells[4];
    let again = knapsack_auction::harness::run_in_memory(&cell.summary.config).unwrap();
    assert_eq!(again.auction_performance, cell.summary.auction_performance);
}
