use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use memetrace::analytics::{compute_returns, prevalence, read_returns_csv, render_report, write_returns_csv};
use memetrace::classifier::{read_stoplist, KeywordModel};
use memetrace::config::DetectorConfig;
use memetrace::ingest::{load_dataset, write_dataset, DatasetPaths};
use memetrace::pipeline::{detect_all, parse_detectors, read_events_jsonl, sort_events, write_events_jsonl};
use memetrace::scenario::{generate, ScenarioKind, ScenarioSpec};
use memetrace::{Error, Result};

/// Manipulation detection for DEX-traded meme coins.
#[derive(Debug, Parser)]
#[command(name = "memetrace", version)]
struct Cli {
    /// Threshold overrides as `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate raw CSVs and write the accepted rows as a clean dataset.
    Ingest {
        #[arg(long)]
        tokens: PathBuf,
        #[arg(long)]
        ohlcv: PathBuf,
        #[arg(long)]
        trades: PathBuf,
        #[arg(long)]
        holders: PathBuf,
        #[arg(long)]
        economics: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a meme keyword model from a corpus of token names, one per line.
    Classify {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        stoplist: Option<PathBuf>,
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-token returns over a window starting at `--t0`.
    Returns {
        #[arg(long)]
        data: PathBuf,
        /// Window start, Unix seconds.
        #[arg(long)]
        t0: i64,
        #[arg(long)]
        window_days: Option<i64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run detectors and write events as JSON lines.
    Detect {
        #[arg(long)]
        data: PathBuf,
        /// wash, lpi, pnd, rug, anomaly, a comma-separated list, or all.
        #[arg(long, default_value = "all")]
        kind: String,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a labeled synthetic dataset.
    Simulate {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        tokens: usize,
        #[arg(long, default_value_t = 90)]
        days: u32,
        /// Scenario parameter as `key=value`; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prevalence report over the high-return tokens of a returns file.
    Report {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        returns: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write_json(value: &impl serde::Serialize, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&serde_json::to_value(value)?)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Write { path: path.to_owned(), source })
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {threads} threads: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => DetectorConfig::from_file(path)?,
        None => DetectorConfig::default(),
    };
    match cli.command {
        Command::Ingest { tokens, ohlcv, trades, holders, economics, out } => {
            let paths = DatasetPaths { tokens, ohlcv: Some(ohlcv), trades: Some(trades), holders: Some(holders), economics };
            let (dataset, report) = load_dataset(&paths)?;
            write_dataset(&dataset, &out)?;
            write_json(&report, &out.join("ingest_report.json"))?;
            eprintln!("ingested {} tokens, rejected {} rows", dataset.tokens.len(), report.rejected_total());
        }
        Command::Classify { corpus, stoplist, cutoff, out } => {
            let text = std::fs::read_to_string(&corpus).map_err(|source| Error::Read { path: corpus.clone(), source })?;
            let names: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
            let stoplist = stoplist.map(|p| read_stoplist(&p)).transpose()?.unwrap_or_default();
            let model = KeywordModel::build(&names, stoplist, cutoff)?;
            model.write_csv(&out)?;
            eprintln!("kept {} keywords from {} names", model.cutoff_k, names.len());
        }
        Command::Returns { data, t0, window_days, out } => {
            let (dataset, _) = load_dataset(&DatasetPaths::in_dir(&data))?;
            let mut rcfg = cfg.returns.clone();
            if let Some(days) = window_days {
                if days <= 0 {
                    return Err(Error::InvalidArgument("--window-days must be positive".into()));
                }
                rcfg.window_days = days;
            }
            write_returns_csv(&compute_returns(&dataset, t0, &rcfg), &out)?;
        }
        Command::Detect { data, kind, threads, out } => {
            let detectors = parse_detectors(&kind)?;
            let (dataset, _) = load_dataset(&DatasetPaths::in_dir(&data))?;
            let result = thread_pool(threads)?.install(|| detect_all(&dataset, &detectors, &cfg));
            write_events_jsonl(&result.events, &out)?;
            for d in &result.diagnostics {
                eprintln!("note: {}", serde_json::to_string(d)?);
            }
            eprintln!("{} events from {} tokens", result.events.len(), dataset.tokens.len());
        }
        Command::Simulate { kind, seed, tokens, days, params, out } => {
            let kind: ScenarioKind = kind.parse()?;
            let mut spec = ScenarioSpec::new(kind, seed, days, tokens);
            for p in &params {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidArgument(format!("--param expects key=value, got `{p}`")))?;
                let v: f64 =
                    v.trim().parse().map_err(|_| Error::InvalidArgument(format!("--param {k}: `{v}` is not a number")))?;
                spec.params.insert(k.trim().to_owned(), v);
            }
            generate(&spec)?.write(&out)?;
        }
        Command::Report { events, returns, out } => {
            let mut events = read_events_jsonl(&events)?;
            sort_events(&mut events);
            let returns = read_returns_csv(&returns)?;
            let report = prevalence(&returns, &events);
            let known: BTreeSet<&str> = returns.iter().map(|r| r.token_id.as_str()).collect();
            events.retain(|e| known.contains(e.token_id.as_str()));
            render_report(&report, &events, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
