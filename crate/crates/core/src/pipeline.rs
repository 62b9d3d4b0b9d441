//! Runs the detector suite over a whole dataset.
//!
//! Tokens are processed in parallel; the merged event list is sorted by
//! [`DetectionEvent::sort_key`], so output does not depend on thread count.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::DetectorConfig;
use crate::error::{Error, Result};
use crate::extraction::{detect_pump_dump, detect_rug_pull, PeakSkip};
use crate::growth::{detect_anomalies, detect_lpi, detect_wash_trading};
use crate::ingest::Dataset;
use crate::model::{aggregate_daily, DetectionEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Anomaly,
    Wash,
    Lpi,
    Pnd,
    Rug,
}

impl Detector {
    pub const ALL: [Detector; 5] = [Detector::Anomaly, Detector::Wash, Detector::Lpi, Detector::Pnd, Detector::Rug];

    pub fn as_str(self) -> &'static str {
        match self {
            Detector::Anomaly => "anomaly",
            Detector::Wash => "wash",
            Detector::Lpi => "lpi",
            Detector::Pnd => "pnd",
            Detector::Rug => "rug",
        }
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown detector `{s}`")))
    }
}

/// Parses `all` or a comma-separated list of detector names.
pub fn parse_detectors(s: &str) -> Result<BTreeSet<Detector>> {
    if s == "all" {
        return Ok(Detector::ALL.into_iter().collect());
    }
    s.split(',').map(|p| p.trim().parse()).collect()
}

/// Per-token notes on candidates that could not be fully evaluated.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TokenDiagnostics {
    pub token_id: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub wash_days_without_trades: Vec<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lpi_days_without_trades: Vec<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pnd_skipped_peaks: Vec<(i64, PeakSkip)>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub pnd_insufficient_history: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rug_provisional_days: Vec<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rug_skipped_days: Vec<i64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub rug_invariant_violation: bool,
}

impl TokenDiagnostics {
    pub fn is_empty(&self) -> bool {
        *self == TokenDiagnostics { token_id: self.token_id.clone(), ..Default::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DetectionOutput {
    pub events: Vec<DetectionEvent>,
    pub diagnostics: Vec<TokenDiagnostics>,
}

pub fn detect_token(
    dataset: &Dataset,
    token_id: &str,
    detectors: &BTreeSet<Detector>,
    cfg: &DetectorConfig,
) -> (Vec<DetectionEvent>, TokenDiagnostics) {
    let mut events = Vec::new();
    let mut diag = TokenDiagnostics { token_id: token_id.to_owned(), ..Default::default() };
    let bars = dataset.bars(token_id);
    let trades = dataset.trades(token_id);
    let daily = aggregate_daily(bars);

    for &d in detectors {
        match d {
            Detector::Anomaly => {
                for snap in dataset.holders(token_id) {
                    events.extend(detect_anomalies(token_id, snap, &cfg.anomaly));
                }
            }
            Detector::Wash => {
                let r = detect_wash_trading(token_id, &daily, trades, &cfg.wash);
                diag.wash_days_without_trades = r.screened.iter().filter(|s| !s.has_trades).map(|s| s.day.day).collect();
                events.extend(r.events);
            }
            Detector::Lpi => {
                let r = detect_lpi(token_id, &daily, trades, &cfg.lpi);
                diag.lpi_days_without_trades = r.missing_trade_days;
                events.extend(r.events);
            }
            Detector::Pnd => {
                let r = detect_pump_dump(token_id, bars, &cfg.pnd);
                diag.pnd_skipped_peaks = r.skipped_peaks;
                diag.pnd_insufficient_history = r.insufficient_history && !bars.is_empty();
                events.extend(r.events);
            }
            Detector::Rug => {
                let r = detect_rug_pull(token_id, &daily, &cfg.rug);
                diag.rug_provisional_days = r.provisional_days;
                diag.rug_skipped_days = r.skipped_days;
                diag.rug_invariant_violation = r.invariant_violation;
                events.extend(r.events);
            }
        }
    }
    (events, diag)
}

/// Runs `detectors` on every token of `dataset` in the current rayon pool.
pub fn detect_all(dataset: &Dataset, detectors: &BTreeSet<Detector>, cfg: &DetectorConfig) -> DetectionOutput {
    let ids: Vec<&String> = dataset.tokens.keys().collect();
    let per_token: Vec<_> = ids.par_iter().map(|id| detect_token(dataset, id, detectors, cfg)).collect();
    let mut out = DetectionOutput::default();
    for (events, diag) in per_token {
        out.events.extend(events);
        if !diag.is_empty() {
            out.diagnostics.push(diag);
        }
    }
    sort_events(&mut out.events);
    out
}

pub fn sort_events(events: &mut [DetectionEvent]) {
    events.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.actors.cmp(&b.actors)));
}

/// One JSON object per line, in the order given.
pub fn write_events_jsonl(events: &[DetectionEvent], path: &Path) -> Result<()> {
    let err = |source| Error::Write { path: path.to_owned(), source };
    let mut out = BufWriter::new(File::create(path).map_err(err)?);
    for ev in events {
        serde_json::to_writer(&mut out, ev)?;
        out.write_all(b"\n").map_err(err)?;
    }
    out.flush().map_err(err)
}

pub fn read_events_jsonl(path: &Path) -> Result<Vec<DetectionEvent>> {
    let err = |source| Error::Read { path: path.to_owned(), source };
    let reader = BufReader::new(File::open(path).map_err(err)?);
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(err)?;
        if line.trim().is_empty() {
            continue;
        }
        let ev: DetectionEvent = serde_json::from_str(&line).map_err(|e| Error::Csv {
            path: path.to_owned(),
            message: format!("line {}: {e}", i + 1),
        })?;
        events.push(ev);
    }
    Ok(events)
}
